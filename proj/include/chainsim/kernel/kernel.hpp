#pragma once

#include <chainsim/kernel/sim_time.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace chainsim {

/// Fatal simulation logic error; aborts the current run.
class SimulationError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class EventKind : std::uint8_t {
    NewBlock,
    NewTransaction,
    MiningTimer,
    TxGenTimer,
    CleanupTimer,
    SampleTimer,
    Publish,
    EndOfSimulation,
};

const char* to_string(EventKind kind);

/// Target id for events addressed to global modules rather than a node.
inline constexpr std::uint32_t kGlobalTarget = 0xFFFFFFFFu;

struct Event {
    SimTime time;
    std::uint64_t seq = 0;
    std::uint32_t target = kGlobalTarget;
    EventKind kind = EventKind::EndOfSimulation;
    bool tracked = false;
    std::uint64_t data = 0;
};

struct EventHandle {
    std::uint64_t seq = 0;
    bool valid() const { return seq != 0; }
};

/// Single-threaded discrete-event scheduler. Events dispatch in (time, seq)
/// order; seq is assigned at scheduling, so equal-time events are FIFO.
class Kernel {
public:
    using Handler = std::function<void(const Event&)>;

    struct Delivery {
        SimTime time;
        std::uint32_t target = 0;
    };

    Kernel() = default;
    explicit Kernel(Handler handler) : handler_(std::move(handler)) {}

    void set_handler(Handler handler) { handler_ = std::move(handler); }

    /// Cancellable scheduling. Throws SimulationError if `at` is in the past.
    EventHandle schedule(SimTime at, std::uint32_t target, EventKind kind, std::uint64_t data = 0);

    /// Fire-and-forget scheduling for high-volume events (message deliveries).
    void post(SimTime at, std::uint32_t target, EventKind kind, std::uint64_t data = 0);

    /// Equivalent to calling post() once per delivery, in the given order, but
    /// keeps only the earliest undelivered entry of the batch in the queue.
    void post_batch(std::span<const Delivery> deliveries, EventKind kind, std::uint64_t data);

    /// True if the event was pending and is now inert.
    bool cancel(EventHandle handle);

    bool is_pending(EventHandle handle) const { return live_.contains(handle.seq); }

    /// Dispatches every event with time <= end, then sets the clock to end.
    std::uint64_t run_until(SimTime end);

    SimTime now() const { return now_; }
    std::size_t queued() const { return pending_; }
    std::uint64_t dispatched_total() const { return dispatched_; }

private:
    static constexpr std::uint32_t kNoBatch = 0xFFFFFFFFu;

    struct Entry {
        SimTime time;
        std::uint64_t seq;
        std::uint64_t data;
        std::uint32_t target;
        std::uint32_t batch; // kNoBatch for single events
        EventKind kind;
        bool tracked;

        bool before(const Entry& o) const { return time != o.time ? time < o.time : seq < o.seq; }
    };

    struct BatchItem {
        SimTime time;
        std::uint64_t seq;
        std::uint32_t target;
    };

    struct Batch {
        std::vector<BatchItem> items; // sorted by (time, seq)
        std::uint32_t next = 0;
        EventKind kind = EventKind::NewTransaction;
        std::uint64_t data = 0;
    };

    void check_time(SimTime at, EventKind kind) const;
    void push(const Entry& e);
    Entry pop();
    void compact(); // drops cancelled entries from the heap

    Handler handler_;
    std::vector<Entry> heap_; // 4-ary min-heap
    std::vector<Batch> batches_;
    std::vector<std::uint32_t> free_batches_;
    std::unordered_set<std::uint64_t> live_;
    SimTime now_{};
    std::uint64_t next_seq_ = 1;
    std::uint64_t dispatched_ = 0;
    std::size_t pending_ = 0;
    std::size_t cancelled_ = 0; // cancelled entries still in the heap
    SimTime last_time_{};
    std::uint64_t last_seq_ = 0;
};

} // namespace chainsim
