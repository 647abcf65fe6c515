#include <chainsim/kernel/kernel.hpp>

#include <algorithm>

#include <fmt/format.h>

namespace chainsim {

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::NewBlock: return "new-block";
    case EventKind::NewTransaction: return "new-transaction";
    case EventKind::MiningTimer: return "mining-timer";
    case EventKind::TxGenTimer: return "txgen-timer";
    case EventKind::CleanupTimer: return "cleanup-timer";
    case EventKind::SampleTimer: return "sample-timer";
    case EventKind::Publish: return "publish";
    case EventKind::EndOfSimulation: return "end-of-simulation";
    }
    return "unknown";
}

void Kernel::check_time(SimTime at, EventKind kind) const
{
    if (at < now_) {
        throw SimulationError(fmt::format("event {} scheduled at {}us, before current time {}us", to_string(kind),
                                          at.micros, now_.micros));
    }
}

void Kernel::push(const Entry& e)
{
    std::size_t i = heap_.size();
    heap_.push_back(e);
    while (i > 0) {
        const std::size_t parent = (i - 1) / 4;
        if (!e.before(heap_[parent])) break;
        heap_[i] = heap_[parent];
        i = parent;
    }
    heap_[i] = e;
}

Kernel::Entry Kernel::pop()
{
    const Entry top = heap_.front();
    const Entry last = heap_.back();
    heap_.pop_back();
    const std::size_t n = heap_.size();
    if (n == 0) return top;
    std::size_t i = 0;
    for (;;) {
        const std::size_t first = 4 * i + 1;
        if (first >= n) break;
        std::size_t best = first;
        const std::size_t stop = std::min(first + 4, n);
        for (std::size_t c = first + 1; c < stop; ++c) {
            if (heap_[c].before(heap_[best])) best = c;
        }
        if (!heap_[best].before(last)) break;
        heap_[i] = heap_[best];
        i = best;
    }
    heap_[i] = last;
    return top;
}

EventHandle Kernel::schedule(SimTime at, std::uint32_t target, EventKind kind, std::uint64_t data)
{
    check_time(at, kind);
    const std::uint64_t seq = next_seq_++;
    push(Entry{at, seq, data, target, kNoBatch, kind, true});
    ++pending_;
    live_.insert(seq);
    return EventHandle{seq};
}

void Kernel::post(SimTime at, std::uint32_t target, EventKind kind, std::uint64_t data)
{
    check_time(at, kind);
    push(Entry{at, next_seq_++, data, target, kNoBatch, kind, false});
    ++pending_;
}

void Kernel::post_batch(std::span<const Delivery> deliveries, EventKind kind, std::uint64_t data)
{
    if (deliveries.empty()) return;
    for (const Delivery& d : deliveries) check_time(d.time, kind);
    std::uint32_t slot;
    if (!free_batches_.empty()) {
        slot = free_batches_.back();
        free_batches_.pop_back();
    } else {
        slot = static_cast<std::uint32_t>(batches_.size());
        batches_.emplace_back();
    }
    Batch& b = batches_[slot];
    b.items.clear();
    for (const Delivery& d : deliveries) b.items.push_back(BatchItem{d.time, next_seq_++, d.target});
    std::sort(b.items.begin(), b.items.end(), [](const BatchItem& x, const BatchItem& y) {
        return x.time != y.time ? x.time < y.time : x.seq < y.seq;
    });
    b.next = 1;
    b.kind = kind;
    b.data = data;
    const BatchItem& f = b.items.front();
    push(Entry{f.time, f.seq, data, f.target, slot, kind, false});
    pending_ += deliveries.size();
}

bool Kernel::cancel(EventHandle handle)
{
    if (!handle.valid()) return false;
    if (live_.erase(handle.seq) == 0) return false;
    if (++cancelled_ > 64 && cancelled_ * 2 > heap_.size()) compact();
    return true;
}

void Kernel::compact()
{
    std::erase_if(heap_, [this](const Entry& e) { return e.tracked && !live_.contains(e.seq); });
    pending_ -= cancelled_;
    cancelled_ = 0;
    std::vector<Entry> entries;
    entries.swap(heap_);
    for (const Entry& e : entries) push(e);
}

std::uint64_t Kernel::run_until(SimTime end)
{
    std::uint64_t count = 0;
    while (!heap_.empty() && heap_.front().time <= end) {
        const Entry e = pop();
        --pending_;
        if (e.batch != kNoBatch) {
            Batch& b = batches_[e.batch];
            if (b.next < b.items.size()) {
                const BatchItem& n = b.items[b.next++];
                push(Entry{n.time, n.seq, b.data, n.target, e.batch, b.kind, false});
            } else {
                free_batches_.push_back(e.batch);
            }
        }
        if (e.tracked && live_.erase(e.seq) == 0) {
            --cancelled_;
            continue;
        }
        if (e.time < last_time_ || (e.time == last_time_ && e.seq <= last_seq_)) {
            throw SimulationError("event dispatch order violated");
        }
        last_time_ = e.time;
        last_seq_ = e.seq;
        now_ = e.time;
        ++count;
        ++dispatched_;
        if (handler_) handler_(Event{e.time, e.seq, e.target, e.kind, e.tracked, e.data});
    }
    if (end > now_) now_ = end;
    return count;
}

} // namespace chainsim
