#include <chainsim/kernel/kernel.hpp>
#include <chainsim/kernel/rng.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>
#include <vector>

using namespace chainsim;

namespace {

SimTime us(std::uint64_t v) { return SimTime::from_micros(v); }

struct Recorder {
    std::vector<std::tuple<std::uint64_t, std::uint32_t, std::uint64_t>> seen; // time, target, data
    Kernel::Handler handler()
    {
        return [this](const Event& e) { seen.emplace_back(e.time.micros, e.target, e.data); };
    }
};

} // namespace

TEST_SUITE("kernel") {

TEST_CASE("event at t=0 fires before later events")
{
    Recorder r;
    Kernel k(r.handler());
    k.post(us(5), 1, EventKind::NewBlock);
    k.schedule(us(0), 2, EventKind::MiningTimer);
    CHECK(k.run_until(us(10)) == 2);
    REQUIRE(r.seen.size() == 2);
    CHECK(std::get<1>(r.seen[0]) == 2);
}

TEST_CASE("equal times dispatch in scheduling order")
{
    Recorder r;
    Kernel k(r.handler());
    k.post(us(100), 0, EventKind::NewBlock, 'A');
    k.schedule(us(100), 0, EventKind::NewBlock, 'B');
    k.post(us(100), 0, EventKind::NewBlock, 'C');
    k.run_until(us(100));
    REQUIRE(r.seen.size() == 3);
    CHECK(std::get<2>(r.seen[0]) == 'A');
    CHECK(std::get<2>(r.seen[1]) == 'B');
    CHECK(std::get<2>(r.seen[2]) == 'C');
}

TEST_CASE("scheduling in the past throws")
{
    Kernel k([&](const Event&) {});
    k.run_until(us(60));
    CHECK_THROWS_AS(k.schedule(us(50), 0, EventKind::MiningTimer), SimulationError);
    CHECK_THROWS_AS(k.post(us(50), 0, EventKind::NewBlock), SimulationError);
    const Kernel::Delivery d[] = {{us(70), 1}, {us(40), 2}};
    CHECK_THROWS_AS(k.post_batch(d, EventKind::NewBlock, 0), SimulationError);
}

TEST_CASE("cancel semantics")
{
    Recorder r;
    Kernel k(r.handler());
    const EventHandle h = k.schedule(us(10), 0, EventKind::MiningTimer);
    CHECK(k.is_pending(h));
    CHECK(k.cancel(h));
    CHECK_FALSE(k.cancel(h));
    k.run_until(us(20));
    CHECK(r.seen.empty());

    const EventHandle fired = k.schedule(us(30), 0, EventKind::MiningTimer);
    k.run_until(us(40));
    CHECK(r.seen.size() == 1);
    CHECK_FALSE(k.cancel(fired));
    CHECK_FALSE(k.cancel(EventHandle{}));
}

TEST_CASE("run_until on an empty queue advances the clock")
{
    Kernel k([](const Event&) {});
    CHECK(k.run_until(us(1000)) == 0);
    CHECK(k.now() == us(1000));
}

TEST_CASE("run_until stops at the end time inclusive")
{
    Kernel k([](const Event&) {});
    for (std::uint64_t t : {1, 2, 3}) k.post(us(t), 0, EventKind::NewBlock);
    CHECK(k.run_until(us(2)) == 2);
    CHECK(k.now() == us(2));
    CHECK(k.queued() == 1);
    CHECK(k.run_until(us(5)) == 1);
    CHECK(k.dispatched_total() == 3);
}

TEST_CASE("handlers may schedule at the current time")
{
    int fired = 0;
    Kernel k;
    k.set_handler([&](const Event& e) {
        ++fired;
        if (e.data < 3) k.post(e.time, 0, EventKind::Publish, e.data + 1);
    });
    k.post(us(7), 0, EventKind::Publish, 0);
    k.run_until(us(7));
    CHECK(fired == 4);
}

TEST_CASE("batched posts dispatch exactly like individual posts")
{
    // Oracle: the same schedule issued through post() one event at a time.
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 10000; ++trial) {
        struct Op {
            bool batch;
            std::vector<Kernel::Delivery> items;
            std::uint64_t at;
        };
        std::vector<Op> ops;
        const int n_ops = 1 + static_cast<int>(gen() % 6);
        for (int i = 0; i < n_ops; ++i) {
            Op op;
            op.batch = gen() % 2;
            op.at = gen() % 4;
            const int n = 1 + static_cast<int>(gen() % 5);
            for (int j = 0; j < n; ++j) op.items.push_back({us(op.at + gen() % 5), static_cast<std::uint32_t>(j)});
            ops.push_back(op);
        }
        const auto drive = [&](bool use_batch) {
            Recorder r;
            std::vector<std::tuple<std::uint64_t, std::uint64_t>> order;
            Kernel k([&](const Event& e) { order.emplace_back(e.time.micros, e.data * 100 + e.target); });
            std::uint64_t clock = 0;
            for (std::size_t i = 0; i < ops.size(); ++i) {
                clock = std::max(clock, ops[i].at);
                k.run_until(us(clock));
                std::vector<Kernel::Delivery> items = ops[i].items;
                for (auto& d : items) d.time = std::max(d.time, k.now());
                if (use_batch && ops[i].batch) {
                    k.post_batch(items, EventKind::NewTransaction, i);
                } else {
                    for (const auto& d : items) k.post(d.time, d.target, EventKind::NewTransaction, i);
                }
            }
            k.run_until(us(100));
            return order;
        };
        const auto a = drive(true);
        const auto b = drive(false);
        REQUIRE(a == b);
    }
}

TEST_CASE("cancelled timers do not disturb later dispatch")
{
    // Oracle: a sorted list of the surviving (time, seq) pairs.
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint64_t> seen;
        Kernel k([&](const Event& e) { seen.push_back(e.data); });
        std::vector<std::pair<std::uint64_t, std::uint64_t>> expect;
        std::vector<EventHandle> handles;
        for (std::uint64_t i = 0; i < 400; ++i) {
            const std::uint64_t t = gen() % 1000;
            handles.push_back(k.schedule(us(t), 0, EventKind::MiningTimer, i));
            expect.emplace_back(t, i);
        }
        std::vector<bool> cancelled(400, false);
        for (int c = 0; c < 300; ++c) {
            const std::size_t i = gen() % 400;
            CHECK(k.cancel(handles[i]) == !cancelled[i]);
            cancelled[i] = true;
        }
        k.run_until(us(1000));
        std::vector<std::uint64_t> want;
        std::sort(expect.begin(), expect.end());
        for (auto [t, i] : expect) {
            if (!cancelled[i]) want.push_back(i);
        }
        REQUIRE(seen == want);
    }
}

} // TEST_SUITE

TEST_SUITE("rng") {

TEST_CASE("constant and degenerate uniform")
{
    RngStream s(1, "x");
    CHECK(draw(s, Distribution::constant(5)) == 5.0);
    CHECK(draw(s, Distribution::uniform(2, 2)) == 2.0);
}

TEST_CASE("exponential sample mean converges")
{
    RngStream s(123, "mining/0");
    double sum = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) sum += draw(s, Distribution::exponential(600.0));
    CHECK(std::abs(sum / n - 600.0) / 600.0 < 0.01);
}

TEST_CASE("uniform draws stay in support")
{
    RngStream s(9, "propagation");
    const Distribution d = Distribution::uniform(0.1, 5.0);
    for (int i = 0; i < 100000; ++i) {
        const double v = draw(s, d);
        REQUIRE(v >= 0.1);
        REQUIRE(v <= 5.0);
    }
}

TEST_CASE("empirical draws pick listed values with their frequencies")
{
    RngStream s(3, "txgen/1");
    const Distribution d = Distribution::empirical({1, 1, 1, 2, 2, 3});
    int counts[4] = {};
    const int n = 600000;
    for (int i = 0; i < n; ++i) {
        const double v = draw(s, d);
        REQUIRE((v == 1 || v == 2 || v == 3));
        ++counts[static_cast<int>(v)];
    }
    CHECK(counts[1] / double(n) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(counts[2] / double(n) == doctest::Approx(1.0 / 3).epsilon(0.01));
    CHECK(counts[3] / double(n) == doctest::Approx(1.0 / 6).epsilon(0.02));
}

TEST_CASE("streams are reproducible and independent")
{
    RngStream a(5, "mining/3"), b(5, "mining/3"), c(5, "mining/4"), d(6, "mining/3");
    std::vector<std::uint64_t> va, vb, vc, vd;
    for (int i = 0; i < 8; ++i) {
        va.push_back(a.next_u64());
        vb.push_back(b.next_u64());
        vc.push_back(c.next_u64());
        vd.push_back(d.next_u64());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
    CHECK(derive_stream_seed(5, "mining/3") != derive_stream_seed(5, "mining/30"));
}

TEST_CASE("uniform_index is unbiased enough and in range")
{
    RngStream s(11, "idx");
    int counts[7] = {};
    for (int i = 0; i < 70000; ++i) {
        const auto v = s.uniform_index(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("distribution validation")
{
    CHECK_FALSE(Distribution::constant(1).validate());
    CHECK(Distribution::uniform(3, 2).validate());
    CHECK(Distribution::exponential(0).validate());
    CHECK(Distribution::exponential(-1).validate());
    CHECK(Distribution::empirical({}).validate());
    CHECK(Distribution::exponential(600).mean() == 600.0);
    CHECK(Distribution::uniform(1, 3).mean() == 2.0);
}

} // TEST_SUITE

TEST_SUITE("time") {

TEST_CASE("duration parsing and formatting")
{
    SimTime t;
    REQUIRE(parse_duration("600", t));
    CHECK(t == SimTime::from_seconds_int(600));
    REQUIRE(parse_duration("0.25", t));
    CHECK(t.micros == 250000);
    REQUIRE(parse_duration("3d", t));
    CHECK(t == SimTime::from_seconds_int(3 * 86400));
    REQUIRE(parse_duration("1.5h", t));
    CHECK(t == SimTime::from_seconds_int(5400));
    REQUIRE(parse_duration("0.0000005", t));
    CHECK(t.micros == 1);
    CHECK_FALSE(parse_duration("1e3", t));
    CHECK_FALSE(parse_duration("-5", t));
    CHECK_FALSE(parse_duration("", t));
    CHECK_FALSE(parse_duration("5x", t));
    CHECK(format_seconds(SimTime::from_micros(250000)) == "0.25");
    CHECK(format_seconds(SimTime::from_seconds_int(90)) == "90");
    CHECK(format_duration(SimTime::from_micros(1)) == "0.000001s");
}

TEST_CASE("from_seconds rounds to the nearest microsecond")
{
    CHECK(SimTime::from_seconds(1.0000004).micros == 1000000);
    CHECK(SimTime::from_seconds(1.0000006).micros == 1000001);
    CHECK_THROWS(SimTime::from_seconds(-1));
    CHECK_THROWS(SimTime::from_seconds(std::nan("")));
}

} // TEST_SUITE
