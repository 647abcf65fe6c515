#include "support/selfish_oracle.hpp"

#include <chainsim/selfish/selfish_manager.hpp>

#include <doctest.h>

#include <random>

using namespace chainsim;

namespace {

// Node 0 withholds, node 1 mines honestly, node 2 only observes.
struct Arena {
    Kernel kernel;
    std::unique_ptr<Network> net;

    explicit Arena(std::uint64_t seed = 1)
    {
        std::vector<NodeConfig> nodes(3);
        nodes[0].label = "attacker";
        nodes[0].miner = MinerConfig{1};
        nodes[0].selfish = true;
        nodes[1].label = "honest";
        nodes[1].miner = MinerConfig{1};
        nodes[2].label = "observer";
        NetworkParams p;
        p.cleanup_interval = SimTime{};
        p.sample_interval = SimTime{};
        net = std::make_unique<Network>(kernel, seed, p, nodes, [](const NodeConfig& c, NodeId) -> std::unique_ptr<ChainManager> {
            if (c.selfish) return std::make_unique<SelfishChainManager>();
            return std::make_unique<HonestChainManager>();
        });
        net->stop_mining();
    }

    Node& attacker() { return net->node(NodeId{0}); }
    Node& honest() { return net->node(NodeId{1}); }
    Node& observer() { return net->node(NodeId{2}); }
    SelfishChainManager& selfish() { return static_cast<SelfishChainManager&>(*attacker().manager); }

    BlockId attack() { return net->miner_on_win(attacker()); }
    BlockId mine_honest() { return net->miner_on_win(honest()); }
    void settle() { kernel.run_until(kernel.now() + SimTime::from_seconds_int(60)); }
};

} // namespace

TEST_SUITE("selfish") {

TEST_CASE("private blocks are withheld")
{
    Arena a;
    const BlockId a1 = a.attack();
    CHECK(a.kernel.queued() == 0);
    CHECK(a.selfish().unpublished() == 1);
    CHECK(a.net->blocks().get(a1).withheld);
    const BlockId a2 = a.attack();
    CHECK(a.kernel.queued() == 0);
    CHECK(a.selfish().unpublished() == 2);
    CHECK(a.attacker().view.main_tip() == a2);
    a.settle();
    CHECK_FALSE(a.honest().view.knows(a1));
    CHECK(a.selfish().episodes_started() == 1);
}

TEST_CASE("no lead: the attacker adopts the honest block")
{
    Arena a;
    const BlockId h1 = a.mine_honest();
    a.settle();
    CHECK(a.attacker().view.main_tip() == h1);
    CHECK(a.selfish().unpublished() == 0);
    CHECK(a.kernel.queued() == 0);
    CHECK(a.selfish().public_height() == 1);
}

TEST_CASE("lead 2: both private blocks override the honest block")
{
    Arena a;
    const BlockId a1 = a.attack();
    const BlockId a2 = a.attack();
    const BlockId h1 = a.mine_honest();
    a.settle();
    for (std::uint32_t i = 0; i < 3; ++i) {
        const Node& n = a.net->node(NodeId{i});
        CHECK(n.view.main_tip() == a2);
        CHECK(n.view.on_main_chain(a1));
        CHECK_FALSE(n.view.on_main_chain(h1));
    }
    CHECK(a.selfish().unpublished() == 0);
    CHECK_FALSE(a.selfish().racing());
}

TEST_CASE("lead 3: one block is published and the lead drops to 2")
{
    Arena a;
    const BlockId a1 = a.attack();
    a.attack();
    const BlockId a3 = a.attack();
    const BlockId h1 = a.mine_honest();
    a.settle();
    CHECK(a.selfish().unpublished() == 2);
    CHECK(a.honest().view.knows(a1));
    CHECK(a.honest().view.main_tip() == h1); // first seen keeps the honest block
    CHECK(a.attacker().view.main_tip() == a3);
    CHECK(a.selfish().public_height() == 1);

    // Next honest block: lead 2 again, so everything is published.
    const BlockId h2 = a.mine_honest();
    a.settle();
    CHECK(a.selfish().unpublished() == 0);
    CHECK(a.observer().view.main_tip() == a3);
    CHECK_FALSE(a.observer().view.on_main_chain(h2));
}

TEST_CASE("a win during a tie race takes both blocks")
{
    Arena a;
    const BlockId a1 = a.attack();
    const BlockId h1 = a.mine_honest();
    a.settle();
    CHECK(a.selfish().racing());
    CHECK(a.honest().view.knows(a1));
    CHECK(a.honest().view.main_tip() == h1);
    CHECK(a.observer().view.main_tip() == h1);

    const BlockId a2 = a.attack();
    CHECK_FALSE(a.selfish().racing());
    a.settle();
    for (std::uint32_t i = 0; i < 3; ++i) {
        const Node& n = a.net->node(NodeId{i});
        CHECK(n.view.main_tip() == a2);
        CHECK(n.view.on_main_chain(a1));
    }
    const AttackSummary s = summarize_attack(a.net->blocks(), a.observer().view.main_chain(), NodeId{0});
    CHECK(s.attacker_blocks == 2);
    CHECK(s.withheld_blocks == 2);
    CHECK(s.episodes == 1);
}

TEST_CASE("the tie publication waits for the honest block to reach everyone")
{
    Arena a(5);
    a.attack();
    const BlockId h1 = a.mine_honest();
    const SimTime horizon = a.net->delivery_horizon(h1);
    a.kernel.run_until(horizon);
    // At the horizon every honest node has h1 and none has switched.
    CHECK(a.observer().view.main_tip() == h1);
    a.settle();
    CHECK(a.observer().view.main_tip() == h1);
}

TEST_CASE("lost races leave no successful attack")
{
    Arena a;
    a.attack();
    a.mine_honest();
    a.settle();
    a.mine_honest(); // honest side wins the race
    a.settle();
    CHECK(a.selfish().unpublished() == 0);
    CHECK_FALSE(a.selfish().racing());
    const AttackSummary s = summarize_attack(a.net->blocks(), a.observer().view.main_chain(), NodeId{0});
    CHECK(s.chain_blocks == 2);
    CHECK(s.withheld_blocks == 0);
    CHECK(s.attacker_share() == 0.0);
}

TEST_CASE("stationary oracle reproduces the closed-form revenue")
{
    for (double alpha : {0.1, 0.2, 0.25, 0.3, 1.0 / 3, 0.4, 0.45}) {
        for (double gamma : {0.0, 0.5, 1.0}) {
            const double closed = (alpha * (1 - alpha) * (1 - alpha) * (4 * alpha + gamma * (1 - 2 * alpha)) -
                                   alpha * alpha * alpha) /
                                  (1 - alpha * (1 + (2 - alpha) * alpha));
            CHECK(test::selfish_revenue(alpha, gamma).share() == doctest::Approx(closed).epsilon(1e-9));
        }
    }
    CHECK(test::selfish_revenue(0.1).share() == doctest::Approx(0.0356).epsilon(0.005));
    CHECK(test::selfish_revenue(0.4).share() == doctest::Approx(0.4837).epsilon(0.005));
}

TEST_CASE("random event sequences keep the strategy consistent")
{
    // Oracle: the lead bookkeeping of the state machine, replayed on the
    // attacker's own view.
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 300; ++trial) {
        Arena a(trial + 1);
        for (int step = 0; step < 40; ++step) {
            if (gen() % 100 < 35) {
                a.attack();
            } else {
                a.mine_honest();
            }
            a.settle();
            const std::uint32_t priv = a.attacker().view.main_height();
            const std::uint32_t pub = a.honest().view.main_height();
            REQUIRE(priv >= pub);
            REQUIRE(a.selfish().unpublished() <= priv);
            // Honest views agree once propagation has settled.
            REQUIRE(a.honest().view.main_tip() == a.observer().view.main_tip());
            // Unpublished blocks are exactly the attacker's blocks unknown to honest nodes.
            std::size_t hidden = 0;
            for (BlockId b : a.attacker().view.main_chain()) hidden += !a.honest().view.knows(b);
            REQUIRE(hidden == a.selfish().unpublished());
        }
    }
}

} // TEST_SUITE
