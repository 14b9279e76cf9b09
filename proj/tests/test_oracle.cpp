#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "creditnet/oracle.hpp"
#include "creditnet/throughput.hpp"
#include "fixtures.hpp"

using namespace creditnet;

namespace {

// Every per-edge choice of {balanced, b = 0, b = C}: the largest witness state
// whose imbalanced edges pass verify_deadlock.
std::size_t max_deadlock_enumerated(const CreditNetwork& net, const PathSet& paths)
{
    std::size_t E = net.edge_count(), best = 0;
    std::size_t total = 1;
    for (std::size_t k = 0; k < E; ++k) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<DeadlockedEdge> edges;
        std::size_t c = code;
        for (std::size_t k = 0; k < E; ++k, c /= 3) {
            if (c % 3 == 1) edges.push_back({k, Direction::Forward});
            if (c % 3 == 2) edges.push_back({k, Direction::Backward});
        }
        if (edges.size() <= best) continue;
        DeadlockAssignment a{edges, deadlock_witness(net, edges)};
        if (verify_deadlock(net, paths, a)) best = edges.size();
    }
    return best;
}

BalanceState state(std::initializer_list<int> v)
{
    std::vector<Tokens> b;
    for (int x : v) b.emplace_back(x);
    return BalanceState(b);
}

std::size_t count_section(const std::string& lp, const std::string& from, const std::string& to)
{
    auto a = lp.find(from + "\n"), b = lp.find(to);
    std::istringstream in(lp.substr(a + from.size() + 1, b - a - from.size() - 1));
    std::size_t n = 0;
    std::string tok;
    if (from == "Binaries") {
        while (in >> tok) ++n;
    } else {
        std::string line;
        while (std::getline(in, line)) n += !line.empty();
    }
    return n;
}

} // namespace

TEST(MaxDeadlock, LineHasBothEdgesDeadlocked)
{
    auto inst = fixtures::table1_line();
    auto r = max_deadlock_exact(inst.net, inst.paths);
    ASSERT_TRUE(r.solved());
    EXPECT_EQ(r.assignment.size(), 2u);
    EXPECT_TRUE(verify_deadlock(inst.net, inst.paths, r.assignment));
    // node 0 holds everything on the first edge, node 2 on the second
    EXPECT_EQ(r.assignment.witness, state({20, 0}));
}

TEST(MaxDeadlock, OpposingSingleHopFlows)
{
    auto net = CreditNetwork::with_uniform_capacity(2, {{0, 1}}, 2);
    auto paths = PathSet::from_node_sequences(net, {{0, 1}, {1, 0}});
    auto r = max_deadlock_exact(net, paths);
    ASSERT_TRUE(r.solved());
    EXPECT_EQ(r.assignment.size(), 0u);
}

TEST(MaxDeadlock, TriangleHasNone)
{
    auto inst = fixtures::unpeelable_triangle();
    auto r = max_deadlock_exact(inst.net, inst.paths);
    ASSERT_TRUE(r.solved());
    EXPECT_EQ(r.assignment.size(), 0u);
}

TEST(MaxDeadlock, NoPathsDeadlocksEverything)
{
    auto net = CreditNetwork::with_uniform_capacity(3, {{0, 1}, {1, 2}}, 2);
    auto r = max_deadlock_exact(net, PathSet{});
    ASSERT_TRUE(r.solved());
    EXPECT_EQ(r.assignment.size(), 2u);
}

TEST(MaxDeadlock, SizeLimitReportsUnsolved)
{
    auto inst = fixtures::table1_line();
    auto r = max_deadlock_exact(inst.net, inst.paths, {1, 60});
    EXPECT_FALSE(r.solved());
    EXPECT_NE(r.reason.find("exceeds"), std::string::npos);
}

TEST(MaxDeadlock, MatchesEnumerationOnRandomInstances)
{
    for (std::uint64_t s = 0; s < 120; ++s) {
        auto inst = fixtures::random_instance(s, 6, s % 4, 3 + s % 7, 3);
        auto r = max_deadlock_exact(inst.net, inst.paths);
        ASSERT_TRUE(r.solved());
        EXPECT_EQ(r.assignment.size(), max_deadlock_enumerated(inst.net, inst.paths)) << "seed " << s;
        EXPECT_TRUE(verify_deadlock(inst.net, inst.paths, r.assignment)) << "seed " << s;
    }
}

TEST(MaxDeadlock, FullDeadlockSearch)
{
    auto inst = fixtures::table1_line();
    EXPECT_TRUE(find_full_deadlock(inst.net, inst.paths).has_value());
    auto t = fixtures::unpeelable_triangle();
    EXPECT_FALSE(find_full_deadlock(t.net, t.paths).has_value());
}

TEST(ExportIlp, SingleEdge)
{
    auto net = CreditNetwork::with_uniform_capacity(2, {{0, 1}}, 2);
    std::ostringstream out;
    export_ilp(out, net, PathSet{});
    auto lp = out.str();
    EXPECT_EQ(count_section(lp, "Binaries", "End"), 3u);
    EXPECT_EQ(count_section(lp, "Subject To", "Binaries"), 2u);
}

TEST(ExportIlp, LineObjectiveAndStability)
{
    auto inst = fixtures::table1_line();
    std::ostringstream a, b;
    export_ilp(a, inst.net, inst.paths);
    export_ilp(b, inst.net, inst.paths);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str().find(" obj: z_0 + z_1\n"), std::string::npos);
}

TEST(Reachable, LineAtCapacityTwo)
{
    auto inst = fixtures::table1_line(2);
    auto r = build_routing_system(inst.net, inst.paths);
    auto from_center = enumerate_reachable(inst.net, r, state({1, 1}), Tokens(1));
    EXPECT_NE(std::find(from_center.begin(), from_center.end(), state({1, 1})), from_center.end());
    EXPECT_NE(std::find(from_center.begin(), from_center.end(), state({0, 0})), from_center.end());
    auto from_corner = enumerate_reachable(inst.net, r, state({2, 0}), Tokens(1));
    ASSERT_EQ(from_corner.size(), 1u);
    EXPECT_EQ(from_corner[0], state({2, 0}));
}

TEST(Reachable, NoPaths)
{
    auto net = CreditNetwork::with_uniform_capacity(3, {{0, 1}, {1, 2}}, 4);
    auto r = build_routing_system(net, PathSet{});
    auto s = enumerate_reachable(net, r, state({1, 3}), Tokens(1));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], state({1, 3}));
}

TEST(Reachable, OpposingFlowsMoveFreely)
{
    auto net = CreditNetwork::with_uniform_capacity(2, {{0, 1}}, 2);
    auto paths = PathSet::from_node_sequences(net, {{0, 1}, {1, 0}});
    auto s = enumerate_reachable(net, build_routing_system(net, paths), state({0}), Tokens(1));
    EXPECT_EQ(s, (std::vector<BalanceState>{state({0}), state({1}), state({2})}));
}

TEST(Reachable, LatticeGuard)
{
    auto net = CreditNetwork::with_uniform_capacity(4, {{0, 1}, {1, 2}, {2, 3}}, 200);
    auto r = build_routing_system(net, PathSet{});
    EXPECT_THROW(enumerate_reachable(net, r, BalanceState::center(net), Tokens(1), 1000), LimitExceeded);
    EXPECT_THROW(enumerate_reachable(net, r, BalanceState::center(net), Tokens(3)), InvalidInput);
}

TEST(DeadlockedChannels, LineStates)
{
    auto inst = fixtures::table1_line();
    auto r = build_routing_system(inst.net, inst.paths);
    EXPECT_EQ(deadlocked_channels_bruteforce(inst.net, r, state({20, 0}), Tokens(10)), (std::vector<std::size_t>{0, 1}));
    EXPECT_TRUE(deadlocked_channels_bruteforce(inst.net, r, state({10, 10}), Tokens(10)).empty());
    EXPECT_TRUE(deadlocked_channels_bruteforce(inst.net, r, state({15, 5}), Tokens(5)).empty());
}

// With no deadlock at all, some reachable state recovers the balanced throughput.
TEST(Properties, DeadlockFreeRecoversMaxThroughput)
{
    std::mt19937_64 rng(5);
    std::size_t checked = 0;
    for (std::uint64_t s = 0; s < 300 && checked < 6; ++s) {
        auto inst = fixtures::random_instance(1000 + s, 4, 1, 10, 3, 1);
        if (inst.net.edge_count() > 5) continue;
        auto dl = max_deadlock_exact(inst.net, inst.paths);
        ASSERT_TRUE(dl.solved());
        if (dl.assignment.size() != 0) continue;
        ++checked;
        auto r = build_routing_system(inst.net, inst.paths);
        double psi_center = max_throughput(inst.net, r);
        Tokens g(1);
        for (int t = 0; t < 20; ++t) {
            std::vector<Tokens> b;
            for (std::size_t k = 0; k < inst.net.edge_count(); ++k) b.emplace_back(std::uniform_int_distribution<int>(0, 2)(rng));
            std::size_t k0 = std::uniform_int_distribution<std::size_t>(0, b.size() - 1)(rng);
            b[k0] = std::uniform_int_distribution<int>(0, 1)(rng) ? Tokens(0) : inst.net.capacity(k0);
            auto states = enumerate_reachable(inst.net, r, BalanceState(b), g);
            double best = 0;
            for (const auto& x : states) best = std::max(best, one_step_throughput(inst.net, r, x).psi_value);
            EXPECT_NEAR(best, psi_center, 1e-9) << "seed " << s;
        }
    }
    EXPECT_GE(checked, 3u);
}

// The witness of a maximum deadlock is a worst state: nothing reachable from it
// beats its own throughput, and every lattice state can reach at least as much.
TEST(Properties, WorstStateBoundsReachableThroughput)
{
    std::mt19937_64 rng(9);
    std::size_t checked = 0;
    for (std::uint64_t s = 0; s < 60 && checked < 8; ++s) {
        auto inst = fixtures::random_instance(2000 + s, 5, 1, 5, 3, 1);
        auto dl = max_deadlock_exact(inst.net, inst.paths);
        ASSERT_TRUE(dl.solved());
        if (dl.assignment.size() == 0) continue;
        ++checked;
        auto r = build_routing_system(inst.net, inst.paths);
        double worst = worst_state_throughput(inst.net, r, dl.assignment);
        auto best_from = [&](const BalanceState& b0) {
            double best = 0;
            for (const auto& b : enumerate_reachable(inst.net, r, b0, Tokens(1)))
                best = std::max(best, one_step_throughput(inst.net, r, b).psi_value);
            return best;
        };
        EXPECT_NEAR(best_from(dl.assignment.witness), worst, 1e-9) << "seed " << s;
        for (int t = 0; t < 10; ++t) {
            std::vector<Tokens> b;
            for (std::size_t k = 0; k < inst.net.edge_count(); ++k) b.emplace_back(std::uniform_int_distribution<int>(0, 2)(rng));
            EXPECT_GE(best_from(BalanceState(b)) + 1e-9, worst) << "seed " << s;
        }
    }
    EXPECT_GE(checked, 3u);
}
