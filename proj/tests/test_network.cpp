#include <gtest/gtest.h>

#include <random>

#include "creditnet/network.hpp"
#include "fixtures.hpp"

using namespace creditnet;

namespace {

BalanceState bal(std::initializer_list<int> v)
{
    std::vector<Tokens> b;
    for (int x : v) b.emplace_back(x);
    return BalanceState(b);
}

FlowVector flow(std::initializer_list<int> v)
{
    std::vector<Tokens> f;
    for (int x : v) f.emplace_back(x);
    return FlowVector(f);
}

} // namespace

TEST(CreditNetwork, CanonicalizesEdgeOrder)
{
    CreditNetwork net(4, {{3, 2}, {0, 1}, {2, 0}}, {Tokens(1), Tokens(2), Tokens(3)});
    ASSERT_EQ(net.edge_count(), 3u);
    EXPECT_EQ(net.edge(0), (Edge{0, 1}));
    EXPECT_EQ(net.edge(1), (Edge{0, 2}));
    EXPECT_EQ(net.edge(2), (Edge{2, 3}));
    EXPECT_EQ(net.capacity(1), Tokens(3));
    EXPECT_EQ(net.capacity(2), Tokens(1));
    EXPECT_EQ(*net.find_edge(3, 2), 2u);
    EXPECT_FALSE(net.find_edge(1, 3).has_value());
}

TEST(CreditNetwork, RejectsBadEdges)
{
    EXPECT_THROW(CreditNetwork(3, {{1, 1}}, {Tokens(1)}), InvalidInput);
    EXPECT_THROW(CreditNetwork(3, {{0, 1}, {1, 0}}, {Tokens(1), Tokens(1)}), InvalidInput);
    EXPECT_THROW(CreditNetwork(3, {{0, 3}}, {Tokens(1)}), InvalidInput);
    EXPECT_THROW(CreditNetwork(3, {{0, 1}}, {Tokens(0)}), InvalidInput);
}

TEST(RoutingSystem, Table1Matrices)
{
    auto [net, paths] = fixtures::table1_line();
    auto r = build_routing_system(net, paths);
    std::vector<std::vector<int>> fwd{{1, 0, 0, 0}, {1, 0, 1, 0}};
    std::vector<std::vector<int>> bwd{{0, 1, 0, 1}, {0, 1, 0, 0}};
    EXPECT_EQ(r.dense_forward(), fwd);
    EXPECT_EQ(r.dense_backward(), bwd);
    auto d = r.dense_delta();
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(d[k][p], fwd[k][p] - bwd[k][p]);
}

TEST(RoutingSystem, EmptyAndSingleHop)
{
    auto net = CreditNetwork::with_uniform_capacity(2, {{0, 1}}, 4);
    auto empty = build_routing_system(net, PathSet{});
    EXPECT_EQ(empty.path_count(), 0u);
    EXPECT_EQ(empty.dense_forward(), std::vector<std::vector<int>>(1));
    auto one = build_routing_system(net, PathSet::from_node_sequences(net, {{0, 1}}));
    EXPECT_EQ(one.dense_forward(), (std::vector<std::vector<int>>{{1}}));
    EXPECT_EQ(one.dense_backward(), (std::vector<std::vector<int>>{{0}}));
    EXPECT_EQ(one.dense_delta(), (std::vector<std::vector<int>>{{1}}));
}

TEST(RoutingSystem, RejectsBrokenPaths)
{
    auto [net, paths] = fixtures::table1_line();
    Path gap{0, 2, {{0, Direction::Forward}, {0, Direction::Forward}}};
    EXPECT_THROW(build_routing_system(net, PathSet({gap})), InvalidInput);
    Path bad_edge{0, 1, {{7, Direction::Forward}}};
    EXPECT_THROW(build_routing_system(net, PathSet({bad_edge})), InvalidInput);
    try {
        build_routing_system(net, PathSet({paths[0], gap}));
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("path 1"), std::string::npos);
    }
}

TEST(RoutingSystem, ColumnSumsEqualPathLength)
{
    auto [net, paths] = fixtures::peelable_line();
    auto r = build_routing_system(net, paths);
    auto f = r.dense_forward(), b = r.dense_backward();
    for (std::size_t p = 0; p < paths.size(); ++p) {
        std::size_t ones = 0;
        for (std::size_t k = 0; k < net.edge_count(); ++k) {
            EXPECT_FALSE(f[k][p] && b[k][p]);
            ones += static_cast<std::size_t>(f[k][p] + b[k][p]);
        }
        EXPECT_EQ(ones, paths[p].length());
    }
}

TEST(Feasibility, Table1Examples)
{
    auto [net, paths] = fixtures::table1_line();
    auto r = build_routing_system(net, paths);
    EXPECT_TRUE(check_feasible(net, r, bal({15, 5}), flow({3, 0, 2, 0})));
    EXPECT_FALSE(check_feasible(net, r, bal({15, 5}), flow({6, 0, 0, 0})));
    EXPECT_TRUE(check_feasible(net, r, bal({15, 5}), FlowVector::zero(4)));
    std::vector<double> lp_flow{3.0 + 1e-12, 0.0, 2.0, 0.0};
    EXPECT_TRUE(check_feasible(net, r, bal({15, 5}), std::span<const double>(lp_flow)));
}

TEST(ApplyFlow, Table1Transition)
{
    auto [net, paths] = fixtures::table1_line();
    auto r = build_routing_system(net, paths);
    EXPECT_EQ(apply_flow(net, r, bal({15, 5}), flow({3, 0, 2, 0})), bal({12, 0}));
    EXPECT_EQ(apply_flow(net, r, bal({15, 5}), FlowVector::zero(4)), bal({15, 5}));
    EXPECT_EQ(apply_flow(net, r, bal({10, 10}), flow({10, 10, 0, 0})), bal({10, 10}));
}

TEST(ApplyFlow, NamesViolatedChannel)
{
    auto [net, paths] = fixtures::table1_line();
    auto r = build_routing_system(net, paths);
    try {
        apply_flow(net, r, bal({15, 5}), flow({6, 0, 0, 0}));
        FAIL();
    } catch (const InfeasibleFlow& e) {
        EXPECT_EQ(e.edge(), 1u);
        EXPECT_EQ(e.direction(), Direction::Forward);
    }
    try {
        apply_flow(net, r, bal({15, 5}), flow({0, 0, 0, 6}));
        FAIL();
    } catch (const InfeasibleFlow& e) {
        EXPECT_EQ(e.edge(), 0u);
        EXPECT_EQ(e.direction(), Direction::Backward);
    }
}

TEST(ClassifyState, Examples)
{
    auto [net, paths] = fixtures::table1_line();
    EXPECT_EQ(classify_state(net, bal({10, 10})).kind, StateKind::Interior);
    auto corner = classify_state(net, bal({20, 0}));
    EXPECT_EQ(corner.kind, StateKind::Corner);
    ASSERT_EQ(corner.imbalanced.size(), 2u);
    EXPECT_EQ(corner.imbalanced[0], (ImbalancedSide{0, Direction::Backward}));
    EXPECT_EQ(corner.imbalanced[1], (ImbalancedSide{1, Direction::Forward}));
    EXPECT_EQ(classify_state(net, bal({15, 5})).kind, StateKind::Interior);
    auto boundary = classify_state(net, bal({0, 7}));
    EXPECT_EQ(boundary.kind, StateKind::Boundary);
    ASSERT_EQ(boundary.imbalanced.size(), 1u);
    EXPECT_THROW(classify_state(net, bal({21, 0})), InvalidInput);
}

// Random small instances for the algebraic properties of the transition map.
class TransitionProperties : public ::testing::TestWithParam<int> {};

TEST_P(TransitionProperties, ConservationAdditivityCirculation)
{
    std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
    auto [net, paths] = fixtures::peelable_line();
    auto r = build_routing_system(net, paths);
    std::uniform_int_distribution<int> coin(0, 10);
    std::vector<Tokens> b;
    for (std::size_t k = 0; k < net.edge_count(); ++k) b.emplace_back(coin(rng));
    BalanceState b0(b);
    auto random_flow = [&]() {
        std::vector<Tokens> f;
        for (std::size_t p = 0; p < paths.size(); ++p) f.emplace_back(coin(rng), 4);
        return FlowVector(f);
    };
    for (int t = 0; t < 50; ++t) {
        auto f1 = random_flow(), f2 = random_flow();
        if (!check_feasible(net, r, b0, f1)) continue;
        auto b1 = apply_flow(net, r, b0, f1);
        for (std::size_t k = 0; k < net.edge_count(); ++k) {
            EXPECT_GE(b1[k], 0);
            EXPECT_LE(b1[k], net.capacity(k));
        }
        if (check_feasible(net, r, b1, f2) && check_feasible(net, r, b0, f1 + f2)) {
            EXPECT_EQ(apply_flow(net, r, b1, f2), apply_flow(net, r, b0, f1 + f2));
        }
    }
    // a circulation: A->B->C together with the flows C->B and B->A
    FlowVector circ(std::vector<Tokens>{Tokens(1), Tokens(1), Tokens(0), Tokens(1), Tokens(0)});
    BalanceState mid = BalanceState::center(net);
    EXPECT_EQ(apply_flow(net, r, mid, circ), mid);
}

INSTANTIATE_TEST_SUITE_P(Seeds, TransitionProperties, ::testing::Range(1, 6));

TEST(ClassifyState, InvariantUnderEndpointSwap)
{
    // relabel nodes 0 <-> 2 on the line: each edge's stored orientation flips
    auto [net, paths] = fixtures::table1_line();
    auto flipped = CreditNetwork::with_uniform_capacity(3, {{2, 1}, {1, 0}}, 20);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> d(0, 20);
    for (int t = 0; t < 200; ++t) {
        int b0 = d(rng), b1 = d(rng);
        auto a = classify_state(net, bal({b0, b1}));
        // old edge (0,1) becomes (1,2) = index 1; old (1,2) becomes (0,1) = index 0
        auto c = classify_state(flipped, bal({20 - b1, 20 - b0}));
        EXPECT_EQ(a.kind, c.kind);
        EXPECT_EQ(a.imbalanced.size(), c.imbalanced.size());
    }
}
