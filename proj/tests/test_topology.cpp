#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "creditnet/io.hpp"
#include "creditnet/topology.hpp"

using namespace creditnet;

namespace {

TopologySpec make(TopologyKind kind, std::size_t n, std::size_t budget, std::uint64_t seed = 1)
{
    TopologySpec s;
    s.kind = kind;
    s.node_count = n;
    s.edge_budget = budget;
    s.seed = seed;
    return s;
}

std::vector<std::size_t> degrees(const CreditNetwork& g)
{
    std::vector<std::size_t> d;
    for (NodeId v = 0; v < g.node_count(); ++v) d.push_back(g.degree(v));
    return d;
}

bool simple(const CreditNetwork& g)
{
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& e : g.edges())
        if (e.u == e.v || !seen.insert(detail::ordered(e.u, e.v)).second) return false;
    return true;
}

std::string serialized(const CreditNetwork& g)
{
    std::ostringstream out;
    write_graph(out, g);
    return out.str();
}

} // namespace

TEST(GenTopology, StarOf500)
{
    auto g = gen_topology(make(TopologyKind::Star, 500, 499));
    EXPECT_EQ(g.edge_count(), 499u);
    EXPECT_EQ(g.degree(0), 499u);
    for (NodeId v = 1; v < 500; ++v) EXPECT_EQ(g.degree(v), 1u);
}

TEST(GenTopology, RandomRegular500By8)
{
    auto s = make(TopologyKind::RandomRegular, 500, 0);
    s.degree = 8;
    auto g = gen_topology(s);
    EXPECT_EQ(g.edge_count(), 2000u);
    for (auto d : degrees(g)) EXPECT_EQ(d, 8u);
    EXPECT_TRUE(simple(g));
    EXPECT_TRUE(g.connected());
}

TEST(GenTopology, SmallWorldWithoutRewiringIsRing)
{
    auto s = make(TopologyKind::SmallWorld, 10, 10);
    s.degree = 2;
    s.rewiring = 0;
    auto g = gen_topology(s);
    ASSERT_EQ(g.edge_count(), 10u);
    for (NodeId v = 0; v < 10; ++v) EXPECT_EQ(g.degree(v), 2u);
    for (const auto& e : g.edges()) EXPECT_TRUE(e.v - e.u == 1 || (e.u == 0 && e.v == 9));
}

TEST(GenTopology, EdgeBudgets)
{
    for (auto kind : {TopologyKind::ErdosRenyi, TopologyKind::ScaleFreeBA, TopologyKind::PowerLawConfig}) {
        auto g = gen_topology(make(kind, 500, 2000, 3));
        EXPECT_EQ(g.node_count(), 500u) << topology_name(kind);
        EXPECT_NEAR(static_cast<double>(g.edge_count()), 2000.0, 40.0) << topology_name(kind);
        EXPECT_TRUE(simple(g));
        EXPECT_TRUE(g.connected());
    }
    EXPECT_EQ(gen_topology(make(TopologyKind::ErdosRenyi, 100, 400)).edge_count(), 400u);
}

TEST(GenTopology, HeavyTails)
{
    for (auto kind : {TopologyKind::ScaleFreeBA, TopologyKind::PowerLawConfig}) {
        auto d = degrees(gen_topology(make(kind, 500, 2000, 5)));
        std::sort(d.begin(), d.end());
        EXPECT_GE(d.back(), 4 * d[d.size() / 2]) << topology_name(kind);
    }
}

TEST(GenTopology, CollateralSplitEvenly)
{
    auto g = gen_topology(make(TopologyKind::ErdosRenyi, 50, 120));
    EXPECT_EQ(g.total_capacity(), Tokens(100000));
    for (std::size_t k = 0; k < g.edge_count(); ++k) EXPECT_EQ(g.capacity(k), Tokens(100000) / 120);
}

TEST(GenTopology, DeterministicPerSeed)
{
    for (auto kind : {TopologyKind::ErdosRenyi, TopologyKind::ScaleFreeBA, TopologyKind::PowerLawConfig,
                      TopologyKind::SmallWorld}) {
        auto a = serialized(gen_topology(make(kind, 80, 240, 9)));
        auto b = serialized(gen_topology(make(kind, 80, 240, 9)));
        auto c = serialized(gen_topology(make(kind, 80, 240, 10)));
        EXPECT_EQ(a, b) << topology_name(kind);
        EXPECT_NE(a, c) << topology_name(kind);
    }
}

TEST(GenTopology, RejectsUnattainable)
{
    auto odd = make(TopologyKind::RandomRegular, 9, 0);
    odd.degree = 3;
    EXPECT_THROW(gen_topology(odd), InvalidInput);
    EXPECT_THROW(gen_topology(make(TopologyKind::ErdosRenyi, 10, 50)), InvalidInput);
    EXPECT_THROW(gen_topology(make(TopologyKind::ErdosRenyi, 10, 5)), InvalidInput);
    auto sw = make(TopologyKind::SmallWorld, 10, 10);
    sw.degree = 3;
    EXPECT_THROW(gen_topology(sw), InvalidInput);
    EXPECT_THROW(parse_topology_kind("mesh"), InvalidInput);
    EXPECT_EQ(parse_topology_kind("ba"), TopologyKind::ScaleFreeBA);
}

TEST(Snowball, WholeGraph)
{
    auto g = gen_topology(make(TopologyKind::ErdosRenyi, 60, 150));
    auto s = snowball_sample(g, 60, 4);
    EXPECT_EQ(s.node_count(), 60u);
    EXPECT_EQ(s.edge_count(), 150u);
}

TEST(Snowball, StarOfFive)
{
    auto star = gen_topology(make(TopologyKind::Star, 30, 29));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = snowball_sample(star, 5, seed);
        EXPECT_EQ(s.node_count(), 5u);
        EXPECT_EQ(s.edge_count(), 4u);
        auto d = degrees(s);
        EXPECT_EQ(*std::max_element(d.begin(), d.end()), 4u);
        EXPECT_TRUE(s.connected());
    }
}

TEST(Snowball, ImportedSnapshotShape)
{
    auto big = gen_topology(make(TopologyKind::ScaleFreeBA, 1500, 6000, 2));
    auto file = std::filesystem::temp_directory_path() / "creditnet_snapshot_test.txt";
    {
        std::ofstream out(file);
        write_graph(out, big);
    }
    TopologySpec spec;
    spec.kind = TopologyKind::Imported;
    spec.import_path = file.string();
    auto g = gen_topology(spec);
    std::filesystem::remove(file);
    EXPECT_EQ(g.node_count(), 1500u);
    auto s = snowball_sample(g, 452, 7);
    EXPECT_EQ(s.node_count(), 452u);
    EXPECT_TRUE(s.connected());
    EXPECT_GT(s.edge_count(), 451u);
}

TEST(Snowball, EdgeCappedSample)
{
    auto g = gen_topology(make(TopologyKind::ErdosRenyi, 200, 800, 6));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto s = snowball_sample_edges(g, 20, seed);
        EXPECT_LE(s.edge_count(), 20u);
        EXPECT_GE(s.edge_count(), 10u);
        EXPECT_TRUE(s.connected());
    }
}

TEST(Snowball, RejectsOversizedTarget)
{
    auto g = gen_topology(make(TopologyKind::Star, 10, 9));
    EXPECT_THROW(snowball_sample(g, 11, 1), InvalidInput);
}
