#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "creditnet/demand.hpp"
#include "creditnet/io.hpp"
#include "creditnet/oracle.hpp"
#include "creditnet/parallel.hpp"
#include "creditnet/peeling.hpp"
#include "creditnet/throughput.hpp"
#include "creditnet/topology.hpp"

namespace creditnet {

struct AnalyzeOptions {
    PeelOptions peel;
    bool exact = false; // rational LP instead of double
};

struct InstanceMetrics {
    std::size_t nodes = 0, edges = 0, paths = 0;
    double phi_max = 0, phi_min = 0;
    std::optional<Tokens> phi_max_exact, phi_min_exact;
    double frac_unpeeled = 0; // edges with an unprocessed direction / all edges
    PeelResult peel;
};

inline InstanceMetrics analyze_instance(const CreditNetwork& net, const PathSet& paths, const AnalyzeOptions& opt = {})
{
    paths.validate(net);
    InstanceMetrics m;
    m.nodes = net.node_count();
    m.edges = net.edge_count();
    m.paths = paths.size();
    m.peel = peel(net, paths, opt.peel);
    auto r = build_routing_system(net, paths);
    if (opt.exact) {
        m.phi_max_exact = max_throughput_exact(net, r);
        m.phi_min_exact = min_throughput_exact(net, r, m.peel.unpeeled_edges);
        m.phi_max = to_double(*m.phi_max_exact);
        m.phi_min = to_double(*m.phi_min_exact);
    } else {
        m.phi_max = max_throughput(net, r);
        m.phi_min = min_throughput(net, r, m.peel.unpeeled_edges);
    }
    m.frac_unpeeled = m.edges ? static_cast<double>(m.peel.unpeeled_edges.size()) / static_cast<double>(m.edges) : 0.0;
    return m;
}

struct SweepConfig {
    std::vector<TopologySpec> topologies;
    std::vector<std::size_t> densities; // demand pairs per matrix
    std::size_t graph_instances = 3;
    std::size_t demand_matrices = 2;
    DemandMode mode = DemandMode::Uniform;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool timing = true; // false writes runtime_ms = 0 so reruns are byte-identical

    void validate() const
    {
        if (topologies.empty()) throw InvalidInput("sweep needs at least one topology");
        if (densities.empty()) throw InvalidInput("sweep needs at least one demand density");
        if (graph_instances == 0 || demand_matrices == 0) throw InvalidInput("sweep needs at least one trial per cell");
        for (const auto& t : topologies) {
            t.validate();
            if (t.kind == TopologyKind::Imported) continue;
            for (auto d : densities)
                if (d > t.node_count * (t.node_count - 1))
                    throw InvalidInput("density " + std::to_string(d) + " exceeds n(n-1) for " + topology_name(t.kind));
        }
    }
};

// Desk-scale defaults: 100 nodes, about 400 edges, 300..3000 pairs.
inline SweepConfig default_sweep_config()
{
    SweepConfig c;
    for (auto kind : {TopologyKind::ErdosRenyi, TopologyKind::RandomRegular, TopologyKind::ScaleFreeBA,
                      TopologyKind::SmallWorld, TopologyKind::Star}) {
        TopologySpec t;
        t.kind = kind;
        t.node_count = 100;
        t.edge_budget = kind == TopologyKind::Star ? 99 : 400;
        c.topologies.push_back(t);
    }
    for (std::size_t d = 300; d <= 3000; d += 300) c.densities.push_back(d);
    return c;
}

struct SweepRow {
    std::string topology;
    std::uint64_t seed = 0;        // graph seed
    std::uint64_t demand_seed = 0;
    std::size_t pairs = 0;
    double phi_max = 0, phi_min = 0, frac_unpeeled = 0, runtime_ms = 0;
};

// One row per (topology, graph instance, density, demand matrix), ordered by
// that key whatever order the workers finish in.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg)
{
    cfg.validate();
    struct Cell {
        std::size_t topo, graph, density, demand;
    };
    std::vector<Cell> cells;
    for (std::size_t t = 0; t < cfg.topologies.size(); ++t)
        for (std::size_t g = 0; g < cfg.graph_instances; ++g)
            for (std::size_t d = 0; d < cfg.densities.size(); ++d)
                for (std::size_t m = 0; m < cfg.demand_matrices; ++m) cells.push_back({t, g, d, m});

    // graphs are shared by every cell on them; build them up front
    std::vector<std::vector<CreditNetwork>> graphs(cfg.topologies.size());
    std::vector<std::vector<std::uint64_t>> graph_seeds(cfg.topologies.size());
    for (std::size_t t = 0; t < cfg.topologies.size(); ++t)
        for (std::size_t g = 0; g < cfg.graph_instances; ++g) {
            auto spec = cfg.topologies[t];
            spec.seed = derive_seed(cfg.seed, t * 1000003 + g);
            graph_seeds[t].push_back(spec.seed);
            graphs[t].push_back(gen_topology(spec));
        }
    for (std::size_t t = 0; t < graphs.size(); ++t)
        for (auto d : cfg.densities) {
            std::size_t n = graphs[t].front().node_count();
            if (d > n * (n - 1)) throw InvalidInput("density " + std::to_string(d) + " exceeds n(n-1) for an imported graph");
        }

    std::vector<SweepRow> rows(cells.size());
    parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
        const auto& c = cells[i];
        const auto& net = graphs[c.topo][c.graph];
        SweepRow row;
        row.topology = topology_name(cfg.topologies[c.topo].kind);
        row.seed = graph_seeds[c.topo][c.graph];
        row.pairs = cfg.densities[c.density];
        row.demand_seed = derive_seed(row.seed, row.pairs * 4096 + c.demand);
        auto start = std::chrono::steady_clock::now();
        DemandSpec ds;
        ds.pair_count = row.pairs;
        ds.mode = cfg.mode;
        ds.seed = row.demand_seed;
        auto paths = build_paths(net, sample_demand(net, ds));
        AnalyzeOptions ao;
        ao.peel.seed = row.demand_seed;
        auto m = analyze_instance(net, paths, ao);
        row.phi_max = m.phi_max;
        row.phi_min = m.phi_min;
        row.frac_unpeeled = m.frac_unpeeled;
        if (cfg.timing)
            row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        rows[i] = std::move(row);
    });
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << "topology,seed,pairs,phi_max,phi_min,frac_unpeeled,runtime_ms,demand_seed\n";
    auto old = out.precision(12);
    for (const auto& r : rows)
        out << r.topology << ',' << r.seed << ',' << r.pairs << ',' << r.phi_max << ',' << r.phi_min << ','
            << r.frac_unpeeled << ',' << r.runtime_ms << ',' << r.demand_seed << '\n';
    out.precision(old);
}

struct Whisker {
    double min = 0, median = 0, max = 0;
};

struct SweepSummaryRow {
    std::string topology;
    std::size_t pairs = 0;
    std::size_t samples = 0;
    Whisker phi_max, phi_min, frac_unpeeled;
};

namespace detail {

inline Whisker whisker(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    Whisker w;
    if (v.empty()) return w;
    w.min = v.front();
    w.max = v.back();
    std::size_t h = v.size() / 2;
    w.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    return w;
}

} // namespace detail

// Per (topology, pairs) cell: min, median and max of each metric.
inline std::vector<SweepSummaryRow> summarize_sweep(const std::vector<SweepRow>& rows)
{
    std::vector<std::pair<std::string, std::size_t>> order;
    std::map<std::pair<std::string, std::size_t>, std::vector<const SweepRow*>> groups;
    for (const auto& r : rows) {
        auto key = std::make_pair(r.topology, r.pairs);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&r);
    }
    std::vector<SweepSummaryRow> out;
    for (const auto& key : order) {
        const auto& g = groups[key];
        std::vector<double> a, b, c;
        for (const auto* r : g) a.push_back(r->phi_max), b.push_back(r->phi_min), c.push_back(r->frac_unpeeled);
        out.push_back({key.first, key.second, g.size(), detail::whisker(a), detail::whisker(b), detail::whisker(c)});
    }
    return out;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SweepSummaryRow>& rows)
{
    out << "topology,pairs,samples,phi_max_min,phi_max_median,phi_max_max,phi_min_min,phi_min_median,phi_min_max,"
           "frac_unpeeled_min,frac_unpeeled_median,frac_unpeeled_max\n";
    auto old = out.precision(12);
    for (const auto& r : rows) {
        out << r.topology << ',' << r.pairs << ',' << r.samples;
        for (const auto* w : {&r.phi_max, &r.phi_min, &r.frac_unpeeled}) out << ',' << w->min << ',' << w->median << ',' << w->max;
        out << '\n';
    }
    out.precision(old);
}

// gnuplot script: one panel per metric, median with min/max whiskers per topology.
inline void write_gnuplot_script(std::ostream& out, const std::vector<SweepSummaryRow>& rows, const std::string& summary_csv,
                                 const std::string& image = "sweep.png")
{
    std::vector<std::string> topologies;
    for (const auto& r : rows)
        if (std::find(topologies.begin(), topologies.end(), r.topology) == topologies.end()) topologies.push_back(r.topology);
    out << "set datafile separator ','\n"
        << "set terminal pngcairo size 1500,450\n"
        << "set output '" << image << "'\n"
        << "set multiplot layout 1,3\n"
        << "set xlabel 'demand pairs'\n"
        << "set key top left\n";
    const char* titles[] = {"fraction of channels unpeeled", "min throughput", "max throughput"};
    int columns[] = {10, 7, 4}; // (min, median, max) triples start here
    for (int panel = 0; panel < 3; ++panel) {
        out << "set ylabel '" << titles[panel] << "'\n" << "plot ";
        for (std::size_t i = 0; i < topologies.size(); ++i) {
            int c = columns[panel];
            out << (i ? ", \\\n     " : "") << "'" << summary_csv << "' using 2:(strcol(1) eq '" << topologies[i]
                << "' ? $" << c + 1 << " : 1/0):" << c << ':' << c + 2 << " with yerrorlines title '" << topologies[i] << "'";
        }
        out << '\n';
    }
    out << "unset multiplot\n";
}

struct VerifyRow {
    std::string name;
    std::size_t edges = 0, paths = 0;
    std::size_t unpeeled = 0;
    std::optional<std::size_t> exact; // empty when the oracle gave up
    bool equal() const { return exact && *exact == unpeeled; }
};

inline VerifyRow verify_instance(const std::string& name, const CreditNetwork& net, const PathSet& paths,
                                 const DeadlockLimits& limits = {}, std::uint64_t seed = 1)
{
    VerifyRow row;
    row.name = name;
    row.edges = net.edge_count();
    row.paths = paths.size();
    PeelOptions po;
    po.seed = seed;
    row.unpeeled = peel(net, paths, po).unpeeled_edges.size();
    auto d = max_deadlock_exact(net, paths, limits);
    if (d.solved()) row.exact = d.assignment.size();
    return row;
}

// Corpus layout: NAME.graph next to NAME.paths, visited in name order.
inline std::vector<VerifyRow> verify_corpus(const std::string& dir, const DeadlockLimits& limits = {}, std::uint64_t seed = 1,
                                            unsigned threads = 1)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw InvalidInput("corpus directory '" + dir + "' not found");
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".graph") names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    if (names.empty()) throw InvalidInput("corpus directory '" + dir + "' holds no .graph files");
    std::vector<VerifyRow> rows(names.size());
    parallel_for(names.size(), threads, [&](std::size_t i) {
        auto base = (fs::path(dir) / names[i]).string();
        auto net = load_graph(base + ".graph");
        auto paths = load_paths(base + ".paths", net);
        rows[i] = verify_instance(names[i], net, paths, limits, derive_seed(seed, i));
    });
    return rows;
}

inline void write_verify_csv(std::ostream& out, const std::vector<VerifyRow>& rows)
{
    out << "instance,edges,paths,unpeeled_count,exact_deadlock_count,equal\n";
    for (const auto& r : rows)
        out << r.name << ',' << r.edges << ',' << r.paths << ',' << r.unpeeled << ','
            << (r.exact ? std::to_string(*r.exact) : std::string("unsolved")) << ',' << (r.equal() ? "true" : "false")
            << '\n';
}

struct VerifySummary {
    std::size_t instances = 0, solved = 0, equal = 0, violations = 0; // violations: unpeeled < exact
    double equality_rate() const { return solved ? static_cast<double>(equal) / static_cast<double>(solved) : 0.0; }
};

inline VerifySummary summarize_verify(const std::vector<VerifyRow>& rows)
{
    VerifySummary s;
    s.instances = rows.size();
    for (const auto& r : rows) {
        if (!r.exact) continue;
        ++s.solved;
        s.equal += r.equal();
        s.violations += r.unpeeled < *r.exact;
    }
    return s;
}

// Random corpus of small instances: a snowball cut of at most `max_edges`
// edges from a generated graph, carrying shortest-path demand.
inline void write_random_corpus(const std::string& dir, std::size_t count, std::size_t max_edges, std::uint64_t seed)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const TopologyKind kinds[] = {TopologyKind::ErdosRenyi, TopologyKind::RandomRegular, TopologyKind::ScaleFreeBA,
                                  TopologyKind::SmallWorld};
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t s = derive_seed(seed, i);
        TopologySpec spec;
        spec.kind = kinds[i % 4];
        spec.node_count = 40;
        spec.edge_budget = 80;
        spec.degree = spec.kind == TopologyKind::RandomRegular || spec.kind == TopologyKind::SmallWorld ? 4 : 0;
        spec.seed = s;
        auto sample = snowball_sample_edges(gen_topology(spec), max_edges, s);
        std::size_t n = sample.node_count();
        DemandSpec ds;
        ds.pair_count = std::min<std::size_t>(n * (n - 1), 20 + s % 60);
        ds.seed = s;
        auto paths = build_paths(sample, sample_demand(sample, ds));
        std::ostringstream name;
        name << "random_" << std::setw(4) << std::setfill('0') << i;
        auto base = (fs::path(dir) / name.str()).string();
        std::ofstream g(base + ".graph"), p(base + ".paths");
        write_graph(g, sample);
        write_paths(p, sample, paths);
    }
}

} // namespace creditnet
