// creditnet command line: graph generation, demand, throughput bounds,
// peeling, exact deadlock search, SAT gadgets and topology synthesis.
//
// Exit codes: 0 success, 2 invalid input, 3 limit exceeded, 1 anything else.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "creditnet/creditnet.hpp"

using namespace creditnet;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    unsigned threads = 1;

    std::string path(const std::string& name) const
    {
        fs::create_directories(out_dir);
        return (fs::path(out_dir) / name).string();
    }
};

std::ofstream open_out(const std::string& file)
{
    std::ofstream out(file);
    if (!out) throw InvalidInput("cannot write '" + file + "'");
    return out;
}

DemandMode parse_mode(const std::string& s)
{
    if (s == "uniform") return DemandMode::Uniform;
    if (s == "skewed") return DemandMode::Skewed;
    throw InvalidInput("demand mode must be uniform or skewed, got '" + s + "'");
}

// "300,600,900" or "300:3000:300"
std::vector<std::size_t> parse_sizes(const std::string& s)
{
    std::vector<std::size_t> out;
    try {
        if (s.find(':') != std::string::npos) {
            std::size_t a = s.find(':'), b = s.find(':', a + 1);
            if (b == std::string::npos) throw InvalidInput("range needs start:stop:step");
            std::size_t lo = std::stoul(s.substr(0, a)), hi = std::stoul(s.substr(a + 1, b - a - 1)),
                        step = std::stoul(s.substr(b + 1));
            if (step == 0) throw InvalidInput("range step must be positive");
            for (std::size_t x = lo; x <= hi; x += step) out.push_back(x);
        } else {
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
        }
    } catch (const std::logic_error&) {
        throw InvalidInput("cannot parse list '" + s + "'");
    }
    if (out.empty()) throw InvalidInput("empty list '" + s + "'");
    return out;
}

std::string tokens_text(const Tokens& t)
{
    std::ostringstream out;
    out << t;
    return out.str();
}

struct DemandArgs {
    std::size_t pairs = 0;
    std::string mode = "uniform";
    double heavy_fraction = 0.10;
    double heavy_probability = 0.70;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--pairs", pairs, "Number of unique sender/receiver pairs");
        cmd->add_option("--mode", mode, "uniform or skewed")->capture_default_str();
        cmd->add_option("--heavy-fraction", heavy_fraction, "Share of nodes in the heavy set (skewed)")->capture_default_str();
        cmd->add_option("--heavy-prob", heavy_probability, "Chance an endpoint is heavy (skewed)")->capture_default_str();
    }

    DemandSpec spec(std::uint64_t seed) const { return {pairs, parse_mode(mode), heavy_fraction, heavy_probability, seed}; }
};

struct TargetArgs {
    SynthesisTarget t;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--nodes", t.n, "Node budget n")->capture_default_str();
        cmd->add_option("--channels", t.k, "Channel budget k")->capture_default_str();
        cmd->add_option("--flows", t.m, "Flow count m")->capture_default_str();
        cmd->add_option("--p-max", t.p_max, "Longest path")->capture_default_str();
        cmd->add_option("--d-max", t.d_max, "Degree bound for the distribution stage")->capture_default_str();
        cmd->add_option("--c1", t.c1, "Ripple curve scale")->capture_default_str();
        cmd->add_option("--c2", t.c2, "Ripple curve root")->capture_default_str();
    }
};

DistributionFit fit_distribution(const SynthesisTarget& t, const std::string& search)
{
    if (search.empty()) return optimize_path_length_dist(t);
    auto c = search.find(':');
    if (c == std::string::npos) throw InvalidInput("--search-flows expects lo:hi");
    double lo = 0, hi = 0;
    try {
        lo = std::stod(search.substr(0, c));
        hi = std::stod(search.substr(c + 1));
    } catch (const std::logic_error&) {
        throw InvalidInput("cannot parse --search-flows '" + search + "'");
    }
    return optimize_flow_count(t, lo, hi);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Credit network throughput, deadlock and topology toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a topology");
    TopologySpec topo;
    std::string kind = "er", gen_out;
    std::size_t snowball = 0;
    long collateral = 100000;
    gen->add_option("--kind", kind, "er, regular, ba, powerlaw, smallworld, star or imported")->capture_default_str();
    gen->add_option("--nodes", topo.node_count, "Node count")->capture_default_str();
    gen->add_option("--edges", topo.edge_budget, "Edge budget (er, ba, powerlaw)")->capture_default_str();
    gen->add_option("--degree", topo.degree, "Degree (regular) or lattice degree (smallworld)");
    gen->add_option("--rewiring", topo.rewiring, "Rewiring probability (smallworld)")->capture_default_str();
    gen->add_option("--exponent", topo.exponent, "Degree exponent (powerlaw)")->capture_default_str();
    gen->add_option("--collateral", collateral, "Total collateral spread evenly over channels")->capture_default_str();
    gen->add_option("--import", topo.import_path, "Edge list to import (kind imported)");
    gen->add_option("--snowball", snowball, "Snowball-sample this many nodes afterwards");
    gen->add_option("--out", gen_out, "Output graph file (default OUT_DIR/topology.graph)");

    // demand
    auto* dem = app.add_subcommand("demand", "Sample demand and route shortest paths");
    std::string graph_file, paths_file;
    DemandArgs demand_args;
    dem->add_option("--graph", graph_file, "Graph file")->required();
    demand_args.add(dem);

    // analyze
    auto* ana = app.add_subcommand("analyze", "Max/min throughput and peeling on one instance");
    bool exact = false, pair_opposite = false;
    ana->add_option("--graph", graph_file, "Graph file")->required();
    ana->add_option("--paths", paths_file, "Path file (otherwise sampled with --pairs)");
    demand_args.add(ana);
    ana->add_flag("--exact", exact, "Rational arithmetic for the throughput LPs");
    ana->add_flag("--pair-opposite", pair_opposite, "Process a channel's opposite right after it");

    // sweep
    auto* swp = app.add_subcommand("sweep", "Throughput and peeling across topologies and densities");
    std::string topo_list = "er,regular,ba,smallworld,star", densities = "300:3000:300", sweep_mode = "uniform";
    std::size_t sweep_nodes = 100, sweep_edges = 400, graphs = 3, demands = 2;
    bool no_timing = false;
    swp->add_option("--topologies", topo_list, "Comma separated kinds")->capture_default_str();
    swp->add_option("--nodes", sweep_nodes, "Nodes per graph")->capture_default_str();
    swp->add_option("--edges", sweep_edges, "Edges per graph (star uses n-1)")->capture_default_str();
    swp->add_option("--densities", densities, "Pairs per demand matrix: a,b,c or start:stop:step")->capture_default_str();
    swp->add_option("--graphs", graphs, "Graph instances per topology")->capture_default_str();
    swp->add_option("--demands", demands, "Demand matrices per graph and density")->capture_default_str();
    swp->add_option("--mode", sweep_mode, "uniform or skewed")->capture_default_str();
    swp->add_flag("--no-timing", no_timing, "Write runtime_ms = 0 so reruns are byte-identical");

    // verify
    auto* ver = app.add_subcommand("verify", "Compare peeling against the exact deadlock search");
    std::string corpus;
    std::size_t generate = 0, max_edges = 15;
    double time_budget = 60;
    ver->add_option("--corpus", corpus, "Directory of NAME.graph / NAME.paths pairs");
    ver->add_option("--graph", graph_file, "Single graph file");
    ver->add_option("--paths", paths_file, "Single path file");
    ver->add_option("--generate", generate, "First write this many random instances into the corpus");
    ver->add_option("--max-edges", max_edges, "Edge cap for generated instances")->capture_default_str();
    ver->add_option("--time-budget", time_budget, "Seconds per exact search")->capture_default_str();

    // reduce
    auto* red = app.add_subcommand("reduce", "Build the deadlock gadget of a CNF formula");
    std::string cnf_file;
    bool check = false;
    red->add_option("--cnf", cnf_file, "DIMACS file")->required();
    red->add_flag("--check", check, "Also run brute-force SAT and the full-deadlock search");

    // predict
    auto* pre = app.add_subcommand("predict", "Predicted ripple trajectory for a path-length distribution");
    std::string dist_file, model = "overlap";
    double flows = 0;
    std::size_t channels = 0, trials = 0;
    pre->add_option("--dist", dist_file, "CSV d,probability")->required();
    pre->add_option("--flows", flows, "Flow count m")->required();
    pre->add_option("--channels", channels, "Directed channel count k")->required();
    pre->add_option("--model", model, "overlap or naive")->capture_default_str();
    pre->add_option("--simulate", trials, "Also run this many i.i.d. peeling trials");

    // optimize-dist
    auto* opt = app.add_subcommand("optimize-dist", "Fit a path-length distribution to the target ripple curve");
    TargetArgs target_args;
    std::string search;
    target_args.add(opt);
    opt->add_option("--search-flows", search, "Golden-section search for m over lo:hi");

    // synthesize
    auto* syn = app.add_subcommand("synthesize", "Search a joint degree distribution and build a topology");
    TargetArgs syn_args;
    JddSearchOptions jopt;
    syn_args.add(syn);
    syn->add_option("--dist", dist_file, "Target distribution (otherwise fitted first)");
    syn->add_option("--jdd-d-max", syn_args.t.jdd_d_max, "Degree bound for the joint degree search")->capture_default_str();
    syn->add_option("--evaluations", jopt.evaluations, "Search budget")->capture_default_str();
    syn->add_option("--samples", jopt.samples, "Graphs per evaluation")->capture_default_str();
    syn->add_option("--estimate-pairs", jopt.demand_pairs, "Pairs per estimate (0 = all)")->capture_default_str();

    // export-ilp
    auto* ilp = app.add_subcommand("export-ilp", "Write the maximum-deadlock program in LP format");
    std::string ilp_out;
    ilp->add_option("--graph", graph_file, "Graph file")->required();
    ilp->add_option("--paths", paths_file, "Path file")->required();
    ilp->add_option("--out", ilp_out, "Output file (default OUT_DIR/deadlock.lp)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            topo.kind = parse_topology_kind(kind);
            topo.seed = g.seed;
            topo.total_collateral = collateral;
            auto net = gen_topology(topo);
            if (snowball) net = snowball_sample(net, snowball, g.seed);
            auto file = gen_out.empty() ? g.path("topology.graph") : gen_out;
            auto out = open_out(file);
            write_graph(out, net);
            std::cout << "nodes " << net.node_count() << " edges " << net.edge_count() << " -> " << file << '\n';
        } else if (*dem) {
            auto net = load_graph(graph_file);
            auto d = sample_demand(net, demand_args.spec(g.seed));
            auto paths = build_paths(net, d, g.seed);
            auto dout = open_out(g.path("demand.txt"));
            write_demand(dout, d);
            auto pout = open_out(g.path("demand.paths"));
            write_paths(pout, net, paths);
            std::cout << "pairs " << d.size() << " -> " << g.path("demand.txt") << ", " << g.path("demand.paths") << '\n';
        } else if (*ana) {
            auto net = load_graph(graph_file);
            PathSet paths;
            if (!paths_file.empty()) paths = load_paths(paths_file, net);
            else if (demand_args.pairs > 0) paths = build_paths(net, sample_demand(net, demand_args.spec(g.seed)), g.seed);
            else throw InvalidInput("analyze needs --paths or --pairs");
            AnalyzeOptions ao;
            ao.exact = exact;
            ao.peel.seed = g.seed;
            ao.peel.pair_opposite = pair_opposite;
            auto m = analyze_instance(net, paths, ao);
            auto trace_file = g.path("ripple_trace.csv");
            auto tout = open_out(trace_file);
            write_ripple_trace_csv(tout, m.peel);
            nlohmann::ordered_json j;
            j["nodes"] = m.nodes;
            j["edges"] = m.edges;
            j["paths"] = m.paths;
            j["phi_max"] = m.phi_max;
            j["phi_min"] = m.phi_min;
            if (m.phi_max_exact) {
                j["phi_max_exact"] = tokens_text(*m.phi_max_exact);
                j["phi_min_exact"] = tokens_text(*m.phi_min_exact);
            }
            j["peeling"] = peel_outcome_name(m.peel.outcome);
            j["unpeeled_edges"] = m.peel.unpeeled_edges;
            j["frac_unpeeled"] = m.frac_unpeeled;
            j["ripple_trace"] = trace_file;
            std::cout << j.dump(2) << '\n';
        } else if (*swp) {
            SweepConfig cfg;
            std::stringstream ss(topo_list);
            std::string item;
            while (std::getline(ss, item, ',')) {
                TopologySpec t;
                t.kind = parse_topology_kind(item);
                t.node_count = sweep_nodes;
                t.edge_budget = t.kind == TopologyKind::Star ? sweep_nodes - 1 : sweep_edges;
                cfg.topologies.push_back(t);
            }
            cfg.densities = parse_sizes(densities);
            cfg.graph_instances = graphs;
            cfg.demand_matrices = demands;
            cfg.mode = parse_mode(sweep_mode);
            cfg.seed = g.seed;
            cfg.threads = g.threads;
            cfg.timing = !no_timing;
            auto rows = run_sweep(cfg);
            auto summary = summarize_sweep(rows);
            auto out = open_out(g.path("sweep.csv"));
            write_sweep_csv(out, rows);
            auto sout = open_out(g.path("sweep_summary.csv"));
            write_summary_csv(sout, summary);
            auto gp = open_out(g.path("sweep.gp"));
            write_gnuplot_script(gp, summary, "sweep_summary.csv");
            std::cout << rows.size() << " rows -> " << g.path("sweep.csv") << ", " << g.path("sweep_summary.csv") << ", "
                      << g.path("sweep.gp") << '\n';
        } else if (*ver) {
            DeadlockLimits limits;
            limits.time_budget_seconds = time_budget;
            std::vector<VerifyRow> rows;
            if (!corpus.empty()) {
                if (generate) write_random_corpus(corpus, generate, max_edges, g.seed);
                rows = verify_corpus(corpus, limits, g.seed, g.threads);
            } else if (!graph_file.empty() && !paths_file.empty()) {
                auto net = load_graph(graph_file);
                rows.push_back(verify_instance(fs::path(graph_file).stem().string(), net, load_paths(paths_file, net), limits, g.seed));
            } else {
                throw InvalidInput("verify needs --corpus or --graph with --paths");
            }
            write_verify_csv(std::cout, rows);
            auto out = open_out(g.path("verify.csv"));
            write_verify_csv(out, rows);
            auto s = summarize_verify(rows);
            std::cerr << "solved " << s.solved << " of " << s.instances << ", equal " << s.equal << " (rate "
                      << s.equality_rate() << "), unpeeled below exact " << s.violations << '\n';
        } else if (*red) {
            auto f = load_dimacs(cnf_file);
            auto gadget = cnf_to_creditnet(f);
            auto gout = open_out(g.path("gadget.graph"));
            write_graph(gout, gadget.net);
            auto pout = open_out(g.path("gadget.paths"));
            write_paths(pout, gadget.net, gadget.paths);
            std::cout << "nodes " << gadget.net.node_count() << " edges " << gadget.net.edge_count() << " flows "
                      << gadget.paths.size() << '\n';
            if (check) {
                bool sat = sat_bruteforce(f);
                auto d = find_full_deadlock(gadget.net, gadget.paths);
                std::cout << "satisfiable " << (sat ? "yes" : "no") << " full_deadlock " << (d ? "yes" : "no") << '\n';
                if (sat != d.has_value()) throw InternalError("gadget disagrees with brute force");
            }
        } else if (*pre) {
            auto dist = load_distribution_csv(dist_file);
            AdditionModel am = model == "naive" ? AdditionModel::Naive : AdditionModel::Overlap;
            if (model != "naive" && model != "overlap") throw InvalidInput("model must be overlap or naive");
            auto p = predict_ripple(dist, flows, channels, am);
            std::optional<IidPeelingStats> sim;
            if (trials) sim = simulate_iid_peeling(dist, static_cast<std::size_t>(flows), channels, g.seed, trials, g.threads);
            auto out = open_out(g.path("prediction.csv"));
            write_prediction_csv(out, p, sim ? &*sim : nullptr);
            std::cout << "R(k) " << p.at(channels);
            if (p.stalled_at) std::cout << " stalls at L=" << *p.stalled_at;
            std::cout << " -> " << g.path("prediction.csv") << '\n';
        } else if (*opt) {
            auto fit = fit_distribution(target_args.t, search);
            auto out = open_out(g.path("path_length_dist.csv"));
            write_distribution_csv(out, fit.dist);
            std::cout << "m " << fit.m << " residual " << fit.residual << " iterations " << fit.iterations
                      << (fit.converged ? " converged" : " not converged") << " max_violation " << fit.max_violation
                      << " -> " << g.path("path_length_dist.csv") << '\n';
        } else if (*syn) {
            auto& t = syn_args.t;
            t.validate();
            auto target = dist_file.empty() ? optimize_path_length_dist(t).dist : load_distribution_csv(dist_file);
            jopt.threads = g.threads;
            auto fit = optimize_jdd(target, t, g.seed, jopt);
            auto jout = open_out(g.path("jdd.csv"));
            write_jdd_csv(jout, fit.jdd);
            auto net = synthesize_graph(fit.jdd, t.n, t.k, derive_seed(g.seed, 7));
            auto gout = open_out(g.path("synthesized.graph"));
            write_graph(gout, net);
            std::mt19937_64 rng(derive_seed(g.seed, 8));
            auto achieved = PathLengthDistribution::from_weights(shortest_length_histogram(net, 0, rng));
            auto cout_ = open_out(g.path("synthesized_lengths.csv"));
            cout_ << "d,target,synthesized\n";
            for (std::size_t d = 1; d <= std::max(target.max_degree(), achieved.max_degree()); ++d)
                cout_ << d << ',' << target(d) << ',' << achieved(d) << '\n';
            if (fit.status == SearchStatus::BudgetExhausted)
                std::cerr << "warning: search budget exhausted, returning the best joint degree distribution found\n";
            std::cout << "nodes " << net.node_count() << " edges " << net.edge_count() << " search_l2 " << fit.distance
                      << " l1_to_target " << distribution_distance_l1(achieved, target) << " -> " << g.path("synthesized.graph")
                      << '\n';
        } else if (*ilp) {
            auto net = load_graph(graph_file);
            auto paths = load_paths(paths_file, net);
            auto file = ilp_out.empty() ? g.path("deadlock.lp") : ilp_out;
            auto out = open_out(file);
            export_ilp(out, net, paths);
            std::cout << file << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::InvalidInput: return 2;
        case ErrorKind::LimitExceeded: return 3;
        default: return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
