// Three-node line with four flows: bounds, peeling and the deadlock oracle,
// then the same numbers on a small random graph.

#include <iostream>

#include "creditnet/creditnet.hpp"

using namespace creditnet;

int main()
{
    auto net = CreditNetwork::with_uniform_capacity(3, {{0, 1}, {1, 2}}, 20);
    auto paths = PathSet::from_node_sequences(net, {{0, 1, 2}, {2, 1, 0}, {1, 2}, {1, 0}});

    AnalyzeOptions opt;
    opt.exact = true;
    auto m = analyze_instance(net, paths, opt);
    std::cout << "line: phi_max " << *m.phi_max_exact << " phi_min " << *m.phi_min_exact << " unpeeled edges "
              << m.peel.unpeeled_edges.size() << " of " << m.edges << '\n';

    auto d = max_deadlock_exact(net, paths);
    if (d.solved()) std::cout << "line: largest deadlock covers " << d.assignment.size() << " edges\n";

    TopologySpec spec;
    spec.kind = TopologyKind::ScaleFreeBA;
    spec.node_count = 60;
    spec.edge_budget = 180;
    spec.seed = 7;
    auto g = gen_topology(spec);
    DemandSpec ds;
    ds.pair_count = 400;
    ds.seed = 7;
    auto p = build_paths(g, sample_demand(g, ds));
    auto r = analyze_instance(g, p);
    std::cout << "ba60: phi_max " << r.phi_max << " phi_min " << r.phi_min << " frac_unpeeled " << r.frac_unpeeled << '\n';
    return 0;
}
