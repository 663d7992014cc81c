#include "cstab/selection.hpp"

#include <algorithm>
#include <cmath>

namespace cstab {

std::vector<int> selection_schedule(const SelectionConfig& cfg) {
    std::vector<int> out;
    int n = cfg.n_init;
    while (true) {
        out.push_back(n);
        if (n >= cfg.n_max) break;
        int next = n < 100 ? n + 10 : static_cast<int>(std::lround(1.25 * n));
        next = std::min(next, cfg.n_max);
        if (next <= n) break;
        n = next;
    }
    return out;
}

SelectionOutcome select_circuit(const EdgeScoreTable& scores, const ComputeDag& dag,
                                const SelectionConfig& cfg) {
    cfg.validate();
    if (scores.n_edges != dag.edge_count()) {
        throw Error("select_circuit: score table covers " + std::to_string(scores.n_edges) +
                    " edges, dag has " + std::to_string(dag.edge_count()));
    }
    if (scores.aggregated.empty()) throw Error("select_circuit: table has no aggregate");

    std::vector<int> order(static_cast<std::size_t>(scores.n_edges));
    for (int e = 0; e < scores.n_edges; ++e) order[static_cast<std::size_t>(e)] = e;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = cfg.use_absolute ? std::abs(scores.aggregated[static_cast<std::size_t>(a)])
                                           : scores.aggregated[static_cast<std::size_t>(a)];
        const double sb = cfg.use_absolute ? std::abs(scores.aggregated[static_cast<std::size_t>(b)])
                                           : scores.aggregated[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });

    SelectionOutcome out;
    for (int n : selection_schedule(cfg)) {
        const int take = std::min<int>(n, scores.n_edges);
        std::vector<int> chosen(order.begin(), order.begin() + take);
        if (has_io_path(dag, chosen)) {
            Circuit c;
            std::sort(chosen.begin(), chosen.end());
            c.edge_ids = std::move(chosen);
            c.dag_hash = dag.structure_hash();
            c.config_hash = scores.config_hash;
            out.circuit = std::move(c);
            out.selected_n = n;
            return out;
        }
        out.selected_n = n;
    }
    return out;  // NoFaithfulCircuit
}

}  // namespace cstab
