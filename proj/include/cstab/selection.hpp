#pragma once

#include <optional>
#include <vector>

#include "cstab/graph.hpp"
#include "cstab/scoring.hpp"

namespace cstab {

struct SelectionConfig {
    int n_init = 30;
    int n_max = 2000;
    bool use_absolute = true;

    void validate() const {
        if (n_init < 1 || n_init > n_max) throw Error("selection: need 1 <= n_init <= n_max");
    }
    uint64_t hash() const {
        Fnv1a h;
        h.update("selection-config-v1");
        h.update_i64(n_init);
        h.update_i64(n_max);
        h.update_u64(use_absolute ? 1 : 0);
        return h.digest();
    }
};

// NoFaithfulCircuit is the circuit == nullopt outcome, not an error.
struct SelectionOutcome {
    std::optional<Circuit> circuit;
    int selected_n = 0;  // schedule value that succeeded, or n_max on failure

    bool found() const { return circuit.has_value(); }
};

// Candidate sizes tried in order: n_init, +10 up to 100, then x1.25
// (rounded half away from zero), capped at n_max.
std::vector<int> selection_schedule(const SelectionConfig& cfg);

// Iterative greedy top-n: rank edges by |aggregated score| (signed score if
// use_absolute is off), ties broken by lower edge id, and grow n along the
// schedule until the selected edges contain an input-to-output path.
SelectionOutcome select_circuit(const EdgeScoreTable& scores, const ComputeDag& dag,
                                const SelectionConfig& cfg);

}  // namespace cstab
