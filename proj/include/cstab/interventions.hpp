#pragma once

#include <cstdint>
#include <string>

#include "cstab/forward.hpp"
#include "cstab/tasks.hpp"

namespace cstab {

enum class InterventionKind { Patching, Zero, Mean, MeanPositional, NoisyEmbed };

std::string to_string(InterventionKind k);
InterventionKind intervention_from_string(const std::string& s);

// What "corrupted" means for scoring and what knockout values circuit
// evaluation uses. For noisy-embed the direction is a unit d_model vector
// drawn once from the direction seed; by default only the pair's corruption
// slot positions are shifted.
struct InterventionSpec {
    InterventionKind kind = InterventionKind::Patching;
    double amplitude = 0.0;        // noisy-embed only, >= 0
    uint64_t direction_seed = 0;   // noisy-embed only
    bool noise_all_positions = false;

    void validate() const;
    uint64_t hash() const;
};

// Unit-norm noise direction for a given seed.
Tensor noise_direction(int d_model, uint64_t direction_seed);

// Precomputes whatever the intervention needs once per (model, dataset):
// dataset means for mean/mean-positional, nothing for the others.
class BaselineProvider {
public:
    BaselineProvider(const ToyTransformer& model, const ComputeDag& dag, const TaskDataset& data,
                     const InterventionSpec& spec);

    // Per-node baseline outputs for one pair (ActivationCache.inputs left
    // empty: mean/zero baselines are not a coherent forward pass).
    ActivationCache baseline_for(const PromptPair& pair) const;

    const InterventionSpec& spec() const { return spec_; }

private:
    const ToyTransformer& model_;
    const ComputeDag& dag_;
    InterventionSpec spec_;
    std::vector<Tensor> mean_by_node_;      // [1, width] per node
    std::vector<Tensor> mean_positional_;   // [T, width] per node
    Tensor direction_;                      // [1, d_model]
};

// Spec-level convenience: baselines for one pair of one dataset.
ActivationCache baseline_activations(const InterventionSpec& spec, const ToyTransformer& model,
                                     const ComputeDag& dag, const TaskDataset& data,
                                     const PromptPair& pair);

}  // namespace cstab
