#pragma once

#include <string>
#include <vector>

#include "cstab/backward.hpp"
#include "cstab/interventions.hpp"

namespace cstab {

enum class ScoreMethod { Eap, EapIgInputs, EapIgActivations, CleanCorrupted };
enum class Aggregation { Sum, Mean, Median };

std::string to_string(ScoreMethod m);
std::string to_string(Aggregation a);
ScoreMethod method_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);

struct ScoringConfig {
    ScoreMethod method = ScoreMethod::EapIgInputs;
    int ig_steps = 16;  // ignored by eap and clean-corrupted
    Aggregation aggregation = Aggregation::Sum;
    InterventionSpec intervention;

    void validate() const;
    uint64_t hash() const;
};

// Per-edge raw scores, one row per dataset pair, plus the aggregate.
struct EdgeScoreTable {
    int n_edges = 0;
    int n_samples = 0;
    std::vector<double> raw;  // [sample * n_edges + edge]
    std::vector<double> aggregated;
    Aggregation rule = Aggregation::Sum;
    uint64_t config_hash = 0;

    double at(int sample, int edge) const {
        return raw[static_cast<std::size_t>(sample) * n_edges + edge];
    }
    double& at(int sample, int edge) {
        return raw[static_cast<std::size_t>(sample) * n_edges + edge];
    }
};

// Edge scores for every pair of the dataset under one scoring config; the
// table's aggregate uses cfg.aggregation.
//
// All four methods share the same shape: per pair, score(u->v) is the sum
// over positions and dims of (baseline output of u - clean output of u)
// times a gradient term at v's input. They differ only in the gradient term:
//   eap                 clean-pass gradient
//   eap-ig-inputs       mean gradient over m passes whose embedding output
//                       walks the line clean -> baseline embedding (left
//                       endpoints k/m, k = 0..m-1)
//   eap-ig-activations  mean gradient over m passes whose node inputs get
//                       the constant offset (k/m) * (baseline - clean input)
//   clean-corrupted     mean of the two endpoint gradients (alpha 0 and 1)
EdgeScoreTable score_edges(const ToyTransformer& model, const ComputeDag& dag,
                           const TaskDataset& data, const ScoringConfig& cfg);

// Spec-level entry points (fixed method, same machinery).
EdgeScoreTable score_eap(const ToyTransformer& model, const ComputeDag& dag,
                         const TaskDataset& data, const InterventionSpec& intervention);
EdgeScoreTable score_eap_ig_inputs(const ToyTransformer& model, const ComputeDag& dag,
                                   const TaskDataset& data, const InterventionSpec& intervention,
                                   int ig_steps);
EdgeScoreTable score_eap_ig_activations(const ToyTransformer& model, const ComputeDag& dag,
                                        const TaskDataset& data,
                                        const InterventionSpec& intervention, int ig_steps);
EdgeScoreTable score_clean_corrupted(const ToyTransformer& model, const ComputeDag& dag,
                                     const TaskDataset& data, const InterventionSpec& intervention);

// Re-aggregate raw scores. Sum/mean use pairwise summation; median is the
// lower median for even counts.
EdgeScoreTable aggregate(const EdgeScoreTable& table, Aggregation rule);

std::string scores_to_csv(const EdgeScoreTable& table, const ComputeDag& dag);

}  // namespace cstab
