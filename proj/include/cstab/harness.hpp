#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cstab/eval.hpp"
#include "cstab/selection.hpp"
#include "cstab/stats.hpp"
#include "cstab/train.hpp"

namespace cstab {

enum class SuiteKind { Bootstrap, MetaDataset, Paraphrase, HyperGrid, NoiseSweep, BaseMethodComparison };

std::string to_string(SuiteKind k);
SuiteKind suite_from_string(const std::string& s);

// One perturbation axis per suite. runs is the record count for bootstrap /
// meta-dataset and the seeds-per-amplitude count for noise sweeps; the other
// kinds derive their record count from the varied axis itself.
struct SuiteConfig {
    SuiteKind kind = SuiteKind::Bootstrap;
    int runs = 20;
    uint64_t seed = 0;
    std::vector<int> templates;       // paraphrase; empty = all task templates
    std::vector<double> amplitudes;   // noise sweep; empty = default ladder

    void validate() const;
    uint64_t hash() const;
};

// Default noise amplitude ladder for sweeps.
const std::vector<double>& default_noise_amplitudes();

// How one run's dataset is derived, fully seed-determined.
struct DatasetSpec {
    int size = 64;
    uint64_t base_seed = 0;
    int template_id = 0;
    Provenance provenance = Provenance::Base;
    uint64_t derive_seed = 0;        // bootstrap resample / meta generator seed
    int paraphrase_template = -1;

    uint64_t hash() const;
};

TaskDataset make_dataset(const TaskGenerator& gen, const DatasetSpec& spec);

struct RunSpec {
    int index = 0;
    std::string label;
    TaskId task = TaskId::ToyIoi;
    DatasetSpec dataset;
    ScoringConfig scoring;
    SelectionConfig selection;

    uint64_t hash(uint64_t model_hash) const;
};

struct RunRecord {
    RunSpec spec;
    uint64_t model_hash = 0;
    bool found = false;
    int selected_n = 0;
    std::vector<int> circuit_edges;  // empty when not found
    EvalReport eval;
    uint64_t record_hash = 0;  // over the defining inputs
    uint64_t result_hash = 0;  // over the outputs

    Circuit to_circuit(const ComputeDag& dag) const;
};

std::vector<RunSpec> expand_suite(TaskId task, const DatasetSpec& base_dataset,
                                  const ScoringConfig& base_scoring,
                                  const SelectionConfig& base_selection, const SuiteConfig& suite);

// Score, select, evaluate one run. Pure given inputs.
RunRecord execute_run(const ToyTransformer& model, const ComputeDag& dag,
                      const TaskGenerator& gen, const RunSpec& spec);

// Re-executes a stored record after checking its input hash; throws if the
// stored record_hash does not match its fields (tampered/edited record).
RunRecord replay_run(const ToyTransformer& model, const ComputeDag& dag, const TaskGenerator& gen,
                     const RunRecord& record);

// All runs of a suite, optionally on a bounded worker pool. Records come
// back sorted by index regardless of completion order.
std::vector<RunRecord> run_suite(const ToyTransformer& model, const ComputeDag& dag,
                                 const TaskGenerator& gen, const std::vector<RunSpec>& specs,
                                 int jobs = 1);

// Pairwise structure and performance statistics over a suite's records.
// NoFaithfulCircuit records count as failures and are excluded from the
// structural aggregates.
struct StabilityReport {
    std::vector<RunRecord> records;
    int failures = 0;
    bool empty_structure = false;  // no successful circuit in the suite
    std::vector<int> success_indices;
    JaccardMatrix jaccard;
    std::optional<SummaryStats> jaccard_stats;
    std::optional<SummaryStats> circuit_error_stats;
    std::optional<SummaryStats> kl_stats;
    std::optional<SummaryStats> size_stats;
    std::optional<Circuit> median;
    std::optional<Circuit> circuit_union;
    std::vector<double> jaccard_to_median;  // per success, aligned with success_indices
    std::optional<MdsEmbedding> mds;        // over 1 - Jaccard, dim 2
    uint64_t report_hash = 0;

    static StabilityReport build(const ComputeDag& dag, std::vector<RunRecord> records);
};

}  // namespace cstab
