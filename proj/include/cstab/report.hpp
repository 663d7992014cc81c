#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cstab/harness.hpp"

namespace cstab {

// JSON (de)serializers for the config pieces shared by run records,
// suite.json and the CLI config file.
nlohmann::ordered_json intervention_to_json(const InterventionSpec& s);
InterventionSpec intervention_from_json(const nlohmann::json& j);
nlohmann::ordered_json scoring_to_json(const ScoringConfig& s);
ScoringConfig scoring_from_json(const nlohmann::json& j);
nlohmann::ordered_json selection_to_json(const SelectionConfig& s);
SelectionConfig selection_from_json(const nlohmann::json& j);
nlohmann::ordered_json dataset_spec_to_json(const DatasetSpec& d);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json suite_to_json(const SuiteConfig& s);
SuiteConfig suite_from_json(const nlohmann::json& j);

// Resolved invocation stored as suite.json inside a report directory; a
// directory plus the checkpoint it embeds is fully replayable.
struct SuiteFileConfig {
    TaskId task = TaskId::ToyIoi;
    std::string checkpoint = "model.ckpt";  // relative to the report directory
    uint64_t model_hash = 0;
    DatasetSpec base_dataset;
    ScoringConfig scoring;
    SelectionConfig selection;
    SuiteConfig suite;
};

std::string suite_config_to_json(const SuiteFileConfig& cfg);
SuiteFileConfig suite_config_from_json(const std::string& text);

std::string run_record_to_json(const RunRecord& rec);
RunRecord run_record_from_json(const std::string& text);

std::string circuit_to_json(const Circuit& circuit, const ComputeDag& dag);
Circuit circuit_from_json(const std::string& text, const ComputeDag& dag);

std::string evals_csv(const StabilityReport& rep);
std::string jaccard_csv(const StabilityReport& rep);
std::string summary_csv(const StabilityReport& rep);
std::string mds_csv(const StabilityReport& rep);
std::string grid_table_csv(const StabilityReport& rep);

struct Manifest {
    std::vector<std::pair<std::string, uint64_t>> files;  // relpath -> content hash
    uint64_t combined = 0;
};

std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Writes the full report directory (records/, CSVs, circuit files, copied
// checkpoint, suite.json, manifest.json) and returns the manifest. The
// combined hash covers every emitted file except manifest.json itself.
Manifest write_report_dir(const std::string& dir, const ComputeDag& dag,
                          const SuiteFileConfig& cfg, const StabilityReport& rep,
                          const std::string& checkpoint_src, bool grid_table);

// Rebuilds a StabilityReport from a report directory's records.
StabilityReport load_report_records(const std::string& dir, const ComputeDag& dag,
                                    const SuiteFileConfig& cfg);

}  // namespace cstab
