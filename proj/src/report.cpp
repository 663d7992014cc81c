#include "cstab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cstab/checkpoint.hpp"

namespace cstab {

namespace {

using json = nlohmann::ordered_json;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

json intervention_to_json(const InterventionSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["amplitude"] = s.amplitude;
    j["direction_seed"] = s.direction_seed;
    j["noise_all_positions"] = s.noise_all_positions;
    return j;
}

InterventionSpec intervention_from_json(const nlohmann::json& j) {
    InterventionSpec s;
    s.kind = intervention_from_string(j.at("kind").get<std::string>());
    s.amplitude = j.value("amplitude", 0.0);
    s.direction_seed = j.value("direction_seed", uint64_t{0});
    s.noise_all_positions = j.value("noise_all_positions", false);
    s.validate();
    return s;
}

json scoring_to_json(const ScoringConfig& s) {
    json j;
    j["method"] = to_string(s.method);
    j["ig_steps"] = s.ig_steps;
    j["aggregation"] = to_string(s.aggregation);
    j["intervention"] = intervention_to_json(s.intervention);
    return j;
}

ScoringConfig scoring_from_json(const nlohmann::json& j) {
    ScoringConfig s;
    s.method = method_from_string(j.at("method").get<std::string>());
    s.ig_steps = j.value("ig_steps", 16);
    s.aggregation = aggregation_from_string(j.value("aggregation", std::string("sum")));
    if (j.contains("intervention")) s.intervention = intervention_from_json(j.at("intervention"));
    s.validate();
    return s;
}

json selection_to_json(const SelectionConfig& s) {
    json j;
    j["n_init"] = s.n_init;
    j["n_max"] = s.n_max;
    j["use_absolute"] = s.use_absolute;
    return j;
}

SelectionConfig selection_from_json(const nlohmann::json& j) {
    SelectionConfig s;
    s.n_init = j.value("n_init", 30);
    s.n_max = j.value("n_max", 2000);
    s.use_absolute = j.value("use_absolute", true);
    s.validate();
    return s;
}

json dataset_spec_to_json(const DatasetSpec& d) {
    json j;
    j["size"] = d.size;
    j["base_seed"] = d.base_seed;
    j["template"] = d.template_id;
    j["provenance"] = to_string(d.provenance);
    j["derive_seed"] = d.derive_seed;
    j["paraphrase_template"] = d.paraphrase_template;
    return j;
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
    DatasetSpec d;
    d.size = j.at("size").get<int>();
    d.base_seed = j.at("base_seed").get<uint64_t>();
    d.template_id = j.value("template", 0);
    d.provenance = provenance_from_string(j.value("provenance", std::string("base")));
    d.derive_seed = j.value("derive_seed", uint64_t{0});
    d.paraphrase_template = j.value("paraphrase_template", -1);
    return d;
}

json suite_to_json(const SuiteConfig& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["runs"] = s.runs;
    j["seed"] = s.seed;
    j["templates"] = s.templates;
    j["amplitudes"] = s.amplitudes;
    return j;
}

SuiteConfig suite_from_json(const nlohmann::json& j) {
    SuiteConfig s;
    s.kind = suite_from_string(j.at("kind").get<std::string>());
    s.runs = j.value("runs", 20);
    s.seed = j.value("seed", uint64_t{0});
    if (j.contains("templates")) s.templates = j.at("templates").get<std::vector<int>>();
    if (j.contains("amplitudes")) s.amplitudes = j.at("amplitudes").get<std::vector<double>>();
    s.validate();
    return s;
}

std::string suite_config_to_json(const SuiteFileConfig& cfg) {
    json j;
    j["format"] = "cstab-suite-v1";
    j["task"] = to_string(cfg.task);
    j["checkpoint"] = cfg.checkpoint;
    j["model_hash"] = hash_hex(cfg.model_hash);
    j["base_dataset"] = dataset_spec_to_json(cfg.base_dataset);
    j["scoring"] = scoring_to_json(cfg.scoring);
    j["selection"] = selection_to_json(cfg.selection);
    j["suite"] = suite_to_json(cfg.suite);
    return j.dump(2) + "\n";
}

SuiteFileConfig suite_config_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cstab-suite-v1") throw Error("suite.json: unknown format");
    SuiteFileConfig cfg;
    cfg.task = task_from_string(j.at("task").get<std::string>());
    cfg.checkpoint = j.at("checkpoint").get<std::string>();
    cfg.model_hash = std::stoull(j.at("model_hash").get<std::string>(), nullptr, 16);
    cfg.base_dataset = dataset_spec_from_json(j.at("base_dataset"));
    cfg.scoring = scoring_from_json(j.at("scoring"));
    cfg.selection = selection_from_json(j.at("selection"));
    cfg.suite = suite_from_json(j.at("suite"));
    return cfg;
}

std::string run_record_to_json(const RunRecord& rec) {
    json j;
    j["format"] = "cstab-record-v1";
    j["index"] = rec.spec.index;
    j["label"] = rec.spec.label;
    j["task"] = to_string(rec.spec.task);
    j["dataset"] = dataset_spec_to_json(rec.spec.dataset);
    j["scoring"] = scoring_to_json(rec.spec.scoring);
    j["selection"] = selection_to_json(rec.spec.selection);
    j["model_hash"] = hash_hex(rec.model_hash);
    j["found"] = rec.found;
    j["selected_n"] = rec.selected_n;
    j["circuit"] = rec.circuit_edges;
    j["eval"] = {{"circuit_error", rec.eval.circuit_error},
                 {"kl_divergence", rec.eval.kl_divergence},
                 {"size", rec.eval.circuit_size},
                 {"dataset_hash", hash_hex(rec.eval.dataset_hash)}};
    j["record_hash"] = hash_hex(rec.record_hash);
    j["result_hash"] = hash_hex(rec.result_hash);
    return j.dump(2) + "\n";
}

RunRecord run_record_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cstab-record-v1") throw Error("record: unknown format");
    RunRecord rec;
    rec.spec.index = j.at("index").get<int>();
    rec.spec.label = j.at("label").get<std::string>();
    rec.spec.task = task_from_string(j.at("task").get<std::string>());
    rec.spec.dataset = dataset_spec_from_json(j.at("dataset"));
    rec.spec.scoring = scoring_from_json(j.at("scoring"));
    rec.spec.selection = selection_from_json(j.at("selection"));
    rec.model_hash = std::stoull(j.at("model_hash").get<std::string>(), nullptr, 16);
    rec.found = j.at("found").get<bool>();
    rec.selected_n = j.at("selected_n").get<int>();
    rec.circuit_edges = j.at("circuit").get<std::vector<int>>();
    rec.eval.circuit_error = j.at("eval").at("circuit_error").get<double>();
    rec.eval.kl_divergence = j.at("eval").at("kl_divergence").get<double>();
    rec.eval.circuit_size = j.at("eval").at("size").get<int>();
    rec.eval.dataset_hash = std::stoull(j.at("eval").at("dataset_hash").get<std::string>(), nullptr, 16);
    rec.record_hash = std::stoull(j.at("record_hash").get<std::string>(), nullptr, 16);
    rec.result_hash = std::stoull(j.at("result_hash").get<std::string>(), nullptr, 16);
    return rec;
}

std::string circuit_to_json(const Circuit& circuit, const ComputeDag& dag) {
    json j;
    j["format"] = "cstab-circuit-v1";
    j["dag_hash"] = hash_hex(circuit.dag_hash);
    j["config_hash"] = hash_hex(circuit.config_hash);
    j["edges"] = circuit.edge_ids;
    std::vector<std::string> names;
    for (int e : circuit.edge_ids) names.push_back(dag.edge_name(e));
    j["edge_names"] = names;
    return j.dump(2) + "\n";
}

Circuit circuit_from_json(const std::string& text, const ComputeDag& dag) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cstab-circuit-v1") throw Error("circuit file: unknown format");
    Circuit c;
    c.dag_hash = std::stoull(j.at("dag_hash").get<std::string>(), nullptr, 16);
    c.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    c.edge_ids = j.at("edges").get<std::vector<int>>();
    std::sort(c.edge_ids.begin(), c.edge_ids.end());
    c.validate_against(dag);
    return c;
}

std::string evals_csv(const StabilityReport& rep) {
    std::string out = "# cstab-evals-v1\n";
    out += "index,label,found,selected_n,size,circuit_error,kl_divergence\n";
    for (const RunRecord& r : rep.records) {
        out += std::to_string(r.spec.index) + "," + r.spec.label + "," +
               (r.found ? "1" : "0") + "," + std::to_string(r.selected_n) + "," +
               std::to_string(r.eval.circuit_size) + "," + fmt_double(r.eval.circuit_error) + "," +
               fmt_double(r.eval.kl_divergence) + "\n";
    }
    return out;
}

std::string jaccard_csv(const StabilityReport& rep) {
    std::string out = "# cstab-jaccard-v1\n";
    out += "run";
    for (int idx : rep.success_indices) out += "," + std::to_string(idx);
    out += "\n";
    for (int i = 0; i < rep.jaccard.n; ++i) {
        out += std::to_string(rep.success_indices[static_cast<std::size_t>(i)]);
        for (int j = 0; j < rep.jaccard.n; ++j) out += "," + fmt_double(rep.jaccard.at(i, j));
        out += "\n";
    }
    return out;
}

namespace {
std::string stats_row(const std::string& name, const SummaryStats& s, std::size_t count) {
    std::string cv = s.cv ? fmt_double(*s.cv) : "";
    return name + "," + fmt_double(s.mean) + "," + fmt_double(s.variance) + "," + cv + "," +
           std::to_string(count) + "\n";
}
}  // namespace

std::string summary_csv(const StabilityReport& rep) {
    std::string out = "# cstab-summary-v1\n";
    out += "metric,mean,variance,cv,count\n";
    out += "runs," + std::to_string(rep.records.size()) + ",0,,";
    out += std::to_string(rep.records.size()) + "\n";
    out += "no_faithful_circuit," + std::to_string(rep.failures) + ",0,,";
    out += std::to_string(rep.records.size()) + "\n";
    const std::size_t n_success = rep.success_indices.size();
    if (rep.circuit_error_stats) out += stats_row("circuit_error", *rep.circuit_error_stats, n_success);
    if (rep.kl_stats) out += stats_row("kl_divergence", *rep.kl_stats, n_success);
    if (rep.size_stats) out += stats_row("circuit_size", *rep.size_stats, n_success);
    if (rep.jaccard_stats) {
        out += stats_row("pairwise_jaccard", *rep.jaccard_stats, n_success * (n_success - 1) / 2);
    }
    if (!rep.jaccard_to_median.empty()) {
        out += stats_row("jaccard_to_median", summarize(rep.jaccard_to_median), n_success);
    }
    if (rep.mds) {
        out += "mds_stress," + fmt_double(rep.mds->stress) + ",0,,1\n";
    }
    return out;
}

std::string mds_csv(const StabilityReport& rep) {
    std::string out = "# cstab-mds-v1\n";
    out += "index,label,x,y\n";
    if (!rep.mds) return out;
    for (int i = 0; i < rep.mds->n; ++i) {
        const int run_idx = rep.success_indices[static_cast<std::size_t>(i)];
        const RunRecord& r = rep.records[static_cast<std::size_t>(run_idx)];
        out += std::to_string(run_idx) + "," + r.spec.label + "," + fmt_double(rep.mds->at(i, 0)) +
               "," + fmt_double(rep.mds->at(i, 1)) + "\n";
    }
    return out;
}

std::string grid_table_csv(const StabilityReport& rep) {
    std::string out = "# cstab-grid-v1\n";
    out += "parameters,circuit_error,size,jaccard_to_median\n";
    std::size_t success_pos = 0;
    for (const RunRecord& r : rep.records) {
        out += "\"" + r.spec.label + "\",";
        if (r.found) {
            out += fmt_double(r.eval.circuit_error) + "," + std::to_string(r.eval.circuit_size) +
                   "," + fmt_double(rep.jaccard_to_median[success_pos]);
            ++success_pos;
        } else {
            out += "-,-,-";
        }
        out += "\n";
    }
    return out;
}

std::string manifest_to_json(const Manifest& m) {
    json j;
    j["format"] = "cstab-manifest-v1";
    json files = json::array();
    for (const auto& [path, hash] : m.files) {
        files.push_back({{"path", path}, {"hash", hash_hex(hash)}});
    }
    j["files"] = std::move(files);
    j["combined_hash"] = hash_hex(m.combined);
    return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cstab-manifest-v1") throw Error("manifest: unknown format");
    Manifest m;
    for (const auto& f : j.at("files")) {
        m.files.emplace_back(f.at("path").get<std::string>(),
                             std::stoull(f.at("hash").get<std::string>(), nullptr, 16));
    }
    m.combined = std::stoull(j.at("combined_hash").get<std::string>(), nullptr, 16);
    return m;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw Error("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    std::string out((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return out;
}

namespace {
uint64_t combined_hash(const std::vector<std::pair<std::string, uint64_t>>& files) {
    std::vector<std::pair<std::string, uint64_t>> sorted = files;
    std::sort(sorted.begin(), sorted.end());
    Fnv1a h;
    h.update("manifest-combined-v1");
    for (const auto& [path, hash] : sorted) {
        h.update(path);
        h.update_u64(hash);
    }
    return h.digest();
}
}  // namespace

Manifest write_report_dir(const std::string& dir, const ComputeDag& dag,
                          const SuiteFileConfig& cfg, const StabilityReport& rep,
                          const std::string& checkpoint_src, bool grid_table) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    Manifest m;
    auto emit = [&](const std::string& rel, const std::string& content) {
        write_text_file((fs::path(dir) / rel).string(), content);
        m.files.emplace_back(rel, fnv1a(content));
    };

    emit("suite.json", suite_config_to_json(cfg));
    char name[64];
    for (const RunRecord& r : rep.records) {
        std::snprintf(name, sizeof(name), "records/run_%03d.json", r.spec.index);
        emit(name, run_record_to_json(r));
    }
    emit("evals.csv", evals_csv(rep));
    emit("summary.csv", summary_csv(rep));
    emit("jaccard.csv", jaccard_csv(rep));
    emit("mds.csv", mds_csv(rep));
    if (grid_table) emit("grid_table.csv", grid_table_csv(rep));
    if (rep.median) emit("median_circuit.json", circuit_to_json(*rep.median, dag));
    if (rep.circuit_union) emit("union_circuit.json", circuit_to_json(*rep.circuit_union, dag));

    // embed the checkpoint so the directory replays standalone
    const std::string ckpt_dst = (fs::path(dir) / cfg.checkpoint).string();
    if (fs::absolute(checkpoint_src) != fs::absolute(ckpt_dst)) {
        fs::copy_file(checkpoint_src, ckpt_dst, fs::copy_options::overwrite_existing);
    }
    m.files.emplace_back(cfg.checkpoint, file_hash(ckpt_dst));

    m.combined = combined_hash(m.files);
    write_text_file((fs::path(dir) / "manifest.json").string(), manifest_to_json(m));
    return m;
}

StabilityReport load_report_records(const std::string& dir, const ComputeDag& dag,
                                    const SuiteFileConfig& cfg) {
    namespace fs = std::filesystem;
    std::vector<RunRecord> records;
    std::vector<fs::path> paths;
    const fs::path rec_dir = fs::path(dir) / "records";
    if (!fs::is_directory(rec_dir)) throw Error("no records directory under '" + dir + "'");
    for (const auto& entry : fs::directory_iterator(rec_dir)) {
        if (entry.path().extension() == ".json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const fs::path& p : paths) {
        records.push_back(run_record_from_json(read_text_file(p.string())));
    }
    if (records.empty()) throw Error("no records under '" + dir + "'");
    for (const RunRecord& r : records) {
        if (r.model_hash != cfg.model_hash) {
            throw Error("record '" + r.spec.label + "' was produced with a different model");
        }
    }
    return StabilityReport::build(dag, std::move(records));
}

}  // namespace cstab
