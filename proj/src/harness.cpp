#include "cstab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace cstab {

std::string to_string(SuiteKind k) {
    switch (k) {
        case SuiteKind::Bootstrap: return "bootstrap";
        case SuiteKind::MetaDataset: return "meta-dataset";
        case SuiteKind::Paraphrase: return "paraphrase";
        case SuiteKind::HyperGrid: return "hyper-grid";
        case SuiteKind::NoiseSweep: return "noise-sweep";
        case SuiteKind::BaseMethodComparison: return "base-method-comparison";
    }
    throw Error("unknown suite kind");
}

SuiteKind suite_from_string(const std::string& s) {
    if (s == "bootstrap") return SuiteKind::Bootstrap;
    if (s == "meta-dataset") return SuiteKind::MetaDataset;
    if (s == "paraphrase") return SuiteKind::Paraphrase;
    if (s == "hyper-grid") return SuiteKind::HyperGrid;
    if (s == "noise-sweep") return SuiteKind::NoiseSweep;
    if (s == "base-method-comparison") return SuiteKind::BaseMethodComparison;
    throw Error("unknown suite kind '" + s + "'");
}

const std::vector<double>& default_noise_amplitudes() {
    static const std::vector<double> amps = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
    return amps;
}

void SuiteConfig::validate() const {
    if ((kind == SuiteKind::Bootstrap || kind == SuiteKind::MetaDataset ||
         kind == SuiteKind::NoiseSweep) &&
        runs < 2) {
        throw Error("suite: need at least 2 runs for variance statistics");
    }
    for (double a : amplitudes) {
        if (!(a > 0.0)) throw Error("suite: noise amplitudes must be strictly positive");
    }
}

uint64_t SuiteConfig::hash() const {
    Fnv1a h;
    h.update("suite-config-v1");
    h.update(to_string(kind));
    h.update_i64(runs);
    h.update_u64(seed);
    for (int t : templates) h.update_i64(t);
    for (double a : amplitudes) h.update_double(a);
    return h.digest();
}

uint64_t DatasetSpec::hash() const {
    Fnv1a h;
    h.update("dataset-spec-v1");
    h.update_i64(size);
    h.update_u64(base_seed);
    h.update_i64(template_id);
    h.update(to_string(provenance));
    h.update_u64(derive_seed);
    h.update_i64(paraphrase_template);
    return h.digest();
}

TaskDataset make_dataset(const TaskGenerator& gen, const DatasetSpec& spec) {
    switch (spec.provenance) {
        case Provenance::Base:
            return gen.generate(spec.size, spec.base_seed, spec.template_id);
        case Provenance::Bootstrap: {
            TaskDataset base = gen.generate(spec.size, spec.base_seed, spec.template_id);
            return bootstrap_resample(base, spec.derive_seed);
        }
        case Provenance::Meta: {
            TaskDataset d = gen.generate(spec.size, spec.derive_seed, spec.template_id);
            d.provenance = Provenance::Meta;
            return d;
        }
        case Provenance::Paraphrase: {
            TaskDataset base = gen.generate(spec.size, spec.base_seed, spec.template_id);
            return paraphrase_dataset(base, spec.paraphrase_template);
        }
    }
    throw Error("unknown provenance");
}

uint64_t RunSpec::hash(uint64_t model_hash) const {
    Fnv1a h;
    h.update("run-spec-v1");
    h.update_i64(index);
    h.update(label);
    h.update(to_string(task));
    h.update_u64(dataset.hash());
    h.update_u64(scoring.hash());
    h.update_u64(selection.hash());
    h.update_u64(model_hash);
    return h.digest();
}

Circuit RunRecord::to_circuit(const ComputeDag& dag) const {
    if (!found) throw Error("record " + spec.label + " has no circuit");
    Circuit c;
    c.edge_ids = circuit_edges;
    c.dag_hash = dag.structure_hash();
    c.config_hash = spec.scoring.hash();
    return c;
}

std::vector<RunSpec> expand_suite(TaskId task, const DatasetSpec& base_dataset,
                                  const ScoringConfig& base_scoring,
                                  const SelectionConfig& base_selection, const SuiteConfig& suite) {
    suite.validate();
    std::vector<RunSpec> specs;
    auto push = [&](const std::string& label, const DatasetSpec& ds, const ScoringConfig& sc) {
        RunSpec spec;
        spec.index = static_cast<int>(specs.size());
        spec.label = label;
        spec.task = task;
        spec.dataset = ds;
        spec.scoring = sc;
        spec.selection = base_selection;
        specs.push_back(std::move(spec));
    };
    char buf[64];

    switch (suite.kind) {
        case SuiteKind::Bootstrap:
            for (int i = 0; i < suite.runs; ++i) {
                DatasetSpec ds = base_dataset;
                ds.provenance = Provenance::Bootstrap;
                ds.derive_seed = Rng::mix(suite.seed, static_cast<uint64_t>(i));
                std::snprintf(buf, sizeof(buf), "bootstrap-%03d", i);
                push(buf, ds, base_scoring);
            }
            break;

        case SuiteKind::MetaDataset:
            for (int i = 0; i < suite.runs; ++i) {
                DatasetSpec ds = base_dataset;
                ds.provenance = Provenance::Meta;
                ds.derive_seed = Rng::mix(suite.seed, static_cast<uint64_t>(i) + 0x4000);
                std::snprintf(buf, sizeof(buf), "meta-%03d", i);
                push(buf, ds, base_scoring);
            }
            break;

        case SuiteKind::Paraphrase: {
            std::vector<int> templates = suite.templates;
            if (templates.empty()) {
                const int count = TaskGenerator(task).template_count();
                for (int t = 0; t < count; ++t) templates.push_back(t);
            }
            for (int t : templates) {
                DatasetSpec ds = base_dataset;
                if (t != base_dataset.template_id) {
                    ds.provenance = Provenance::Paraphrase;
                    ds.paraphrase_template = t;
                }
                std::snprintf(buf, sizeof(buf), "paraphrase-t%d", t);
                push(buf, ds, base_scoring);
            }
            break;
        }

        case SuiteKind::HyperGrid: {
            struct Row {
                const char* label;
                ScoreMethod method;
                Aggregation agg;
                InterventionKind kind;
            };
            static const Row rows[] = {
                {"EAP, sum, patching", ScoreMethod::Eap, Aggregation::Sum, InterventionKind::Patching},
                {"EAP-IG-activations, sum, patching", ScoreMethod::EapIgActivations,
                 Aggregation::Sum, InterventionKind::Patching},
                {"EAP-IG-inputs, median, patching", ScoreMethod::EapIgInputs, Aggregation::Median,
                 InterventionKind::Patching},
                {"EAP-IG-inputs, sum, mean", ScoreMethod::EapIgInputs, Aggregation::Sum,
                 InterventionKind::Mean},
                {"EAP-IG-inputs, sum, mean-positional", ScoreMethod::EapIgInputs, Aggregation::Sum,
                 InterventionKind::MeanPositional},
                {"EAP-IG-inputs, sum, patching", ScoreMethod::EapIgInputs, Aggregation::Sum,
                 InterventionKind::Patching},
                {"clean-corrupted, sum, patching", ScoreMethod::CleanCorrupted, Aggregation::Sum,
                 InterventionKind::Patching},
            };
            for (const Row& row : rows) {
                ScoringConfig sc = base_scoring;
                sc.method = row.method;
                sc.aggregation = row.agg;
                sc.intervention = InterventionSpec{};
                sc.intervention.kind = row.kind;
                push(row.label, base_dataset, sc);
            }
            break;
        }

        case SuiteKind::NoiseSweep: {
            const std::vector<double>& amps =
                suite.amplitudes.empty() ? default_noise_amplitudes() : suite.amplitudes;
            for (std::size_t a = 0; a < amps.size(); ++a) {
                for (int s = 0; s < suite.runs; ++s) {
                    ScoringConfig sc = base_scoring;
                    sc.intervention = InterventionSpec{};
                    sc.intervention.kind = InterventionKind::NoisyEmbed;
                    sc.intervention.amplitude = amps[a];
                    sc.intervention.direction_seed =
                        Rng::mix(suite.seed, 0x8000 + a * 1024 + static_cast<uint64_t>(s));
                    std::snprintf(buf, sizeof(buf), "noise-a%g-s%02d", amps[a], s);
                    push(buf, base_dataset, sc);
                }
            }
            break;
        }

        case SuiteKind::BaseMethodComparison: {
            static const ScoreMethod methods[] = {ScoreMethod::Eap, ScoreMethod::EapIgInputs,
                                                  ScoreMethod::EapIgActivations,
                                                  ScoreMethod::CleanCorrupted};
            for (ScoreMethod m : methods) {
                ScoringConfig sc = base_scoring;
                sc.method = m;
                push("method-" + to_string(m), base_dataset, sc);
            }
            break;
        }
    }
    return specs;
}

RunRecord execute_run(const ToyTransformer& model, const ComputeDag& dag,
                      const TaskGenerator& gen, const RunSpec& spec) {
    if (gen.task() != spec.task) throw Error("execute_run: generator/task mismatch");
    TaskDataset data = make_dataset(gen, spec.dataset);

    RunRecord rec;
    rec.spec = spec;
    rec.model_hash = model.params_hash();
    rec.record_hash = spec.hash(rec.model_hash);

    EdgeScoreTable scores = score_edges(model, dag, data, spec.scoring);
    SelectionOutcome sel = select_circuit(scores, dag, spec.selection);
    rec.found = sel.found();
    rec.selected_n = sel.selected_n;
    if (rec.found) {
        rec.circuit_edges = sel.circuit->edge_ids;
        rec.eval = evaluate_circuit(model, dag, *sel.circuit, data, spec.scoring.intervention);
    } else {
        rec.eval = EvalReport{};
        rec.eval.dataset_hash = data.content_hash();
    }

    Fnv1a h;
    h.update("run-result-v1");
    h.update_u64(rec.record_hash);
    h.update_u64(rec.found ? 1 : 0);
    h.update_i64(rec.selected_n);
    for (int e : rec.circuit_edges) h.update_i64(e);
    h.update_double(rec.eval.circuit_error);
    h.update_double(rec.eval.kl_divergence);
    h.update_i64(rec.eval.circuit_size);
    h.update_u64(rec.eval.dataset_hash);
    rec.result_hash = h.digest();
    return rec;
}

RunRecord replay_run(const ToyTransformer& model, const ComputeDag& dag, const TaskGenerator& gen,
                     const RunRecord& record) {
    const uint64_t expected = record.spec.hash(model.params_hash());
    if (expected != record.record_hash) {
        throw Error("replay: record '" + record.spec.label +
                    "' hash mismatch (edited fields or wrong model)");
    }
    return execute_run(model, dag, gen, record.spec);
}

std::vector<RunRecord> run_suite(const ToyTransformer& model, const ComputeDag& dag,
                                 const TaskGenerator& gen, const std::vector<RunSpec>& specs,
                                 int jobs) {
    std::vector<RunRecord> records(specs.size());
    if (jobs <= 1 || specs.size() <= 1) {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            records[i] = execute_run(model, dag, gen, specs[i]);
        }
        return records;
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            try {
                records[i] = execute_run(model, dag, gen, specs[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(jobs, static_cast<int>(specs.size()));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return records;
}

StabilityReport StabilityReport::build(const ComputeDag& dag, std::vector<RunRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.spec.index < b.spec.index; });

    StabilityReport rep;
    rep.records = std::move(records);

    std::vector<Circuit> circuits;
    for (const RunRecord& r : rep.records) {
        if (r.found) {
            rep.success_indices.push_back(r.spec.index);
            circuits.push_back(r.to_circuit(dag));
        } else {
            ++rep.failures;
        }
    }
    rep.empty_structure = circuits.empty();

    if (!circuits.empty()) {
        rep.jaccard = jaccard_matrix(circuits);
        std::vector<double> ce, kl, sizes;
        for (const RunRecord& r : rep.records) {
            if (!r.found) continue;
            ce.push_back(r.eval.circuit_error);
            kl.push_back(r.eval.kl_divergence);
            sizes.push_back(static_cast<double>(r.eval.circuit_size));
        }
        rep.circuit_error_stats = summarize(ce);
        rep.kl_stats = summarize(kl);
        rep.size_stats = summarize(sizes);

        rep.median = median_circuit(circuits);
        rep.circuit_union = union_circuit(circuits);
        for (const Circuit& c : circuits) {
            rep.jaccard_to_median.push_back(
                rep.median->edge_ids.empty() && c.edge_ids.empty()
                    ? 1.0
                    : jaccard(c.edge_ids, rep.median->edge_ids));
        }

        if (circuits.size() >= 2) {
            rep.jaccard_stats = summarize(rep.jaccard.off_diagonal());
            std::vector<double> dist(rep.jaccard.values.size());
            for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = 1.0 - rep.jaccard.values[i];
            for (int i = 0; i < rep.jaccard.n; ++i) {
                dist[static_cast<std::size_t>(i) * rep.jaccard.n + i] = 0.0;
            }
            rep.mds = classical_mds(dist, rep.jaccard.n, 2);
        }
    }

    Fnv1a h;
    h.update("stability-report-v1");
    for (const RunRecord& r : rep.records) {
        h.update_u64(r.record_hash);
        h.update_u64(r.result_hash);
    }
    h.update_i64(rep.failures);
    for (double v : rep.jaccard.values) h.update_double(v);
    for (double v : rep.jaccard_to_median) h.update_double(v);
    if (rep.median) {
        for (int e : rep.median->edge_ids) h.update_i64(e);
    }
    if (rep.circuit_union) {
        for (int e : rep.circuit_union->edge_ids) h.update_i64(e);
    }
    if (rep.mds) {
        for (double v : rep.mds->coords) h.update_double(v);
        h.update_double(rep.mds->stress);
    }
    rep.report_hash = h.digest();
    return rep;
}

}  // namespace cstab
