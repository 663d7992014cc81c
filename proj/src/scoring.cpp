#include "cstab/scoring.hpp"

#include <algorithm>
#include <cstdio>

namespace cstab {

std::string to_string(ScoreMethod m) {
    switch (m) {
        case ScoreMethod::Eap: return "eap";
        case ScoreMethod::EapIgInputs: return "eap-ig-inputs";
        case ScoreMethod::EapIgActivations: return "eap-ig-activations";
        case ScoreMethod::CleanCorrupted: return "clean-corrupted";
    }
    throw Error("unknown score method");
}

std::string to_string(Aggregation a) {
    switch (a) {
        case Aggregation::Sum: return "sum";
        case Aggregation::Mean: return "mean";
        case Aggregation::Median: return "median";
    }
    throw Error("unknown aggregation");
}

ScoreMethod method_from_string(const std::string& s) {
    if (s == "eap") return ScoreMethod::Eap;
    if (s == "eap-ig-inputs") return ScoreMethod::EapIgInputs;
    if (s == "eap-ig-activations") return ScoreMethod::EapIgActivations;
    if (s == "clean-corrupted") return ScoreMethod::CleanCorrupted;
    throw Error("unknown score method '" + s + "'");
}

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "sum") return Aggregation::Sum;
    if (s == "mean") return Aggregation::Mean;
    if (s == "median") return Aggregation::Median;
    throw Error("unknown aggregation '" + s + "'");
}

void ScoringConfig::validate() const {
    if (ig_steps < 1) throw Error("scoring: ig_steps must be >= 1");
    intervention.validate();
}

uint64_t ScoringConfig::hash() const {
    Fnv1a h;
    h.update("scoring-config-v1");
    h.update(to_string(method));
    // ig_steps does not affect eap / clean-corrupted output
    const bool uses_m =
        method == ScoreMethod::EapIgInputs || method == ScoreMethod::EapIgActivations;
    h.update_i64(uses_m ? ig_steps : 0);
    h.update(to_string(aggregation));
    h.update_u64(intervention.hash());
    return h.digest();
}

namespace {

// Mean gradient term g(v) for one pair under one method; see scoring.hpp.
GradCache gradient_term(const ToyTransformer& model, const ComputeDag& dag,
                        const PromptPair& pair, const Metric& metric,
                        const ActivationCache& clean, const ActivationCache& base,
                        ScoreMethod method, int m) {
    switch (method) {
        case ScoreMethod::Eap:
            return grad_metric(model, dag, pair.clean, metric);

        case ScoreMethod::EapIgInputs: {
            const Tensor& e_clean = clean.outputs[0];
            const Tensor& e_base = base.outputs[0];
            Tensor delta = e_base;
            delta.sub_(e_clean);
            GradCache acc;
            for (int k = 0; k < m; ++k) {
                const double alpha = static_cast<double>(k) / static_cast<double>(m);
                ForwardOverrides ov;
                Tensor e = delta;
                e.scale_(alpha);
                e.add_(e_clean);
                ov.embed_output = std::move(e);
                GradCache g = grad_metric(model, dag, pair.clean, metric, &ov);
                if (k == 0) {
                    acc = std::move(g);
                } else {
                    acc.add_(g);
                }
            }
            acc.scale_(1.0 / static_cast<double>(m));
            return acc;
        }

        case ScoreMethod::EapIgActivations: {
            GradCache acc;
            for (int k = 0; k < m; ++k) {
                const double alpha = static_cast<double>(k) / static_cast<double>(m);
                ForwardOverrides ov;
                if (alpha != 0.0) {
                    for (int v = 1; v < dag.node_count(); ++v) {
                        Tensor off = node_input_from_outputs(dag, v, base.outputs);
                        off.sub_(clean.inputs[static_cast<std::size_t>(v)]);
                        off.scale_(alpha);
                        ov.input_offsets.emplace(v, std::move(off));
                    }
                }
                GradCache g = grad_metric(model, dag, pair.clean, metric, &ov);
                if (k == 0) {
                    acc = std::move(g);
                } else {
                    acc.add_(g);
                }
            }
            acc.scale_(1.0 / static_cast<double>(m));
            return acc;
        }

        case ScoreMethod::CleanCorrupted: {
            GradCache g0 = grad_metric(model, dag, pair.clean, metric);
            ForwardOverrides ov;
            ov.embed_output = base.outputs[0];
            GradCache g1 = grad_metric(model, dag, pair.clean, metric, &ov);
            g0.add_(g1);
            g0.scale_(0.5);
            return g0;
        }
    }
    throw Error("unknown score method");
}

}  // namespace

EdgeScoreTable score_edges(const ToyTransformer& model, const ComputeDag& dag,
                           const TaskDataset& data, const ScoringConfig& cfg) {
    cfg.validate();
    if (data.pairs.empty()) throw Error("score_edges: empty dataset");

    EdgeScoreTable table;
    table.n_edges = dag.edge_count();
    table.n_samples = data.size();
    table.raw.assign(static_cast<std::size_t>(table.n_edges) * table.n_samples, 0.0);
    {
        Fnv1a h;
        h.update("score-table-v1");
        h.update_u64(dag.structure_hash());
        h.update_u64(model.params_hash());
        h.update_u64(data.content_hash());
        h.update_u64(cfg.hash());
        table.config_hash = h.digest();
    }

    BaselineProvider provider(model, dag, data, cfg.intervention);

    for (int i = 0; i < data.size(); ++i) {
        const PromptPair& pair = data.pairs[static_cast<std::size_t>(i)];
        auto metric = metric_for(data.task, pair);
        ForwardResult clean = forward_cached(model, dag, pair.clean);
        ActivationCache base = provider.baseline_for(pair);
        GradCache g = gradient_term(model, dag, pair, *metric, clean.cache, base, cfg.method,
                                    cfg.ig_steps);

        // delta output per upstream node, reused across its out-edges
        std::vector<Tensor> delta(static_cast<std::size_t>(dag.node_count()));
        for (int e = 0; e < dag.edge_count(); ++e) {
            const int u = dag.edge(e).src;
            const int v = dag.edge(e).dst;
            Tensor& du = delta[static_cast<std::size_t>(u)];
            if (du.numel() == 0) {
                du = base.outputs[static_cast<std::size_t>(u)];
                du.sub_(clean.cache.outputs[static_cast<std::size_t>(u)]);
            }
            const double s = dot_all(du, g.input_grads[static_cast<std::size_t>(v)]);
            if (!std::isfinite(s)) {
                throw Error("score_edges: non-finite score for edge " + dag.edge_name(e) +
                            " at pair " + std::to_string(i));
            }
            table.at(i, e) = s;
        }
    }

    return aggregate(table, cfg.aggregation);
}

namespace {
EdgeScoreTable score_with(const ToyTransformer& model, const ComputeDag& dag,
                          const TaskDataset& data, const InterventionSpec& intervention,
                          ScoreMethod method, int m) {
    ScoringConfig cfg;
    cfg.method = method;
    cfg.ig_steps = m;
    cfg.aggregation = Aggregation::Sum;
    cfg.intervention = intervention;
    return score_edges(model, dag, data, cfg);
}
}  // namespace

EdgeScoreTable score_eap(const ToyTransformer& model, const ComputeDag& dag,
                         const TaskDataset& data, const InterventionSpec& intervention) {
    return score_with(model, dag, data, intervention, ScoreMethod::Eap, 1);
}

EdgeScoreTable score_eap_ig_inputs(const ToyTransformer& model, const ComputeDag& dag,
                                   const TaskDataset& data, const InterventionSpec& intervention,
                                   int ig_steps) {
    return score_with(model, dag, data, intervention, ScoreMethod::EapIgInputs, ig_steps);
}

EdgeScoreTable score_eap_ig_activations(const ToyTransformer& model, const ComputeDag& dag,
                                        const TaskDataset& data,
                                        const InterventionSpec& intervention, int ig_steps) {
    return score_with(model, dag, data, intervention, ScoreMethod::EapIgActivations, ig_steps);
}

EdgeScoreTable score_clean_corrupted(const ToyTransformer& model, const ComputeDag& dag,
                                     const TaskDataset& data,
                                     const InterventionSpec& intervention) {
    return score_with(model, dag, data, intervention, ScoreMethod::CleanCorrupted, 1);
}

EdgeScoreTable aggregate(const EdgeScoreTable& table, Aggregation rule) {
    if (table.n_samples < 1) throw Error("aggregate: empty table");
    EdgeScoreTable out = table;
    out.rule = rule;
    out.aggregated.assign(static_cast<std::size_t>(table.n_edges), 0.0);
    std::vector<double> column(static_cast<std::size_t>(table.n_samples));
    for (int e = 0; e < table.n_edges; ++e) {
        for (int i = 0; i < table.n_samples; ++i) column[static_cast<std::size_t>(i)] = table.at(i, e);
        double v = 0.0;
        switch (rule) {
            case Aggregation::Sum:
                v = pairwise_sum(column);
                break;
            case Aggregation::Mean:
                v = pairwise_sum(column) / static_cast<double>(table.n_samples);
                break;
            case Aggregation::Median: {
                std::vector<double> sorted = column;
                std::sort(sorted.begin(), sorted.end());
                v = sorted[(sorted.size() - 1) / 2];  // lower median
                break;
            }
        }
        out.aggregated[static_cast<std::size_t>(e)] = v;
    }
    return out;
}

std::string scores_to_csv(const EdgeScoreTable& table, const ComputeDag& dag) {
    std::string out = "# cstab-scores-v1\n";
    out += "edge_id,edge,score,samples,config_hash\n";
    char buf[64];
    for (int e = 0; e < table.n_edges; ++e) {
        std::snprintf(buf, sizeof(buf), "%.17g", table.aggregated[static_cast<std::size_t>(e)]);
        out += std::to_string(e) + "," + dag.edge_name(e) + "," + buf + "," +
               std::to_string(table.n_samples) + "," + hash_hex(table.config_hash) + "\n";
    }
    return out;
}

}  // namespace cstab
