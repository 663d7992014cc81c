#include "cstab/interventions.hpp"

#include <cmath>

#include "cstab/rng.hpp"

namespace cstab {

std::string to_string(InterventionKind k) {
    switch (k) {
        case InterventionKind::Patching: return "patching";
        case InterventionKind::Zero: return "zero";
        case InterventionKind::Mean: return "mean";
        case InterventionKind::MeanPositional: return "mean-positional";
        case InterventionKind::NoisyEmbed: return "noisy-embed";
    }
    throw Error("unknown intervention kind");
}

InterventionKind intervention_from_string(const std::string& s) {
    if (s == "patching") return InterventionKind::Patching;
    if (s == "zero") return InterventionKind::Zero;
    if (s == "mean") return InterventionKind::Mean;
    if (s == "mean-positional") return InterventionKind::MeanPositional;
    if (s == "noisy-embed") return InterventionKind::NoisyEmbed;
    throw Error("unknown intervention '" + s + "'");
}

void InterventionSpec::validate() const {
    if (!std::isfinite(amplitude) || amplitude < 0.0) {
        throw Error("intervention: amplitude must be finite and >= 0");
    }
}

uint64_t InterventionSpec::hash() const {
    Fnv1a h;
    h.update("intervention-v1");
    h.update(to_string(kind));
    h.update_double(amplitude);
    h.update_u64(direction_seed);
    h.update_u64(noise_all_positions ? 1 : 0);
    return h.digest();
}

Tensor noise_direction(int d_model, uint64_t direction_seed) {
    Rng rng(Rng::mix(direction_seed, 0xd12c));
    Tensor dir(1, d_model);
    double norm2 = 0.0;
    for (double& v : dir.flat()) {
        v = rng.normal();
        norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) throw Error("noise_direction: degenerate draw");
    dir.scale_(1.0 / norm);
    return dir;
}

BaselineProvider::BaselineProvider(const ToyTransformer& model, const ComputeDag& dag,
                                   const TaskDataset& data, const InterventionSpec& spec)
    : model_(model), dag_(dag), spec_(spec) {
    spec_.validate();
    if (data.pairs.empty()) throw Error("baseline: empty dataset");

    if (spec_.kind == InterventionKind::NoisyEmbed) {
        direction_ = noise_direction(model.config().d_model, spec_.direction_seed);
        return;
    }
    if (spec_.kind != InterventionKind::Mean && spec_.kind != InterventionKind::MeanPositional) {
        return;
    }

    // Dataset means over clean-run outputs, per node.
    const int n_nodes = dag.node_count();
    const std::size_t len0 = data.pairs.front().clean.size();
    if (spec_.kind == InterventionKind::MeanPositional) {
        for (const PromptPair& p : data.pairs) {
            if (p.clean.size() != len0) {
                throw Error("mean-positional: dataset has variable-length inputs");
            }
        }
    }
    std::vector<Tensor> sum_flat(static_cast<std::size_t>(n_nodes));
    std::vector<Tensor> sum_pos(static_cast<std::size_t>(n_nodes));
    double positions = 0.0;
    for (const PromptPair& p : data.pairs) {
        ForwardResult fwd = forward_cached(model, dag, p.clean);
        for (int v = 0; v < n_nodes; ++v) {
            const Tensor& out = fwd.cache.outputs[static_cast<std::size_t>(v)];
            auto& flat = sum_flat[static_cast<std::size_t>(v)];
            if (flat.numel() == 0) flat = Tensor(1, out.cols());
            for (int t = 0; t < out.rows(); ++t) {
                for (int j = 0; j < out.cols(); ++j) flat(0, j) += out(t, j);
            }
            if (spec_.kind == InterventionKind::MeanPositional) {
                auto& pos = sum_pos[static_cast<std::size_t>(v)];
                if (pos.numel() == 0) pos = Tensor(out.rows(), out.cols());
                pos.add_(out);
            }
        }
        positions += static_cast<double>(p.clean.size());
    }
    mean_by_node_.resize(static_cast<std::size_t>(n_nodes));
    mean_positional_.resize(static_cast<std::size_t>(n_nodes));
    for (int v = 0; v < n_nodes; ++v) {
        sum_flat[static_cast<std::size_t>(v)].scale_(1.0 / positions);
        mean_by_node_[static_cast<std::size_t>(v)] = std::move(sum_flat[static_cast<std::size_t>(v)]);
        if (spec_.kind == InterventionKind::MeanPositional) {
            sum_pos[static_cast<std::size_t>(v)].scale_(1.0 / static_cast<double>(data.pairs.size()));
            mean_positional_[static_cast<std::size_t>(v)] =
                std::move(sum_pos[static_cast<std::size_t>(v)]);
        }
    }
}

ActivationCache BaselineProvider::baseline_for(const PromptPair& pair) const {
    const int n_nodes = dag_.node_count();
    const int T = static_cast<int>(pair.clean.size());
    ActivationCache cache;
    cache.inputs.resize(static_cast<std::size_t>(n_nodes));

    switch (spec_.kind) {
        case InterventionKind::Patching: {
            ForwardResult fwd = forward_cached(model_, dag_, pair.corrupted);
            return std::move(fwd.cache);
        }
        case InterventionKind::Zero: {
            cache.outputs.resize(static_cast<std::size_t>(n_nodes));
            for (int v = 0; v < n_nodes; ++v) {
                const int width = dag_.node(v).kind == NodeKind::Logits ? model_.config().vocab
                                                                        : model_.config().d_model;
                cache.outputs[static_cast<std::size_t>(v)] = Tensor(T, width);
            }
            return cache;
        }
        case InterventionKind::Mean: {
            cache.outputs.resize(static_cast<std::size_t>(n_nodes));
            for (int v = 0; v < n_nodes; ++v) {
                const Tensor& m = mean_by_node_[static_cast<std::size_t>(v)];
                Tensor out(T, m.cols());
                for (int t = 0; t < T; ++t) {
                    for (int j = 0; j < m.cols(); ++j) out(t, j) = m(0, j);
                }
                cache.outputs[static_cast<std::size_t>(v)] = std::move(out);
            }
            return cache;
        }
        case InterventionKind::MeanPositional: {
            cache.outputs.resize(static_cast<std::size_t>(n_nodes));
            for (int v = 0; v < n_nodes; ++v) {
                const Tensor& m = mean_positional_[static_cast<std::size_t>(v)];
                if (m.rows() != T) {
                    throw Error("mean-positional: pair length differs from dataset length");
                }
                cache.outputs[static_cast<std::size_t>(v)] = m;
            }
            return cache;
        }
        case InterventionKind::NoisyEmbed: {
            Tensor emb = model_.embed(pair.clean);
            std::vector<int> slots;
            if (spec_.noise_all_positions) {
                for (int t = 0; t < T; ++t) slots.push_back(t);
            } else {
                slots = pair.corruption_slots();
            }
            for (int t : slots) {
                for (int j = 0; j < emb.cols(); ++j) {
                    emb(t, j) += spec_.amplitude * direction_(0, j);
                }
            }
            ForwardOverrides ov;
            ov.embed_output = std::move(emb);
            ForwardResult fwd = forward_cached(model_, dag_, pair.clean, &ov);
            return std::move(fwd.cache);
        }
    }
    throw Error("unknown intervention kind");
}

ActivationCache baseline_activations(const InterventionSpec& spec, const ToyTransformer& model,
                                     const ComputeDag& dag, const TaskDataset& data,
                                     const PromptPair& pair) {
    BaselineProvider provider(model, dag, data, spec);
    return provider.baseline_for(pair);
}

}  // namespace cstab
