#include "cstab/model.hpp"

#include <cmath>

#include "cstab/rng.hpp"

namespace cstab {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void fill_normal(Tensor& t, Rng& rng, double sigma) {
    for (double& v : t.flat()) v = sigma * rng.normal();
}
}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_deriv(double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

ToyTransformer::ToyTransformer(const ModelConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    tok_embed = Tensor(cfg.vocab, cfg.d_model);
    pos_embed = Tensor(cfg.context, cfg.d_model);
    layers.resize(static_cast<std::size_t>(cfg.layers));
    for (auto& layer : layers) {
        layer.heads.resize(static_cast<std::size_t>(cfg.heads));
        for (auto& head : layer.heads) {
            head.wq = Tensor(cfg.d_model, cfg.head_dim());
            head.wk = Tensor(cfg.d_model, cfg.head_dim());
            head.wv = Tensor(cfg.d_model, cfg.head_dim());
            head.wo = Tensor(cfg.head_dim(), cfg.d_model);
        }
        layer.w1 = Tensor(cfg.d_model, cfg.d_ff);
        layer.w2 = Tensor(cfg.d_ff, cfg.d_model);
    }
    unembed = Tensor(cfg.d_model, cfg.vocab);
}

ToyTransformer ToyTransformer::random_init(const ModelConfig& cfg, uint64_t seed) {
    ToyTransformer m(cfg);
    Rng rng(seed);
    fill_normal(m.tok_embed, rng, 0.5);
    fill_normal(m.pos_embed, rng, 0.5);
    for (auto& layer : m.layers) {
        for (auto& head : layer.heads) {
            fill_normal(head.wq, rng, 0.5 / std::sqrt(cfg.d_model));
            fill_normal(head.wk, rng, 0.5 / std::sqrt(cfg.d_model));
            fill_normal(head.wv, rng, 0.5 / std::sqrt(cfg.d_model));
            fill_normal(head.wo, rng, 0.5 / std::sqrt(cfg.head_dim()));
        }
        fill_normal(layer.w1, rng, 0.5 / std::sqrt(cfg.d_model));
        fill_normal(layer.w2, rng, 0.5 / std::sqrt(cfg.d_ff));
    }
    fill_normal(m.unembed, rng, 0.5 / std::sqrt(cfg.d_model));
    return m;
}

Tensor ToyTransformer::embed(std::span<const int> tokens) const {
    if (tokens.empty()) throw Error("embed: empty token sequence");
    if (static_cast<int>(tokens.size()) > cfg_.context) {
        throw Error("embed: sequence length " + std::to_string(tokens.size()) +
                    " exceeds context " + std::to_string(cfg_.context));
    }
    Tensor out(static_cast<int>(tokens.size()), cfg_.d_model);
    for (int t = 0; t < out.rows(); ++t) {
        const int tok = tokens[static_cast<std::size_t>(t)];
        if (tok < 0 || tok >= cfg_.vocab) {
            throw Error("embed: token id " + std::to_string(tok) + " outside vocab " +
                        std::to_string(cfg_.vocab));
        }
        for (int j = 0; j < cfg_.d_model; ++j) {
            out(t, j) = tok_embed(tok, j) + pos_embed(t, j);
        }
    }
    return out;
}

Tensor ToyTransformer::node_forward(const Node& node, const Tensor& input,
                                    NodeScratch* scratch) const {
    const int T = input.rows();
    switch (node.kind) {
        case NodeKind::AttnHead: {
            const HeadParams& hp =
                layers[static_cast<std::size_t>(node.layer)].heads[static_cast<std::size_t>(node.head)];
            const int dh = cfg_.head_dim();
            const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
            Tensor q = matmul(input, hp.wq);
            Tensor k = matmul(input, hp.wk);
            Tensor v = matmul(input, hp.wv);
            // causal softmax over j <= i
            Tensor probs(T, T);
            for (int i = 0; i < T; ++i) {
                double mx = -1e300;
                for (int j = 0; j <= i; ++j) {
                    double s = 0.0;
                    for (int p = 0; p < dh; ++p) s += q(i, p) * k(j, p);
                    s *= inv_scale;
                    probs(i, j) = s;
                    mx = std::max(mx, s);
                }
                double z = 0.0;
                for (int j = 0; j <= i; ++j) {
                    probs(i, j) = std::exp(probs(i, j) - mx);
                    z += probs(i, j);
                }
                for (int j = 0; j <= i; ++j) probs(i, j) /= z;
            }
            Tensor ctx = matmul(probs, v);
            Tensor out = matmul(ctx, hp.wo);
            if (scratch) {
                scratch->q = std::move(q);
                scratch->k = std::move(k);
                scratch->v = std::move(v);
                scratch->probs = std::move(probs);
                scratch->ctx = std::move(ctx);
            }
            return out;
        }
        case NodeKind::Mlp: {
            const LayerParams& lp = layers[static_cast<std::size_t>(node.layer)];
            Tensor pre = matmul(input, lp.w1);
            Tensor act = Tensor::zeros_like(pre);
            for (std::size_t i = 0; i < pre.numel(); ++i) act.data()[i] = gelu(pre.data()[i]);
            Tensor out = matmul(act, lp.w2);
            if (scratch) {
                scratch->pre = std::move(pre);
                scratch->act = std::move(act);
            }
            return out;
        }
        case NodeKind::Logits:
            return matmul(input, unembed);
        case NodeKind::Embed:
            throw Error("node_forward: embed node has no residual-stream input");
    }
    throw Error("node_forward: unknown node kind");
}

int ToyTransformer::param_index(const Node& node) const {
    // parameters() order: tok, pos, per layer (per head wq..wo, then w1,w2), unembed
    const int per_layer = 4 * cfg_.heads + 2;
    switch (node.kind) {
        case NodeKind::AttnHead:
            return 2 + node.layer * per_layer + 4 * node.head;
        case NodeKind::Mlp:
            return 2 + node.layer * per_layer + 4 * cfg_.heads;
        case NodeKind::Logits:
            return 2 + cfg_.layers * per_layer;
        default:
            throw Error("param_index: node has no projection parameters");
    }
}

Tensor ToyTransformer::node_backward(const Node& node, const Tensor& input,
                                     const NodeScratch& scratch, const Tensor& d_out,
                                     ParamGrads* pg) const {
    const int T = input.rows();
    switch (node.kind) {
        case NodeKind::AttnHead: {
            const HeadParams& hp =
                layers[static_cast<std::size_t>(node.layer)].heads[static_cast<std::size_t>(node.head)];
            const int dh = cfg_.head_dim();
            const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
            Tensor d_ctx = matmul_nt(d_out, hp.wo);
            Tensor d_probs = matmul_nt(d_ctx, scratch.v);
            Tensor d_v = matmul_tn(scratch.probs, d_ctx);
            // softmax rows; masked entries have probs == 0 so their d_scores vanish
            Tensor d_scores(T, T);
            for (int i = 0; i < T; ++i) {
                double dot = 0.0;
                for (int j = 0; j <= i; ++j) dot += d_probs(i, j) * scratch.probs(i, j);
                for (int j = 0; j <= i; ++j) {
                    d_scores(i, j) = scratch.probs(i, j) * (d_probs(i, j) - dot);
                }
            }
            Tensor d_q = matmul(d_scores, scratch.k);
            d_q.scale_(inv_scale);
            Tensor d_k = matmul_tn(d_scores, scratch.q);
            d_k.scale_(inv_scale);
            Tensor d_in = matmul_nt(d_q, hp.wq);
            d_in.add_(matmul_nt(d_k, hp.wk));
            d_in.add_(matmul_nt(d_v, hp.wv));
            if (pg) {
                const int base = param_index(node);
                pg->grads[static_cast<std::size_t>(base + 0)].add_(matmul_tn(input, d_q));
                pg->grads[static_cast<std::size_t>(base + 1)].add_(matmul_tn(input, d_k));
                pg->grads[static_cast<std::size_t>(base + 2)].add_(matmul_tn(input, d_v));
                pg->grads[static_cast<std::size_t>(base + 3)].add_(matmul_tn(scratch.ctx, d_out));
            }
            return d_in;
        }
        case NodeKind::Mlp: {
            const LayerParams& lp = layers[static_cast<std::size_t>(node.layer)];
            Tensor d_act = matmul_nt(d_out, lp.w2);
            Tensor d_pre = Tensor::zeros_like(d_act);
            for (std::size_t i = 0; i < d_act.numel(); ++i) {
                d_pre.data()[i] = d_act.data()[i] * gelu_deriv(scratch.pre.data()[i]);
            }
            Tensor d_in = matmul_nt(d_pre, lp.w1);
            if (pg) {
                const int base = param_index(node);
                pg->grads[static_cast<std::size_t>(base + 0)].add_(matmul_tn(input, d_pre));
                pg->grads[static_cast<std::size_t>(base + 1)].add_(matmul_tn(scratch.act, d_out));
            }
            return d_in;
        }
        case NodeKind::Logits: {
            Tensor d_in = matmul_nt(d_out, unembed);
            if (pg) {
                pg->grads[static_cast<std::size_t>(param_index(node))].add_(matmul_tn(input, d_out));
            }
            return d_in;
        }
        case NodeKind::Embed:
            throw Error("node_backward: embed handled by embed_backward");
    }
    throw Error("node_backward: unknown node kind");
}

void ToyTransformer::embed_backward(std::span<const int> tokens, const Tensor& d_emb_out,
                                    ParamGrads& pg) const {
    Tensor& d_tok = pg.grads[0];
    Tensor& d_pos = pg.grads[1];
    for (int t = 0; t < d_emb_out.rows(); ++t) {
        const int tok = tokens[static_cast<std::size_t>(t)];
        for (int j = 0; j < cfg_.d_model; ++j) {
            d_tok(tok, j) += d_emb_out(t, j);
            d_pos(t, j) += d_emb_out(t, j);
        }
    }
}

std::vector<Tensor*> ToyTransformer::parameters() {
    std::vector<Tensor*> out;
    out.push_back(&tok_embed);
    out.push_back(&pos_embed);
    for (auto& layer : layers) {
        for (auto& head : layer.heads) {
            out.push_back(&head.wq);
            out.push_back(&head.wk);
            out.push_back(&head.wv);
            out.push_back(&head.wo);
        }
        out.push_back(&layer.w1);
        out.push_back(&layer.w2);
    }
    out.push_back(&unembed);
    return out;
}

std::vector<const Tensor*> ToyTransformer::parameters() const {
    auto mut = const_cast<ToyTransformer*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

ParamGrads ToyTransformer::zero_grads() const {
    ParamGrads pg;
    for (const Tensor* p : parameters()) pg.grads.push_back(Tensor::zeros_like(*p));
    return pg;
}

uint64_t ToyTransformer::params_hash() const {
    Fnv1a h;
    h.update("toy-transformer-params-v1");
    h.update_u64(cfg_.hash());
    for (const Tensor* p : parameters()) {
        for (double v : p->flat()) h.update_double(v);
    }
    return h.digest();
}

}  // namespace cstab
