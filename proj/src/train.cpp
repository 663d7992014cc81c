#include "cstab/train.hpp"

#include <cmath>

#include "cstab/rng.hpp"

namespace cstab {

namespace {
int argmax_row(std::span<const double> row) {
    int best = 0;
    for (std::size_t i = 1; i < row.size(); ++i) {
        if (row[i] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}
}  // namespace

double clean_accuracy(const ToyTransformer& model, const ComputeDag& dag, const TaskDataset& data) {
    int hits = 0;
    for (const PromptPair& p : data.pairs) {
        ForwardResult fwd = forward_cached(model, dag, p.clean);
        const int pred = argmax_row(fwd.logits.row(fwd.logits.rows() - 1));
        for (int a : p.answers) {
            if (a == pred) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(data.pairs.size());
}

double mean_clean_metric(const ToyTransformer& model, const ComputeDag& dag,
                         const TaskDataset& data) {
    double acc = 0.0;
    for (const PromptPair& p : data.pairs) {
        ForwardResult fwd = forward_cached(model, dag, p.clean);
        acc += task_metric(fwd.logits, p, data.task);
    }
    return acc / static_cast<double>(data.pairs.size());
}

TrainResult train_toy_model(const ModelConfig& cfg, const TaskDataset& data,
                            const TrainConfig& tc) {
    if (data.pairs.empty()) throw Error("train: empty dataset");
    cfg.validate();

    TrainResult res;
    res.model = ToyTransformer::random_init(cfg, tc.seed);
    ComputeDag dag = ComputeDag::build(cfg);
    Rng rng(Rng::mix(tc.seed, 0x7ea1));

    std::vector<Tensor*> params = res.model.parameters();
    std::vector<Tensor> m_state, v_state;
    for (Tensor* p : params) {
        m_state.push_back(Tensor::zeros_like(*p));
        v_state.push_back(Tensor::zeros_like(*p));
    }

    double window_acc = 0.0;
    int window_n = 0;
    for (int step = 0; step < tc.steps; ++step) {
        ParamGrads pg = res.model.zero_grads();
        double loss = 0.0;
        const int batch = std::min<int>(tc.batch, static_cast<int>(data.pairs.size()));
        for (int b = 0; b < batch; ++b) {
            const PromptPair& p = data.pairs[rng.index(data.pairs.size())];
            AnswerSetNll nll(p.answers);
            ForwardResult fwd = forward_cached(res.model, dag, p.clean);
            loss += nll.value(fwd.logits);
            backward_metric(res.model, dag, p.clean, fwd, nll, &pg);
        }
        loss /= static_cast<double>(batch);
        if (!std::isfinite(loss)) {
            throw Error("train: non-finite loss at step " + std::to_string(step));
        }

        const double scale = 1.0 / static_cast<double>(batch);
        const double bc1 = 1.0 - std::pow(tc.beta1, step + 1);
        const double bc2 = 1.0 - std::pow(tc.beta2, step + 1);
        for (std::size_t i = 0; i < params.size(); ++i) {
            double* w = params[i]->data();
            double* g = pg.grads[i].data();
            double* m = m_state[i].data();
            double* v = v_state[i].data();
            for (std::size_t k = 0; k < params[i]->numel(); ++k) {
                const double gk = g[k] * scale;
                m[k] = tc.beta1 * m[k] + (1.0 - tc.beta1) * gk;
                v[k] = tc.beta2 * v[k] + (1.0 - tc.beta2) * gk * gk;
                w[k] -= tc.lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + tc.eps);
            }
        }

        window_acc += loss;
        ++window_n;
        if (window_n == tc.log_window || step + 1 == tc.steps) {
            res.loss_trace.push_back(window_acc / window_n);
            window_acc = 0.0;
            window_n = 0;
        }
    }

    res.clean_accuracy = clean_accuracy(res.model, dag, data);
    return res;
}

}  // namespace cstab
