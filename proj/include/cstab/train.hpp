#pragma once

#include <cstdint>
#include <vector>

#include "cstab/backward.hpp"
#include "cstab/tasks.hpp"

namespace cstab {

struct TrainConfig {
    int steps = 2000;
    double lr = 3e-3;
    int batch = 32;
    uint64_t seed = 0;
    int log_window = 50;  // steps per loss-trace entry

    // Adam
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainResult {
    ToyTransformer model;
    std::vector<double> loss_trace;  // mean loss per log window
    double clean_accuracy = 0.0;     // argmax-in-answers on the training set
};

// Adam on the answer-set NLL of the clean inputs. Deterministic in
// (config, dataset, train config seed); throws on non-finite loss with the
// offending step index.
TrainResult train_toy_model(const ModelConfig& cfg, const TaskDataset& data,
                            const TrainConfig& tc);

// argmax-in-answers rate over clean inputs.
double clean_accuracy(const ToyTransformer& model, const ComputeDag& dag, const TaskDataset& data);

// mean task_metric over clean inputs.
double mean_clean_metric(const ToyTransformer& model, const ComputeDag& dag,
                         const TaskDataset& data);

}  // namespace cstab
