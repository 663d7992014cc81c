#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cstab/tensor.hpp"

namespace cstab {

// Scalar task metric over logits, differentiable. Task metrics read only the
// final position; test metrics may read everything.
struct Metric {
    virtual ~Metric() = default;
    virtual double value(const Tensor& logits) const = 0;
    virtual Tensor logits_grad(const Tensor& logits) const = 0;
};

// mean(answer logits) - mean(foil logits) at the final position.
class LogitDiffMetric : public Metric {
public:
    LogitDiffMetric(std::vector<int> answers, std::vector<int> foils);
    double value(const Tensor& logits) const override;
    Tensor logits_grad(const Tensor& logits) const override;

private:
    std::vector<int> answers_, foils_;
};

// sum of softmax probs over answers minus sum over foils, final position.
class ProbDiffMetric : public Metric {
public:
    ProbDiffMetric(std::vector<int> answers, std::vector<int> foils);
    double value(const Tensor& logits) const override;
    Tensor logits_grad(const Tensor& logits) const override;

private:
    std::vector<int> answers_, foils_;
};

// -log sum of softmax probs over the answer set (training loss).
class AnswerSetNll : public Metric {
public:
    explicit AnswerSetNll(std::vector<int> answers);
    double value(const Tensor& logits) const override;
    Tensor logits_grad(const Tensor& logits) const override;

private:
    std::vector<int> answers_;
};

void softmax_row(std::span<const double> in, std::span<double> out);
void log_softmax_row(std::span<const double> in, std::span<double> out);

}  // namespace cstab
