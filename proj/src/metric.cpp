#include "cstab/metric.hpp"

#include <algorithm>
#include <cmath>

namespace cstab {

namespace {
void check_ids(const std::vector<int>& ids, const char* what) {
    if (ids.empty()) throw Error(std::string("metric: empty ") + what + " set");
}
std::span<const double> final_row(const Tensor& logits) {
    if (logits.rows() < 1 || logits.cols() < 1) throw Error("metric: empty logits");
    return logits.row(logits.rows() - 1);
}
}  // namespace

void softmax_row(std::span<const double> in, std::span<double> out) {
    double mx = in[0];
    for (double v : in) mx = std::max(mx, v);
    double z = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(in[i] - mx);
        z += out[i];
    }
    for (double& v : out) v /= z;
}

void log_softmax_row(std::span<const double> in, std::span<double> out) {
    double mx = in[0];
    for (double v : in) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : in) z += std::exp(v - mx);
    const double lz = std::log(z) + mx;
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - lz;
}

LogitDiffMetric::LogitDiffMetric(std::vector<int> answers, std::vector<int> foils)
    : answers_(std::move(answers)), foils_(std::move(foils)) {
    check_ids(answers_, "answer");
    check_ids(foils_, "foil");
}

double LogitDiffMetric::value(const Tensor& logits) const {
    auto row = final_row(logits);
    double a = 0.0, f = 0.0;
    for (int id : answers_) a += row[static_cast<std::size_t>(id)];
    for (int id : foils_) f += row[static_cast<std::size_t>(id)];
    return a / static_cast<double>(answers_.size()) - f / static_cast<double>(foils_.size());
}

Tensor LogitDiffMetric::logits_grad(const Tensor& logits) const {
    Tensor g = Tensor::zeros_like(logits);
    const int last = logits.rows() - 1;
    for (int id : answers_) g(last, id) += 1.0 / static_cast<double>(answers_.size());
    for (int id : foils_) g(last, id) -= 1.0 / static_cast<double>(foils_.size());
    return g;
}

ProbDiffMetric::ProbDiffMetric(std::vector<int> answers, std::vector<int> foils)
    : answers_(std::move(answers)), foils_(std::move(foils)) {
    check_ids(answers_, "answer");
    check_ids(foils_, "foil");
}

double ProbDiffMetric::value(const Tensor& logits) const {
    auto row = final_row(logits);
    std::vector<double> p(row.size());
    softmax_row(row, p);
    double a = 0.0, f = 0.0;
    for (int id : answers_) a += p[static_cast<std::size_t>(id)];
    for (int id : foils_) f += p[static_cast<std::size_t>(id)];
    return a - f;
}

Tensor ProbDiffMetric::logits_grad(const Tensor& logits) const {
    auto row = final_row(logits);
    std::vector<double> p(row.size());
    softmax_row(row, p);
    std::vector<double> w(row.size(), 0.0);
    for (int id : answers_) w[static_cast<std::size_t>(id)] += 1.0;
    for (int id : foils_) w[static_cast<std::size_t>(id)] -= 1.0;
    double wp = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) wp += w[i] * p[i];
    Tensor g = Tensor::zeros_like(logits);
    const int last = logits.rows() - 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        g(last, static_cast<int>(i)) = p[i] * (w[i] - wp);
    }
    return g;
}

AnswerSetNll::AnswerSetNll(std::vector<int> answers) : answers_(std::move(answers)) {
    check_ids(answers_, "answer");
}

double AnswerSetNll::value(const Tensor& logits) const {
    auto row = final_row(logits);
    std::vector<double> lp(row.size());
    log_softmax_row(row, lp);
    double mx = -1e300;
    for (int id : answers_) mx = std::max(mx, lp[static_cast<std::size_t>(id)]);
    double s = 0.0;
    for (int id : answers_) s += std::exp(lp[static_cast<std::size_t>(id)] - mx);
    return -(mx + std::log(s));
}

Tensor AnswerSetNll::logits_grad(const Tensor& logits) const {
    auto row = final_row(logits);
    std::vector<double> p(row.size());
    softmax_row(row, p);
    double in_answer = 0.0;
    for (int id : answers_) in_answer += p[static_cast<std::size_t>(id)];
    Tensor g = Tensor::zeros_like(logits);
    const int last = logits.rows() - 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        g(last, static_cast<int>(i)) = p[i];
    }
    for (int id : answers_) {
        g(last, id) -= p[static_cast<std::size_t>(id)] / in_answer;
    }
    return g;
}

}  // namespace cstab
