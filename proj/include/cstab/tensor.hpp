#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cstab {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense row-major 2-D tensor of 64-bit floats. Everything in the engine
// (activations, parameters, gradients, logits) is a [rows, cols] matrix.
class Tensor {
public:
    Tensor() = default;
    Tensor(int rows, int cols, double fill = 0.0)
        : rows_(rows),
          cols_(cols),
          data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

    static Tensor zeros_like(const Tensor& t) { return Tensor(t.rows_, t.cols_); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t numel() const { return data_.size(); }
    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_str() const {
        return "[" + std::to_string(rows_) + "," + std::to_string(cols_) + "]";
    }

    double& operator()(int r, int c) {
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }
    double operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }
    std::span<double> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(int r) const { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    void add_(const Tensor& o) {
        check_same(o, "add");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    }
    void sub_(const Tensor& o) {
        check_same(o, "sub");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    }
    void scale_(double s) {
        for (double& v : data_) v *= s;
    }
    void fill_(double v) {
        for (double& x : data_) x = v;
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void check_same(const Tensor& o, const char* op) const {
        if (!same_shape(o)) {
            throw Error(std::string("tensor ") + op + ": shape mismatch " + shape_str() +
                        " vs " + o.shape_str());
        }
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// a[m,k] * b[k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
// a[k,m]^T * b[k,n] -> [m,n]
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// a[m,k] * b[n,k]^T -> [m,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// Sum over the elementwise product; shapes must match.
double dot_all(const Tensor& a, const Tensor& b);

// Frobenius norm of the difference.
double max_abs_diff(const Tensor& a, const Tensor& b);

// Numerically stable order-insensitive reduction: recursive pairwise sum.
double pairwise_sum(std::span<const double> v);

}  // namespace cstab
