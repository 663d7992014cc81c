#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cstab/graph.hpp"

namespace cstab {

// |E1 ∩ E2| / |E1 ∪ E2| over sorted edge-id sets. Both empty is undefined.
double jaccard(const std::vector<int>& e1, const std::vector<int>& e2);

// Symmetric matrix of pairwise Jaccard indices, unit diagonal.
struct JaccardMatrix {
    int n = 0;
    std::vector<double> values;  // row-major n*n

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
    // Strict upper triangle, row-major order.
    std::vector<double> off_diagonal() const;
};

JaccardMatrix jaccard_matrix(std::span<const Circuit> circuits);

struct SummaryStats {
    double mean = 0.0;
    double variance = 0.0;           // population variance
    std::optional<double> cv;        // sigma/mean; undefined when mean == 0
};

SummaryStats summarize(std::span<const double> values);

// Edge kept iff present in strictly more than half of the circuits.
Circuit median_circuit(std::span<const Circuit> circuits);
Circuit union_circuit(std::span<const Circuit> circuits);

struct MdsEmbedding {
    int n = 0;
    std::vector<double> coords;  // n x dim, row-major, column means 0
    double stress = 0.0;         // ||D - D_hat||_F / ||D||_F

    double at(int i, int k) const { return coords[static_cast<std::size_t>(i) * dim + k]; }
    int dim = 2;
};

// Classical (Torgerson) MDS: square, double-center, top-dim eigenpairs of a
// cyclic-Jacobi eigendecomposition; negative eigenvalues clamp to zero.
// distances is a symmetric n x n matrix with zero diagonal and nonnegative
// entries (1 - Jaccard upstream).
MdsEmbedding classical_mds(const std::vector<double>& distances, int n, int dim = 2);

// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns
// eigenvalues descending with matching column eigenvectors.
void jacobi_eigen(const std::vector<double>& sym, int n, std::vector<double>& eigenvalues,
                  std::vector<double>& eigenvectors);

}  // namespace cstab
