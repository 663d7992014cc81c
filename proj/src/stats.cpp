#include "cstab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cstab/tensor.hpp"

namespace cstab {

double jaccard(const std::vector<int>& e1, const std::vector<int>& e2) {
    if (e1.empty() && e2.empty()) {
        throw Error("jaccard: undefined for two empty sets");
    }
    std::size_t i = 0, j = 0, inter = 0;
    while (i < e1.size() && j < e2.size()) {
        if (e1[i] == e2[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (e1[i] < e2[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    const std::size_t uni = e1.size() + e2.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> JaccardMatrix::off_diagonal() const {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) out.push_back(at(i, j));
    }
    return out;
}

JaccardMatrix jaccard_matrix(std::span<const Circuit> circuits) {
    JaccardMatrix m;
    m.n = static_cast<int>(circuits.size());
    m.values.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
    for (int i = 0; i < m.n; ++i) {
        m.values[static_cast<std::size_t>(i) * m.n + i] = 1.0;
        for (int j = i + 1; j < m.n; ++j) {
            const double v = jaccard(circuits[static_cast<std::size_t>(i)].edge_ids,
                                     circuits[static_cast<std::size_t>(j)].edge_ids);
            m.values[static_cast<std::size_t>(i) * m.n + j] = v;
            m.values[static_cast<std::size_t>(j) * m.n + i] = v;
        }
    }
    return m;
}

SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) throw Error("summarize: empty input");
    SummaryStats s;
    s.mean = pairwise_sum(values) / static_cast<double>(values.size());
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - s.mean;
        sq[i] = d * d;
    }
    s.variance = pairwise_sum(sq) / static_cast<double>(values.size());
    if (s.mean != 0.0) s.cv = std::sqrt(s.variance) / s.mean;
    return s;
}

Circuit median_circuit(std::span<const Circuit> circuits) {
    if (circuits.empty()) throw Error("median_circuit: empty input");
    std::map<int, std::size_t> counts;
    for (const Circuit& c : circuits) {
        for (int e : c.edge_ids) ++counts[e];
    }
    Circuit out;
    out.dag_hash = circuits[0].dag_hash;
    for (const auto& [edge, count] : counts) {
        if (2 * count > circuits.size()) out.edge_ids.push_back(edge);
    }
    return out;
}

Circuit union_circuit(std::span<const Circuit> circuits) {
    if (circuits.empty()) throw Error("union_circuit: empty input");
    std::vector<int> all;
    for (const Circuit& c : circuits) {
        all.insert(all.end(), c.edge_ids.begin(), c.edge_ids.end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    Circuit out;
    out.dag_hash = circuits[0].dag_hash;
    out.edge_ids = std::move(all);
    return out;
}

void jacobi_eigen(const std::vector<double>& sym, int n, std::vector<double>& eigenvalues,
                  std::vector<double>& eigenvectors) {
    std::vector<double> a = sym;
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
    auto A = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * n + c]; };
    auto V = [&](int r, int c) -> double& { return v[static_cast<std::size_t>(r) * n + c]; };

    double norm = 0.0;
    for (double x : a) norm += x * x;
    norm = std::sqrt(norm);
    const double tol = std::max(1e-14 * norm, 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        }
        if (std::sqrt(2.0 * off) <= tol) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (A(p, q) == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return A(x, x) > A(y, y); });
    eigenvalues.assign(static_cast<std::size_t>(n), 0.0);
    eigenvectors.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int c = 0; c < n; ++c) {
        eigenvalues[static_cast<std::size_t>(c)] = A(order[static_cast<std::size_t>(c)],
                                                     order[static_cast<std::size_t>(c)]);
        for (int r = 0; r < n; ++r) {
            eigenvectors[static_cast<std::size_t>(r) * n + c] =
                V(r, order[static_cast<std::size_t>(c)]);
        }
    }
}

MdsEmbedding classical_mds(const std::vector<double>& distances, int n, int dim) {
    if (n < 2) throw Error("classical_mds: need at least 2 points");
    if (distances.size() != static_cast<std::size_t>(n) * n) {
        throw Error("classical_mds: matrix size mismatch");
    }
    auto D = [&](int i, int j) { return distances[static_cast<std::size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i) {
        if (D(i, i) != 0.0) throw Error("classical_mds: nonzero diagonal");
        for (int j = 0; j < n; ++j) {
            if (D(i, j) < 0.0) throw Error("classical_mds: negative distance");
            if (std::abs(D(i, j) - D(j, i)) > 1e-12) throw Error("classical_mds: asymmetric input");
        }
    }

    // B = -1/2 J D^2 J via explicit centering terms
    std::vector<double> d2(distances.size());
    for (std::size_t i = 0; i < distances.size(); ++i) d2[i] = distances[i] * distances[i];
    std::vector<double> row_mean(static_cast<std::size_t>(n), 0.0);
    double grand = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) row_mean[static_cast<std::size_t>(i)] += d2[static_cast<std::size_t>(i) * n + j];
        row_mean[static_cast<std::size_t>(i)] /= n;
        grand += row_mean[static_cast<std::size_t>(i)];
    }
    grand /= n;
    std::vector<double> b(distances.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            b[static_cast<std::size_t>(i) * n + j] =
                -0.5 * (d2[static_cast<std::size_t>(i) * n + j] - row_mean[static_cast<std::size_t>(i)] -
                        row_mean[static_cast<std::size_t>(j)] + grand);
        }
    }

    std::vector<double> eigval, eigvec;
    jacobi_eigen(b, n, eigval, eigvec);

    MdsEmbedding emb;
    emb.n = n;
    emb.dim = dim;
    emb.coords.assign(static_cast<std::size_t>(n) * dim, 0.0);
    for (int k = 0; k < dim && k < n; ++k) {
        const double lambda = std::max(eigval[static_cast<std::size_t>(k)], 0.0);
        const double scale = std::sqrt(lambda);
        for (int i = 0; i < n; ++i) {
            emb.coords[static_cast<std::size_t>(i) * dim + k] =
                scale * eigvec[static_cast<std::size_t>(i) * n + k];
        }
    }

    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double dhat2 = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double d = emb.coords[static_cast<std::size_t>(i) * dim + k] -
                                 emb.coords[static_cast<std::size_t>(j) * dim + k];
                dhat2 += d * d;
            }
            const double diff = D(i, j) - std::sqrt(dhat2);
            num += diff * diff;
            den += D(i, j) * D(i, j);
        }
    }
    emb.stress = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return emb;
}

}  // namespace cstab
