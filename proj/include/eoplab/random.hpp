#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "eoplab/qmat.hpp"

namespace eoplab {

/// Derives an independent engine for (seed, stream). Streams are stable under
/// adding more streams, so budget-prefix properties hold.
inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    // splitmix64 of the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return std::mt19937_64(z ^ (z >> 31));
}

inline Eigen::MatrixXcd gaussian_complex(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

/// Haar-distributed unitary: QR of a standard complex Gaussian matrix with the
/// R diagonal phase-fixed.
inline Eigen::MatrixXcd haar_unitary(std::mt19937_64& rng, int dim) {
    const Eigen::MatrixXcd a = gaussian_complex(rng, dim, dim);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        const Complex d = r(j, j);
        q.col(j) *= (std::abs(d) > 0.0) ? d / std::abs(d) : 1.0;
    }
    return q;
}

inline PureState random_pure_state(std::mt19937_64& rng, const SpaceShape& shape) {
    Eigen::VectorXcd v = gaussian_complex(rng, shape.total_dim(), 1).col(0);
    v /= v.norm();
    return PureState(shape, std::move(v), Validate::trusted);
}

/// Hilbert-Schmidt random density matrix; rank 0 means full rank.
inline DensityMatrix random_density_matrix(std::mt19937_64& rng, const SpaceShape& shape,
                                           int rank = 0) {
    const int d = shape.total_dim();
    if (rank <= 0 || rank > d) rank = d;
    const Eigen::MatrixXcd g = gaussian_complex(rng, d, rank);
    Eigen::MatrixXcd m = g * g.adjoint();
    m /= m.trace().real();
    return DensityMatrix::trusted(shape, std::move(m));
}

/// Uniform (flat Dirichlet) probability vector of length n.
inline std::vector<double> random_distribution(std::mt19937_64& rng, int n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& v : p) s += (v = e(rng));
    for (auto& v : p) v /= s;
    return p;
}

}  // namespace eoplab
