#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "eoplab/errors.hpp"
#include "eoplab/shape.hpp"

namespace eoplab {

using Complex = std::complex<double>;

namespace tol {
inline constexpr double herm = 1e-8;    // hermiticity deviation accepted on ingestion
inline constexpr double trace = 1e-8;   // trace / norm deviation accepted on ingestion
inline constexpr double psd = 1e-9;     // eigenvalues in [-psd, 0] are clamped to 0
}  // namespace tol

namespace detail {

inline double max_abs(const Eigen::MatrixXcd& m) {
    return m.cwiseAbs().maxCoeff();
}

inline void check_hermitian(const Eigen::MatrixXcd& m, double tolerance, const char* who) {
    if (m.rows() != m.cols()) throw ShapeError(std::string(who) + ": matrix is not square");
    const double dev = max_abs(m - m.adjoint());
    if (dev > tolerance)
        throw InvalidInput(std::string(who) + ": hermiticity deviation " + std::to_string(dev));
}

/// Eigenvalues of a Hermitian matrix with tiny negatives clamped to zero.
/// Values below -tol::psd are reported via the second member.
inline std::pair<Eigen::VectorXd, double> clamped_spectrum(const Eigen::MatrixXcd& herm) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues();
    const double min_ev = ev.minCoeff();
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) < 0.0) ev(i) = 0.0;
    return {std::move(ev), min_ev};
}

}  // namespace detail

enum class Validate { full, trusted };

/// Positive semidefinite, unit-trace complex matrix on a labeled tensor
/// factorization. Entries are re-hermitized as (M + M†)/2 on construction.
class DensityMatrix {
public:
    DensityMatrix(SpaceShape shape, Eigen::MatrixXcd entries, Validate v = Validate::full)
        : shape_(std::move(shape)), m_(std::move(entries)) {
        if (m_.rows() != m_.cols() || m_.rows() != shape_.total_dim())
            throw ShapeError("DensityMatrix: entries are " + std::to_string(m_.rows()) + "x" +
                             std::to_string(m_.cols()) + " but shape is " + shape_.to_string());
        if (v == Validate::full) detail::check_hermitian(m_, tol::herm, "DensityMatrix");
        m_ = ((m_ + m_.adjoint()) / 2.0).eval();
        if (v == Validate::full) {
            const double tr = m_.trace().real();
            if (std::abs(tr - 1.0) > tol::trace)
                throw InvalidInput("DensityMatrix: trace " + std::to_string(tr));
            const double min_ev = detail::clamped_spectrum(m_).second;
            if (min_ev < -tol::psd)
                throw InvalidInput("DensityMatrix: eigenvalue " + std::to_string(min_ev));
        }
    }

    /// Skips the eigenvalue and trace checks; still re-hermitizes.
    static DensityMatrix trusted(SpaceShape shape, Eigen::MatrixXcd entries) {
        return DensityMatrix(std::move(shape), std::move(entries), Validate::trusted);
    }

    const SpaceShape& shape() const { return shape_; }
    const Eigen::MatrixXcd& entries() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    DensityMatrix relabeled(const std::vector<std::string>& labels) const {
        return DensityMatrix(shape_.relabeled(labels), m_, Validate::trusted);
    }

private:
    SpaceShape shape_;
    Eigen::MatrixXcd m_;
};

class PureState {
public:
    PureState(SpaceShape shape, Eigen::VectorXcd amplitudes, Validate v = Validate::full)
        : shape_(std::move(shape)), a_(std::move(amplitudes)) {
        if (a_.size() != shape_.total_dim())
            throw ShapeError("PureState: " + std::to_string(a_.size()) + " amplitudes for shape " +
                             shape_.to_string());
        if (v == Validate::full) {
            const double n = a_.norm();
            if (std::abs(n - 1.0) > tol::trace)
                throw InvalidInput("PureState: norm " + std::to_string(n));
        }
    }

    const SpaceShape& shape() const { return shape_; }
    const Eigen::VectorXcd& amplitudes() const { return a_; }
    int dim() const { return static_cast<int>(a_.size()); }

private:
    SpaceShape shape_;
    Eigen::VectorXcd a_;
};

inline DensityMatrix to_density(const PureState& u) {
    return DensityMatrix::trusted(u.shape(), u.amplitudes() * u.amplitudes().adjoint());
}

/// Hermitian square root of a PSD matrix; eigenvalues in [-tol::psd, 0] are
/// clamped to zero first. Input hermiticity is the caller's responsibility.
inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& herm) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline Eigen::MatrixXcd matrix_sqrt(const DensityMatrix& rho) {
    return psd_sqrt(rho.entries());
}

namespace detail {
inline void check_same_dim(const DensityMatrix& a, const DensityMatrix& b, const char* who) {
    if (a.dim() != b.dim())
        throw ShapeError(std::string(who) + ": dimensions " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
}
}  // namespace detail

/// Fidelity F(rho, sigma) = Tr |sqrt(rho) sqrt(sigma)|, clamped into [0, 1].
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    detail::check_same_dim(rho, sigma, "fidelity");
    const Eigen::MatrixXcd prod = matrix_sqrt(rho) * matrix_sqrt(sigma);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(prod);
    const double f = svd.singularValues().sum();
    return std::min(1.0, std::max(0.0, f));
}

/// Tr[sqrt(rho) sqrt(sigma)] without the absolute value; the weaker overlap
/// that upper-bounds F^2.
inline double sqrt_overlap(const DensityMatrix& rho, const DensityMatrix& sigma) {
    detail::check_same_dim(rho, sigma, "sqrt_overlap");
    return (matrix_sqrt(rho) * matrix_sqrt(sigma)).trace().real();
}

/// Trace-norm distance ||rho - sigma||_1.
inline double trace_norm_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    detail::check_same_dim(rho, sigma, "trace_norm_distance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries() - sigma.entries(),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

/// Shannon entropy in bits of a nonnegative vector (need not be normalized;
/// zero entries contribute zero).
inline double entropy_bits(const Eigen::VectorXd& p) {
    double h = 0.0;
    for (int i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) h -= p(i) * std::log2(p(i));
    return h;
}

/// Von Neumann entropy in bits, with eigenvalues clamped per tol::psd.
inline double von_neumann_entropy(const DensityMatrix& rho) {
    return entropy_bits(detail::clamped_spectrum(rho.entries()).first);
}

/// Entropy of a raw Hermitian PSD matrix (used on intermediate reductions).
inline double entropy_of_hermitian(const Eigen::MatrixXcd& herm) {
    return entropy_bits(detail::clamped_spectrum(herm).first);
}

namespace detail {

/// Partial trace over the complement of `keep` on raw entries. Kept factors
/// stay in their original order.
inline Eigen::MatrixXcd partial_trace_entries(const Eigen::MatrixXcd& m, const SpaceShape& shape,
                                              const std::vector<std::string>& keep) {
    const std::size_t nf = shape.num_factors();
    std::vector<bool> kept(nf, false);
    for (const auto& l : keep) kept[shape.position(l)] = true;

    const auto strides = shape.strides();
    int keep_dim = 1, trace_dim = 1;
    std::vector<int> keep_pos, trace_pos;
    for (std::size_t i = 0; i < nf; ++i) {
        if (kept[i]) {
            keep_dim *= shape.factor(i).dim;
            keep_pos.push_back(static_cast<int>(i));
        } else {
            trace_dim *= shape.factor(i).dim;
            trace_pos.push_back(static_cast<int>(i));
        }
    }

    // offset tables: composite kept / traced index -> full row-major offset
    auto offsets = [&](const std::vector<int>& pos, int total) {
        std::vector<int> off(total, 0);
        for (int c = 0; c < total; ++c) {
            int rem = c;
            for (int j = static_cast<int>(pos.size()) - 1; j >= 0; --j) {
                const int d = shape.factor(pos[j]).dim;
                off[c] += (rem % d) * strides[pos[j]];
                rem /= d;
            }
        }
        return off;
    };
    const auto keep_off = offsets(keep_pos, keep_dim);
    const auto trace_off = offsets(trace_pos, trace_dim);

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(keep_dim, keep_dim);
    for (int i = 0; i < keep_dim; ++i)
        for (int j = 0; j < keep_dim; ++j) {
            Complex s = 0.0;
            for (int t = 0; t < trace_dim; ++t)
                s += m(keep_off[i] + trace_off[t], keep_off[j] + trace_off[t]);
            out(i, j) = s;
        }
    return out;
}

}  // namespace detail

/// Trace out every factor not named in `keep`.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
    return DensityMatrix::trusted(rho.shape().subshape(keep),
                                  detail::partial_trace_entries(rho.entries(), rho.shape(), keep));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    const SpaceShape shape = a.shape().tensor_with(b.shape());
    Eigen::MatrixXcd out(shape.total_dim(), shape.total_dim());
    const int db = b.dim();
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            out.block(i * db, j * db, db, db) = a.entries()(i, j) * b.entries();
    return DensityMatrix::trusted(shape, std::move(out));
}

inline PureState tensor(const PureState& a, const PureState& b) {
    const SpaceShape shape = a.shape().tensor_with(b.shape());
    Eigen::VectorXcd out(shape.total_dim());
    for (int i = 0; i < a.dim(); ++i)
        out.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
    return PureState(shape, std::move(out), Validate::trusted);
}

/// Reorders tensor factors of a pure state into the given label order.
inline PureState permute_factors(const PureState& u, const std::vector<std::string>& order) {
    const SpaceShape& shape = u.shape();
    if (order.size() != shape.num_factors())
        throw ShapeError("permute_factors: expected " + std::to_string(shape.num_factors()) +
                         " labels");
    std::vector<Factor> new_factors;
    std::vector<std::size_t> src_pos;
    for (const auto& l : order) {
        src_pos.push_back(shape.position(l));
        new_factors.push_back(shape.factor(src_pos.back()));
    }
    SpaceShape new_shape(new_factors);
    const auto old_strides = shape.strides();
    const auto new_strides = new_shape.strides();
    Eigen::VectorXcd out(u.dim());
    for (int idx = 0; idx < u.dim(); ++idx) {
        int rem = idx, dst = 0;
        // idx decomposes row-major over the old factor order
        for (std::size_t f = 0; f < shape.num_factors(); ++f) {
            const int digit = rem / old_strides[f];
            rem %= old_strides[f];
            for (std::size_t g = 0; g < order.size(); ++g)
                if (src_pos[g] == f) dst += digit * new_strides[g];
        }
        out(dst) = u.amplitudes()(idx);
    }
    return PureState(std::move(new_shape), std::move(out), Validate::trusted);
}

/// Reduced density matrix of |u><u| keeping the named factors, computed
/// without forming the full projector. Kept factors stay in original order.
inline Eigen::MatrixXcd reduced_from_pure(const PureState& u,
                                          const std::vector<std::string>& keep) {
    const SpaceShape& shape = u.shape();
    std::vector<bool> kept(shape.num_factors(), false);
    for (const auto& l : keep) kept[shape.position(l)] = true;

    int keep_dim = 1, trace_dim = 1;
    for (std::size_t i = 0; i < shape.num_factors(); ++i)
        (kept[i] ? keep_dim : trace_dim) *= shape.factor(i).dim;

    Eigen::MatrixXcd k_mat(keep_dim, trace_dim);
    const auto strides = shape.strides();
    for (int idx = 0; idx < u.dim(); ++idx) {
        int rem = idx, ik = 0, it = 0;
        for (std::size_t f = 0; f < shape.num_factors(); ++f) {
            const int digit = rem / strides[f];
            rem %= strides[f];
            if (kept[f])
                ik = ik * shape.factor(f).dim + digit;
            else
                it = it * shape.factor(f).dim + digit;
        }
        k_mat(ik, it) = u.amplitudes()(idx);
    }
    return k_mat * k_mat.adjoint();
}

/// |Phi_L> = sum_k |kk> / sqrt(L) on labels a_label (x) b_label.
inline PureState max_entangled(int L, const std::string& a_label = "A",
                               const std::string& b_label = "B") {
    if (L < 1) throw InvalidConfig("max_entangled: L must be >= 1");
    SpaceShape shape({Factor{a_label, L}, Factor{b_label, L}});
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(L * L);
    for (int k = 0; k < L; ++k) amp(k * L + k) = 1.0 / std::sqrt(static_cast<double>(L));
    return PureState(std::move(shape), std::move(amp), Validate::trusted);
}

/// Computational basis state |k> on a single labeled factor.
inline PureState basis_state(int dim, int k, const std::string& label) {
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(dim);
    amp(k) = 1.0;
    return PureState(SpaceShape::single(label, dim), std::move(amp), Validate::trusted);
}

inline DensityMatrix maximally_mixed(int dim, const std::string& label) {
    return DensityMatrix::trusted(SpaceShape::single(label, dim),
                                  Eigen::MatrixXcd::Identity(dim, dim) / double(dim));
}

}  // namespace eoplab
