#pragma once

// Brute-force verifiers. Everything here recomputes from scratch with its own
// matrix routines (cyclic Jacobi eigensolver, Gram-Schmidt Haar sampling,
// explicit index sums); the main modules are only touched through scalar
// element access, so agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "eoplab/channels.hpp"
#include "eoplab/opt_types.hpp"
#include "eoplab/qmat.hpp"

namespace eoplab::oracle {

struct SearchBudget {
    int samples = 1000;
    std::uint64_t seed = 0;
};

namespace detail {

using Cx = std::complex<double>;

/// Dense column-major complex matrix with hand-rolled arithmetic.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<Cx> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, Cx(0.0)) {}
    Cx& at(int i, int j) { return a[static_cast<std::size_t>(j) * rows + i]; }
    const Cx& at(int i, int j) const { return a[static_cast<std::size_t>(j) * rows + i]; }
};

inline Mat mul(const Mat& x, const Mat& y) {
    Mat z(x.rows, y.cols);
    for (int j = 0; j < y.cols; ++j)
        for (int k = 0; k < x.cols; ++k) {
            const Cx yk = y.at(k, j);
            if (yk == Cx(0.0)) continue;
            for (int i = 0; i < x.rows; ++i) z.at(i, j) += x.at(i, k) * yk;
        }
    return z;
}

inline Mat dagger(const Mat& x) {
    Mat z(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) z.at(j, i) = std::conj(x.at(i, j));
    return z;
}

struct EigResult {
    std::vector<double> values;  // descending
    Mat vectors;                 // column k belongs to values[k]
};

/// Cyclic Jacobi diagonalization of a Hermitian matrix via exact 2x2
/// eigensolves. Adequate for the desk-scale dimensions used here.
inline EigResult jacobi_hermitian(Mat m) {
    const int n = m.rows;
    Mat v(n, n);
    for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;

    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(m.at(i, i)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(m.at(i, j)));
    if (scale == 0.0) scale = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(m.at(p, q));
        if (std::sqrt(off) < 1e-14 * scale * n) break;

        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const Cx apq = m.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = m.at(p, p).real(), aqq = m.at(q, q).real();
                const double half_diff = (app - aqq) / 2.0;
                const double radius = std::sqrt(half_diff * half_diff + std::norm(apq));
                const double mu = (app + aqq) / 2.0 + (half_diff >= 0 ? radius : -radius);
                // eigenvector of [[app, apq], [conj(apq), aqq]] for eigenvalue mu
                Cx c = apq, s = Cx(mu - app);
                const double norm2 = std::sqrt(std::norm(c) + std::norm(s));
                if (norm2 < 1e-300) continue;
                c /= norm2;
                s /= norm2;
                // G columns: (c, s) and (-conj(s), conj(c)); apply m <- G' m G
                for (int i = 0; i < n; ++i) {
                    const Cx mip = m.at(i, p), miq = m.at(i, q);
                    m.at(i, p) = mip * c + miq * s;
                    m.at(i, q) = -mip * std::conj(s) + miq * std::conj(c);
                }
                for (int i = 0; i < n; ++i) {
                    const Cx mpi = m.at(p, i), mqi = m.at(q, i);
                    m.at(p, i) = std::conj(c) * mpi + std::conj(s) * mqi;
                    m.at(q, i) = -s * mpi + c * mqi;
                }
                for (int i = 0; i < n; ++i) {
                    const Cx vip = v.at(i, p), viq = v.at(i, q);
                    v.at(i, p) = vip * c + viq * s;
                    v.at(i, q) = -vip * std::conj(s) + viq * std::conj(c);
                }
            }
    }

    EigResult r;
    r.values.resize(n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = m.at(i, i).real();
    std::sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] > diag[b]; });
    r.vectors = Mat(n, n);
    for (int k = 0; k < n; ++k) {
        r.values[k] = diag[order[k]];
        for (int i = 0; i < n; ++i) r.vectors.at(i, k) = v.at(i, order[k]);
    }
    return r;
}

/// Haar unitary from modified Gram-Schmidt on a complex Gaussian matrix; the
/// implicit R diagonal is positive, so no phase fix is needed.
inline Mat haar_mgs(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat u(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) u.at(i, j) = Cx(g(rng), g(rng));
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < j; ++k) {
            Cx proj(0.0);
            for (int i = 0; i < n; ++i) proj += std::conj(u.at(i, k)) * u.at(i, j);
            for (int i = 0; i < n; ++i) u.at(i, j) -= proj * u.at(i, k);
        }
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) norm2 += std::norm(u.at(i, j));
        const double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < n; ++i) u.at(i, j) *= inv;
    }
    return u;
}

inline double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

}  // namespace detail

/// Minimum of the purification-entropy objective over Haar-random ancilla
/// unitaries. No descent is performed, so the value upper-bounds the true
/// entanglement of purification and lower-bounds nothing; its role is to
/// dominate the optimizer from above.
inline double eop_random_search(const DensityMatrix& rho, const Cut& cut,
                                const SearchBudget& budget) {
    const ResolvedCut rc = resolve_cut(rho.shape(), cut);
    const int d = rho.dim();
    const int d_anc = rc.a2_dim * rc.b2_dim;

    detail::Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.at(i, j) = rho.entries()(i, j);
    const detail::EigResult eig = detail::jacobi_hermitian(m);

    int rank = 0;
    while (rank < d && eig.values[rank] > tol::psd) ++rank;
    if (d_anc < rank) throw InvalidConfig("eop_random_search: ancilla smaller than rank");

    // canonical purification, system index by rows, ancilla index by columns
    detail::Mat psi0(d, d_anc);
    for (int k = 0; k < rank; ++k) {
        const double w = std::sqrt(eig.values[k]);
        for (int i = 0; i < d; ++i) psi0.at(i, k) = w * eig.vectors.at(i, k);
    }

    // composite A-side / B-side digits of each system index
    const SpaceShape& shape = rho.shape();
    const auto strides = shape.strides();
    std::vector<int> ka(d, 0), tb(d, 0);
    std::vector<bool> on_a(shape.num_factors(), false);
    for (const auto& l : rc.a_labels) on_a[shape.position(l)] = true;
    for (int s = 0; s < d; ++s) {
        int rem = s;
        for (std::size_t f = 0; f < shape.num_factors(); ++f) {
            const int digit = rem / strides[f];
            rem %= strides[f];
            if (on_a[f])
                ka[s] = ka[s] * shape.factor(f).dim + digit;
            else
                tb[s] = tb[s] * shape.factor(f).dim + digit;
        }
    }
    const int keep_dim = rc.a_dim * rc.a2_dim;
    const int trace_dim = rc.b_dim * rc.b2_dim;

    std::mt19937_64 rng = seeded_engine(budget.seed, 0x0eac1e);
    double best = std::numeric_limits<double>::infinity();
    for (int sample = 0; sample < budget.samples; ++sample) {
        const detail::Mat u = detail::haar_mgs(rng, d_anc);
        // w = psi0 * u^T restricted to the first `rank` columns of psi0
        detail::Mat k_mat(keep_dim, trace_dim);
        for (int s = 0; s < d; ++s)
            for (int r = 0; r < d_anc; ++r) {
                detail::Cx w(0.0);
                for (int k = 0; k < rank; ++k) w += psi0.at(s, k) * u.at(r, k);
                const int row = ka[s] * rc.a2_dim + r / rc.b2_dim;
                const int col = tb[s] * rc.b2_dim + r % rc.b2_dim;
                k_mat.at(row, col) += w;
            }
        const detail::Mat red = detail::mul(k_mat, detail::dagger(k_mat));
        std::vector<double> spec = detail::jacobi_hermitian(red).values;
        for (double& v : spec)
            if (v < 0.0) v = 0.0;
        best = std::min(best, detail::entropy_bits(spec));
    }
    return best;
}

/// Brute-force value for rho = sum_i p_i |ii><ii| with the reference attached
/// entirely to the A side; the certifying purification pins the result at the
/// Shannon entropy of p.
inline double classical_correlated_reference(const std::vector<double>& p,
                                             const SearchBudget& budget) {
    const int d = static_cast<int>(p.size());
    double sum = 0.0;
    for (double v : p) {
        if (v < -1e-12) throw InvalidInput("classical_correlated_reference: negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw InvalidInput("classical_correlated_reference: probabilities sum to " +
                           std::to_string(sum));

    Eigen::MatrixXcd entries = Eigen::MatrixXcd::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i) entries(i * d + i, i * d + i) = p[i];
    const DensityMatrix rho(SpaceShape({Factor{"A", d}, Factor{"B", d}}), std::move(entries));
    return eop_random_search(rho, Cut{{"A"}, {"B"}, d, 1}, budget);
}

/// Recomputes apply_locc by explicit index summation and returns the largest
/// entrywise deviation from the channels-module result.
inline double crosscheck_channel(const OneWayLOCC& locc, const DensityMatrix& rho,
                                 const SearchBudget& /*budget*/) {
    const DensityMatrix fast = apply_locc(locc, rho);

    const int a_in = locc.a_instrument().in_shape().total_dim();
    const int b_in = locc.b_maps()[0].in_shape().total_dim();
    const int a_out = locc.a_instrument().out_shape().total_dim();
    const int b_out = locc.b_maps()[0].out_shape().total_dim();
    const int d_out = a_out * b_out;

    std::vector<detail::Cx> out(static_cast<std::size_t>(d_out) * d_out, detail::Cx(0.0));
    for (std::size_t i = 0; i < locc.a_instrument().num_branches(); ++i)
        for (const auto& ka : locc.a_instrument().branches()[i].kraus())
            for (const auto& kb : locc.b_maps()[i].kraus())
                for (int ao = 0; ao < a_out; ++ao)
                    for (int bo = 0; bo < b_out; ++bo)
                        for (int ap = 0; ap < a_out; ++ap)
                            for (int bp = 0; bp < b_out; ++bp) {
                                detail::Cx s(0.0);
                                for (int ai = 0; ai < a_in; ++ai)
                                    for (int bi = 0; bi < b_in; ++bi)
                                        for (int aj = 0; aj < a_in; ++aj)
                                            for (int bj = 0; bj < b_in; ++bj)
                                                s += ka(ao, ai) * kb(bo, bi) *
                                                     rho.entries()(ai * b_in + bi,
                                                                   aj * b_in + bj) *
                                                     std::conj(ka(ap, aj)) *
                                                     std::conj(kb(bp, bj));
                                out[static_cast<std::size_t>(ao * b_out + bo) * d_out +
                                    (ap * b_out + bp)] += s;
                            }

    double dev = 0.0;
    for (int i = 0; i < d_out; ++i)
        for (int j = 0; j < d_out; ++j)
            dev = std::max(dev,
                           std::abs(out[static_cast<std::size_t>(i) * d_out + j] -
                                    fast.entries()(i, j)));
    return dev;
}

}  // namespace eoplab::oracle
