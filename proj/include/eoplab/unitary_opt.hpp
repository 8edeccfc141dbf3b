#pragma once

#include <cmath>
#include <deque>
#include <vector>

#include "eoplab/opt_types.hpp"
#include "eoplab/random.hpp"

namespace eoplab {

// Local minimization over products of unitary groups U(d_1) x ... x U(d_m).
// A Problem supplies
//   double objective(const std::vector<Eigen::MatrixXcd>& us)
//   std::vector<DescentDirection> descent_direction(const std::vector<Eigen::MatrixXcd>& us)
// where each direction Omega_b is anti-Hermitian and the first-order change of
// the objective along U_b(t) = exp(t Omega_b) U_b is -sum_b ||Omega_b||_F^2.
// Updates use the exponential map, evaluated on the invariant subspace spanned
// by the direction; problems that know a small spanning set for range(Omega)
// can pass it to keep the per-step eigensolve at that size.

struct DescentDirection {
    Eigen::MatrixXcd omega;             // anti-Hermitian step generator
    Eigen::MatrixXcd range_candidates;  // optional columns spanning range(omega)
};

namespace detail {

struct BlockStep {
    Eigen::MatrixXcd basis;          // d x k, orthonormal columns spanning range(Omega)
    Eigen::MatrixXcd small_vectors;  // k x k eigenvectors of the compressed generator
    Eigen::VectorXd small_angles;    // k eigenvalues of -i * compressed generator
    Eigen::MatrixXcd basis_times_u;  // k x d, cached basis' * U

    bool empty() const { return basis.cols() == 0; }

    Eigen::MatrixXcd core(double t) const {
        Eigen::VectorXcd phases(small_angles.size());
        for (int i = 0; i < small_angles.size(); ++i)
            phases(i) = std::exp(Complex(0.0, t * small_angles(i)));
        return small_vectors * (phases.asDiagonal() * small_vectors.adjoint()) -
               Eigen::MatrixXcd::Identity(basis.cols(), basis.cols());
    }

    /// exp(t Omega) U without touching the orthogonal complement.
    Eigen::MatrixXcd advance(double t, const Eigen::MatrixXcd& u) const {
        if (empty()) return u;
        return u + basis * (core(t) * basis_times_u);
    }

    /// Leading columns of exp(t Omega) U; objectives that read only a few
    /// columns get line-search candidates at that cost.
    Eigen::MatrixXcd advance_cols(double t, const Eigen::MatrixXcd& u, int ncols) const {
        if (empty()) return u.leftCols(ncols);
        return u.leftCols(ncols) + basis * (core(t) * basis_times_u.leftCols(ncols));
    }
};

inline BlockStep prepare_step(const DescentDirection& dir, const Eigen::MatrixXcd& u) {
    BlockStep step;
    const int d = static_cast<int>(dir.omega.rows());
    const bool hinted = dir.range_candidates.cols() > 0 && dir.range_candidates.cols() < d;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(hinted ? dir.range_candidates : dir.omega);
    const Eigen::MatrixXcd r = qr.matrixR().triangularView<Eigen::Upper>();
    const double head = std::abs(r(0, 0));
    if (head == 0.0) return step;
    int rank = 0;
    const int max_rank = static_cast<int>(std::min(r.rows(), r.cols()));
    while (rank < max_rank && std::abs(r(rank, rank)) > 1e-14 * head) ++rank;
    step.basis = qr.householderQ() * Eigen::MatrixXcd::Identity(d, rank);
    // projected generator is exactly anti-Hermitian, so the step is unitary
    const Eigen::MatrixXcd compressed = step.basis.adjoint() * dir.omega * step.basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        Eigen::MatrixXcd(Complex(0.0, -1.0) * compressed));
    step.small_vectors = es.eigenvectors();
    step.small_angles = es.eigenvalues();
    step.basis_times_u = step.basis.adjoint() * u;
    return step;
}

inline Eigen::MatrixXcd random_antihermitian(std::mt19937_64& rng, int dim) {
    const Eigen::MatrixXcd g = gaussian_complex(rng, dim, dim);
    Eigen::MatrixXcd omega = (g - g.adjoint()) / 2.0;
    const double n = omega.norm();
    if (n > 0.0) omega /= n;
    return omega;
}

inline Eigen::MatrixXcd closest_unitary(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace detail

struct DescentOutcome {
    double value = 0.0;
    std::vector<Eigen::MatrixXcd> us;
    bool converged = false;
    int iterations = 0;
};

template <class Problem>
DescentOutcome descend_from(const Problem& prob, std::vector<Eigen::MatrixXcd> us,
                            const OptimizerConfig& cfg, std::mt19937_64& rng) {
    constexpr double armijo = 1e-4;
    constexpr int window = 20;

    double f = prob.objective(us);
    DescentOutcome out{f, us, false, 0};
    std::deque<double> history{f};
    double t_prev = 1.0;
    bool perturbed_since_accept = false;

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        out.iterations = iter + 1;
        const std::vector<DescentDirection> dirs = prob.descent_direction(us);
        double g2 = 0.0;
        for (const auto& d : dirs) g2 += d.omega.squaredNorm();
        if (g2 < 1e-24) {
            out.converged = true;
            break;
        }

        std::vector<detail::BlockStep> steps(dirs.size());
        for (std::size_t b = 0; b < dirs.size(); ++b)
            steps[b] = detail::prepare_step(dirs[b], us[b]);

        const double t_cap = 16.0 / std::sqrt(g2);
        double t = std::min(2.0 * t_prev, t_cap);
        bool accepted = false;
        for (int backtrack = 0; backtrack < 60 && t > 1e-16 * t_cap; ++backtrack, t *= 0.5) {
            std::vector<Eigen::MatrixXcd> trial(us.size());
            for (std::size_t b = 0; b < us.size(); ++b)
                trial[b] = steps[b].advance_cols(t, us[b], prob.needed_cols(b));
            const double ft = prob.objective(trial);
            if (ft <= f - armijo * t * g2) {
                for (std::size_t b = 0; b < us.size(); ++b) us[b] = steps[b].advance(t, us[b]);
                f = ft;
                t_prev = t;
                accepted = true;
                perturbed_since_accept = false;
                break;
            }
        }

        if (!accepted) {
            if (perturbed_since_accept) {
                out.converged = true;  // stationary within line-search resolution
                break;
            }
            // spectral crossings can zero out the subgradient step; kick off the
            // crossing and retry
            for (auto& u : us) {
                const int d = static_cast<int>(u.rows());
                const DescentDirection kick{1e-7 * detail::random_antihermitian(rng, d), {}};
                u = detail::prepare_step(kick, u).advance(1.0, u);
            }
            f = prob.objective(us);
            perturbed_since_accept = true;
        }

        if (f < out.value) {
            out.value = f;
            out.us = us;
        }
        history.push_back(f);
        if (static_cast<int>(history.size()) > window + 1) history.pop_front();
        if (static_cast<int>(history.size()) == window + 1 && history.front() - f < cfg.tol) {
            out.converged = true;
            break;
        }
        if ((iter + 1) % 64 == 0)
            for (auto& u : us) u = detail::closest_unitary(u);
    }

    if (f < out.value) {
        out.value = f;
        out.us = us;
    }
    return out;
}

/// Runs descent from each start and keeps the best local minimum. Start list
/// order is significant: results are monotone in any prefix of the list.
template <class Problem>
DescentOutcome multistart_minimize(const Problem& prob,
                                   const std::vector<std::vector<Eigen::MatrixXcd>>& starts,
                                   const OptimizerConfig& cfg) {
    DescentOutcome best;
    bool first = true;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        std::mt19937_64 rng = seeded_engine(cfg.seed, 1000 + i);
        DescentOutcome run = descend_from(prob, starts[i], cfg, rng);
        if (first || run.value < best.value) {
            best = std::move(run);
            first = false;
        }
    }
    return best;
}

}  // namespace eoplab
