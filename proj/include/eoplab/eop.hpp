#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eoplab/channels.hpp"
#include "eoplab/opt_types.hpp"
#include "eoplab/oracle.hpp"
#include "eoplab/qmat.hpp"
#include "eoplab/unitary_opt.hpp"

namespace eoplab {

/// Largest purification vector the dense solver will attempt.
inline constexpr int kMaxPurificationDim = 1 << 15;

struct EopResult {
    double value_bits = 0.0;  // optimizer upper bound on E_p
    Eigen::VectorXd argmin;   // packed anti-Hermitian generator of the ancilla unitary
    int restarts_used = 0;
    OptStatus status = OptStatus::budget_exhausted;
    bool upper_bound = true;  // multistart local descent never certifies the infimum
};

/// Packs an anti-Hermitian generator G (with U = exp(G)) into d^2 reals:
/// the imaginary diagonal first, then (re, im) of the strict upper triangle.
inline Eigen::VectorXd pack_unitary(const Eigen::MatrixXcd& u) {
    const int d = static_cast<int>(u.rows());
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u);
    Eigen::VectorXcd log_diag(d);
    for (int i = 0; i < d; ++i) {
        const Complex t = schur.matrixT()(i, i);
        log_diag(i) = Complex(0.0, std::atan2(t.imag(), t.real()));
    }
    // unitary matrices are normal, so T is diagonal and Q holds eigenvectors
    const Eigen::MatrixXcd g =
        schur.matrixU() * log_diag.asDiagonal() * schur.matrixU().adjoint();
    Eigen::VectorXd params(d * d);
    int idx = 0;
    for (int i = 0; i < d; ++i) params(idx++) = g(i, i).imag();
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            params(idx++) = g(i, j).real();
            params(idx++) = g(i, j).imag();
        }
    return params;
}

inline Eigen::MatrixXcd unpack_unitary(const Eigen::VectorXd& params, int dim) {
    if (params.size() != dim * dim)
        throw InvalidConfig("unpack_unitary: parameter count does not match dimension");
    Eigen::MatrixXcd g(dim, dim);
    int idx = 0;
    for (int i = 0; i < dim; ++i) g(i, i) = Complex(0.0, params(idx++));
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const double re = params(idx++), im = params(idx++);
            g(i, j) = Complex(re, im);
            g(j, i) = Complex(-re, im);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(Complex(0.0, -1.0) * g));
    Eigen::VectorXcd phases(dim);
    for (int i = 0; i < dim; ++i) phases(i) = std::exp(Complex(0.0, es.eigenvalues()(i)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Purification-entropy objective for one state and cut. All purifications
/// with the chosen reference dimensions are (I (x) U)|psi0> for the canonical
/// eigendecomposition purification |psi0>, so the feasible set is exactly the
/// ancilla unitary group.
class PurificationProblem {
public:
    PurificationProblem(const DensityMatrix& rho, const ResolvedCut& cut)
        : shape_(rho.shape()), cut_(cut), d_sys_(rho.dim()),
          d_anc_(cut.a2_dim * cut.b2_dim) {
        if (static_cast<long long>(d_sys_) * d_anc_ > kMaxPurificationDim)
            throw ResourceError("purification vector dimension " +
                                std::to_string(static_cast<long long>(d_sys_) * d_anc_) +
                                " exceeds the dense budget");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries());
        rank_ = 0;
        for (int i = d_sys_ - 1; i >= 0 && es.eigenvalues()(i) > tol::psd; --i) ++rank_;
        if (rank_ == 0) rank_ = 1;
        if (d_anc_ < rank_)
            throw InvalidConfig("ancilla dimension " + std::to_string(d_anc_) +
                                " is smaller than the state rank " + std::to_string(rank_));
        eigenvalues_.resize(rank_);
        m0_ = Eigen::MatrixXcd::Zero(d_sys_, rank_);
        for (int k = 0; k < rank_; ++k) {  // descending order
            const int src = d_sys_ - 1 - k;
            const double ev = std::max(0.0, es.eigenvalues()(src));
            eigenvalues_(k) = ev;
            m0_.col(k) = std::sqrt(ev) * es.eigenvectors().col(src);
        }

        // composite A-side / B-side digit of every system index
        const auto strides = shape_.strides();
        std::vector<bool> on_a(shape_.num_factors(), false);
        for (const auto& l : cut_.a_labels) on_a[shape_.position(l)] = true;
        ka_.resize(d_sys_);
        tb_.resize(d_sys_);
        for (int s = 0; s < d_sys_; ++s) {
            int rem = s, a = 0, b = 0;
            for (std::size_t f = 0; f < shape_.num_factors(); ++f) {
                const int digit = rem / strides[f];
                rem %= strides[f];
                if (on_a[f])
                    a = a * shape_.factor(f).dim + digit;
                else
                    b = b * shape_.factor(f).dim + digit;
            }
            ka_[s] = a;
            tb_[s] = b;
        }
    }

    int anc_dim() const { return d_anc_; }
    int rank() const { return rank_; }
    const ResolvedCut& cut() const { return cut_; }
    int needed_cols(std::size_t) const { return rank_; }  // objective reads U's first rank columns

    double objective(const std::vector<Eigen::MatrixXcd>& us) const {
        return entropy_of_hermitian(reduced(us[0]));
    }

    std::vector<DescentDirection> descent_direction(const std::vector<Eigen::MatrixXcd>& us) const {
        const Eigen::MatrixXcd& u = us[0];
        const Eigen::MatrixXcd w = m0_ * u.leftCols(rank_).transpose();
        const Eigen::MatrixXcd k_mat = scatter(w);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k_mat * k_mat.adjoint());
        Eigen::VectorXd weights = es.eigenvalues();
        for (int i = 0; i < weights.size(); ++i)
            weights(i) = weights(i) > 1e-12 ? -std::log2(weights(i)) : 0.0;
        const Eigen::MatrixXcd m_log =
            es.eigenvectors() * weights.asDiagonal() * es.eigenvectors().adjoint();

        const Eigen::MatrixXcd g_k = m_log * k_mat;
        Eigen::MatrixXcd g_w(d_sys_, d_anc_);
        for (int s = 0; s < d_sys_; ++s)
            for (int r = 0; r < d_anc_; ++r)
                g_w(s, r) = g_k(ka_[s] * cut_.a2_dim + r / cut_.b2_dim,
                                tb_[s] * cut_.b2_dim + r % cut_.b2_dim);

        const Eigen::MatrixXcd c_sub = (g_w.adjoint() * m0_).transpose();  // rank x d_anc
        const Eigen::MatrixXcd z = u.leftCols(rank_) * c_sub;
        // range(z - z') sits inside span[U_(:,1:rank), C'], which stays small
        // when the ancilla is much larger than the state rank
        Eigen::MatrixXcd candidates(d_anc_, 2 * rank_);
        candidates.leftCols(rank_) = u.leftCols(rank_);
        candidates.rightCols(rank_) = c_sub.adjoint();
        return {DescentDirection{z - z.adjoint(), std::move(candidates)}};
    }

    /// (I (x) U)|psi0> on shape [state factors..., A2, B2].
    PureState purification(const Eigen::MatrixXcd& u, const std::string& a2_label = "A2",
                           const std::string& b2_label = "B2") const {
        const Eigen::MatrixXcd w = m0_ * u.leftCols(rank_).transpose();
        SpaceShape shape = shape_.tensor_with(SpaceShape(
            {Factor{a2_label, cut_.a2_dim}, Factor{b2_label, cut_.b2_dim}}));
        Eigen::VectorXcd amp(d_sys_ * d_anc_);
        for (int s = 0; s < d_sys_; ++s)
            for (int r = 0; r < d_anc_; ++r) amp(s * d_anc_ + r) = w(s, r);
        return PureState(std::move(shape), std::move(amp), Validate::trusted);
    }

    /// Canonical start; the reference sits in B2 when the rank fits there, so
    /// the objective starts at H(rho^A).
    Eigen::MatrixXcd identity_start() const {
        return Eigen::MatrixXcd::Identity(d_anc_, d_anc_);
    }

    /// Permutation routing the reference into A2, giving H(rho^B) when the
    /// rank fits in A2.
    Eigen::MatrixXcd a2_side_start() const {
        std::vector<bool> used(d_anc_, false);
        std::vector<int> target(d_anc_, -1);
        for (int k = 0; k < cut_.a2_dim; ++k) {
            target[k] = k * cut_.b2_dim;
            used[k * cut_.b2_dim] = true;
        }
        int next = 0;
        for (int k = 0; k < d_anc_; ++k) {
            if (target[k] >= 0) continue;
            while (used[next]) ++next;
            target[k] = next;
            used[next] = true;
        }
        Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d_anc_, d_anc_);
        for (int k = 0; k < d_anc_; ++k) u(target[k], k) = 1.0;
        return u;
    }

    /// U with (I (x) U)|psi0> equal to the given purification of the same
    /// state (as a d_sys x d_anc amplitude matrix, ancilla index fastest).
    Eigen::MatrixXcd aligning_unitary(const Eigen::MatrixXcd& target) const {
        if (target.rows() != d_sys_ || target.cols() != d_anc_)
            throw ShapeError("aligning_unitary: target amplitude matrix has wrong dimensions");
        Eigen::MatrixXcd ut = Eigen::MatrixXcd::Zero(d_anc_, d_anc_);  // rows of U^T
        for (int k = 0; k < rank_; ++k)
            ut.row(k) = m0_.col(k).adjoint() * target / eigenvalues_(k);
        if (rank_ < d_anc_) {
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ut.topRows(rank_).adjoint());
            const Eigen::MatrixXcd q = qr.householderQ();
            ut.bottomRows(d_anc_ - rank_) = q.rightCols(d_anc_ - rank_).adjoint();
        }
        return detail::closest_unitary(ut.transpose());
    }

private:
    Eigen::MatrixXcd reduced(const Eigen::MatrixXcd& u) const {
        const Eigen::MatrixXcd k_mat = scatter(m0_ * u.leftCols(rank_).transpose());
        return k_mat * k_mat.adjoint();
    }

    Eigen::MatrixXcd scatter(const Eigen::MatrixXcd& w) const {
        Eigen::MatrixXcd k_mat =
            Eigen::MatrixXcd::Zero(cut_.a_dim * cut_.a2_dim, cut_.b_dim * cut_.b2_dim);
        for (int s = 0; s < d_sys_; ++s)
            for (int r = 0; r < d_anc_; ++r)
                k_mat(ka_[s] * cut_.a2_dim + r / cut_.b2_dim,
                      tb_[s] * cut_.b2_dim + r % cut_.b2_dim) = w(s, r);
        return k_mat;
    }

    SpaceShape shape_;
    ResolvedCut cut_;
    int d_sys_, d_anc_, rank_ = 0;
    Eigen::VectorXd eigenvalues_;  // descending, clamped, first rank_ entries
    Eigen::MatrixXcd m0_;          // canonical purification, compact columns
    std::vector<int> ka_, tb_;
};

/// Multistart upper bound on E_p(rho) across the (a_labels A2 | b_labels B2)
/// cut. The start list is [identity, A2-side permutation, extra_starts...,
/// Haar samples...], truncated or extended to cfg.restarts entries, so the
/// H(rho^A) and H(rho^B) bounds of the theory hold by construction whenever
/// cfg.restarts >= 2.
inline EopResult entanglement_of_purification(
    const DensityMatrix& rho, const Cut& cut, const OptimizerConfig& cfg = {},
    const std::vector<Eigen::MatrixXcd>& extra_starts = {}) {
    const ResolvedCut rc = resolve_cut(rho.shape(), cut, cfg);
    const PurificationProblem prob(rho, rc);

    const int restarts = std::max(1, cfg.restarts);
    std::vector<std::vector<Eigen::MatrixXcd>> starts;
    starts.push_back({prob.identity_start()});
    if (restarts >= 2) starts.push_back({prob.a2_side_start()});
    for (const auto& u : extra_starts) {
        if (static_cast<int>(starts.size()) >= restarts) break;
        starts.push_back({u});
    }
    for (std::uint64_t i = 0; static_cast<int>(starts.size()) < restarts; ++i) {
        std::mt19937_64 rng = seeded_engine(cfg.seed, i);
        starts.push_back({haar_unitary(rng, prob.anc_dim())});
    }

    const DescentOutcome best = multistart_minimize(prob, starts, cfg);
    EopResult result;
    result.value_bits = std::max(0.0, best.value);
    result.argmin = pack_unitary(best.us[0]);
    result.restarts_used = static_cast<int>(starts.size());
    result.status = best.converged ? OptStatus::converged : OptStatus::budget_exhausted;
    return result;
}

/// Rebuilds the optimal purification recorded in an EopResult.
inline PureState argmin_purification(const DensityMatrix& rho, const Cut& cut,
                                     const EopResult& result, const OptimizerConfig& cfg = {},
                                     const std::string& a2_label = "A2",
                                     const std::string& b2_label = "B2") {
    const ResolvedCut rc = resolve_cut(rho.shape(), cut, cfg);
    const PurificationProblem prob(rho, rc);
    return prob.purification(unpack_unitary(result.argmin, prob.anc_dim()), a2_label, b2_label);
}

/// Entropy across the given keep-side of an explicit purification. Any such
/// evaluation is a valid upper bound on E_p of the state it purifies.
inline double purification_value_bits(const PureState& u,
                                      const std::vector<std::string>& a_side_labels) {
    return entropy_of_hermitian(reduced_from_pure(u, a_side_labels));
}

/// Checks Tr_ancilla |u><u| = rho entrywise within tol.
inline bool purifies(const PureState& u, const DensityMatrix& rho, double tolerance = 1e-8) {
    std::vector<std::string> labels;
    for (const auto& f : rho.shape().factors()) labels.push_back(f.label);
    const Eigen::MatrixXcd red = reduced_from_pure(u, labels);
    return detail::max_abs(red - rho.entries()) <= tolerance;
}

/// E_p(rho^(x)n)/n for n in {1, 2}. The two-copy run seeds one restart with
/// the tensor square of the single-copy argmin, so the product-purification
/// upper bound E_p(rho^(x)2) <= 2 E_p(rho) is respected by construction.
inline double regularized_eop(const DensityMatrix& rho, int n, const Cut& cut,
                              const OptimizerConfig& cfg = {}) {
    if (n < 1 || n > 2) throw InvalidConfig("regularized_eop: n must be 1 or 2");
    const EopResult single = entanglement_of_purification(rho, cut, cfg);
    if (n == 1) return single.value_bits;

    const ResolvedCut rc = resolve_cut(rho.shape(), cut, cfg);
    auto suffixed = [](const std::vector<std::string>& ls) {
        std::vector<std::string> out;
        for (const auto& l : ls) out.push_back(l + "_2");
        return out;
    };
    std::vector<std::string> labels2;
    for (const auto& f : rho.shape().factors()) labels2.push_back(f.label + "_2");
    const DensityMatrix rho2 = tensor(rho, rho.relabeled(labels2));

    Cut cut2;
    cut2.a_labels = cut.a_labels;
    for (const auto& l : suffixed(cut.a_labels)) cut2.a_labels.push_back(l);
    cut2.b_labels = cut.b_labels;
    for (const auto& l : suffixed(cut.b_labels)) cut2.b_labels.push_back(l);
    cut2.a2_dim = rc.a2_dim * rc.a2_dim;
    cut2.b2_dim = rc.b2_dim * rc.b2_dim;

    // tensor square of the single-copy optimum, refactored so both copies'
    // ancillas merge into composite A2/B2 references
    const PureState u1 = argmin_purification(rho, cut, single, cfg);
    std::vector<std::string> u2_labels;
    for (const auto& f : u1.shape().factors()) u2_labels.push_back(f.label + "_2");
    const PureState product =
        tensor(u1, PureState(u1.shape().relabeled(u2_labels), u1.amplitudes(), Validate::trusted));
    std::vector<std::string> order;
    for (const auto& f : rho.shape().factors()) order.push_back(f.label);
    for (const auto& l : labels2) order.push_back(l);
    order.insert(order.end(), {"A2", "A2_2", "B2", "B2_2"});
    const PureState aligned_target = permute_factors(product, order);

    const ResolvedCut rc2 = resolve_cut(rho2.shape(), cut2, cfg);
    const PurificationProblem prob2(rho2, rc2);
    const Eigen::VectorXcd& amp = aligned_target.amplitudes();
    Eigen::MatrixXcd target(rho2.dim(), prob2.anc_dim());
    for (int s = 0; s < rho2.dim(); ++s)
        for (int r = 0; r < prob2.anc_dim(); ++r) target(s, r) = amp(s * prob2.anc_dim() + r);

    const EopResult doubled = entanglement_of_purification(rho2, cut2, cfg,
                                                           {prob2.aligning_unitary(target)});
    return doubled.value_bits / 2.0;
}

/// Local processing plus transmission of one subsystem from the A side to the
/// B side: the representable slice of "operations containing quantum
/// communication of size d".
struct QCommOperation {
    std::optional<OneWayLOCC> locc;  // applied first; may be absent
    std::string moved_label;         // factor handed to the B side; empty = none
};

struct MonotonicityReport {
    double ep_output_upper = 0.0;        // optimizer bound on E_p(kappa(rho))
    double ep_input_upper = 0.0;         // optimizer bound on E_p(rho)
    double ep_input_random_search = 0.0; // oracle stand-in for the right-hand side
    double log2_d = 0.0;
    double slack = 0.0;   // rhs + log2_d - lhs
    bool violation = false;
    bool advisory = true;  // both sides are estimates, not certified values
};

/// Probes weak monotonicity E_p(kappa(rho)) <= E_p(rho) + log2 d.
inline MonotonicityReport check_weak_monotonicity(const DensityMatrix& rho,
                                                  const QCommOperation& op, const Cut& cut,
                                                  const OptimizerConfig& cfg = {},
                                                  double tolerance = 1e-3) {
    MonotonicityReport report;
    const DensityMatrix sigma = op.locc ? apply_locc(*op.locc, rho) : rho;

    Cut out_cut;
    out_cut.a2_dim = cut.a2_dim;
    out_cut.b2_dim = cut.b2_dim;
    int d_moved = 1;
    for (const auto& f : sigma.shape().factors()) {
        const bool was_a = std::find(cut.a_labels.begin(), cut.a_labels.end(), f.label) !=
                           cut.a_labels.end();
        if (!op.moved_label.empty() && f.label == op.moved_label) {
            if (!was_a) throw InvalidConfig("moved factor must start on the A side");
            d_moved = f.dim;
            out_cut.b_labels.push_back(f.label);
        } else if (was_a) {
            out_cut.a_labels.push_back(f.label);
        } else {
            out_cut.b_labels.push_back(f.label);
        }
    }
    if (!op.moved_label.empty() && d_moved == 1 && !sigma.shape().has_label(op.moved_label))
        throw ShapeError("moved label '" + op.moved_label + "' not present in output state");

    report.log2_d = std::log2(static_cast<double>(d_moved));
    report.ep_output_upper = entanglement_of_purification(sigma, out_cut, cfg).value_bits;
    report.ep_input_upper = entanglement_of_purification(rho, cut, cfg).value_bits;
    oracle::SearchBudget budget{std::max(500, cfg.restarts * 50), cfg.seed};
    report.ep_input_random_search = oracle::eop_random_search(rho, cut, budget);
    report.slack = report.ep_input_random_search + report.log2_d - report.ep_output_upper;
    report.violation = report.slack < -tolerance;
    return report;
}

}  // namespace eoplab
