#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "eoplab/opt_types.hpp"
#include "eoplab/qmat.hpp"
#include "eoplab/unitary_opt.hpp"

namespace eoplab {

/// A finite quantum information source (p_x, W_x) on a common space.
/// Zero-probability members carry no weight in any derived quantity and are
/// dropped on ingestion.
class Ensemble {
public:
    Ensemble(std::vector<double> probs, std::vector<DensityMatrix> states) {
        if (probs.size() != states.size() || probs.empty())
            throw InvalidInput("Ensemble: need equally many probabilities and states");
        double sum = 0.0;
        for (double p : probs) {
            if (p < -1e-12) throw InvalidInput("Ensemble: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-10)
            throw InvalidInput("Ensemble: probabilities sum to " + std::to_string(sum));
        for (std::size_t x = 1; x < states.size(); ++x)
            if (states[x].shape() != states[0].shape())
                throw ShapeError("Ensemble: member states disagree on shape");
        for (std::size_t x = 0; x < probs.size(); ++x) {
            if (probs[x] < 1e-15) continue;
            probs_.push_back(probs[x]);
            states_.push_back(std::move(states[x]));
        }
        if (states_.empty()) throw InvalidInput("Ensemble: all members have zero probability");
    }

    std::size_t size() const { return states_.size(); }
    double prob(std::size_t x) const { return probs_.at(x); }
    const DensityMatrix& state(std::size_t x) const { return states_.at(x); }
    const SpaceShape& state_shape() const { return states_[0].shape(); }
    int state_dim() const { return states_[0].dim(); }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> probs_;
    std::vector<DensityMatrix> states_;
};

inline DensityMatrix average_state(const Ensemble& e) {
    Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(e.state_dim(), e.state_dim());
    for (std::size_t x = 0; x < e.size(); ++x) avg += e.prob(x) * e.state(x).entries();
    return DensityMatrix::trusted(e.state_shape(), std::move(avg));
}

/// Classical-quantum state sum_x p_x |e_x><e_x| (x) W_x; block-diagonal in the
/// classical factor by construction.
struct CQState {
    DensityMatrix state;
    int num_labels = 0;

    /// Unnormalized x-th diagonal block (trace p_x).
    Eigen::MatrixXcd block(int x) const {
        const int d = state.dim() / num_labels;
        return state.entries().block(x * d, x * d, d, d);
    }
};

inline CQState cq_state(const Ensemble& e, const std::string& x_label = "X") {
    if (e.state_shape().has_label(x_label))
        throw ShapeError("cq_state: label '" + x_label + "' already used by the member states");
    const int m = static_cast<int>(e.size());
    const int d = e.state_dim();
    Eigen::MatrixXcd entries = Eigen::MatrixXcd::Zero(m * d, m * d);
    for (int x = 0; x < m; ++x)
        entries.block(x * d, x * d, d, d) = e.prob(x) * e.state(x).entries();
    const SpaceShape shape =
        SpaceShape::single(x_label, m).tensor_with(e.state_shape());
    return CQState{DensityMatrix::trusted(shape, std::move(entries)), m};
}

/// Joint objective H(sum_x p_x |w_x><w_x|) over per-member purification
/// unitaries U_x on a shared reference of dimension ref_dim.
class ExtensionProblem {
public:
    ExtensionProblem(const Ensemble& e, int ref_dim)
        : d_(e.state_dim()), ref_dim_(ref_dim) {
        for (std::size_t x = 0; x < e.size(); ++x) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e.state(x).entries());
            int rank = 0;
            for (int i = d_ - 1; i >= 0 && es.eigenvalues()(i) > tol::psd; --i) ++rank;
            if (rank == 0) rank = 1;
            if (ref_dim_ < rank)
                throw InvalidConfig("h_ext: ref_dim " + std::to_string(ref_dim_) +
                                    " below the rank " + std::to_string(rank) + " of member " +
                                    std::to_string(x));
            Eigen::MatrixXcd m0 = Eigen::MatrixXcd::Zero(d_, rank);
            for (int k = 0; k < rank; ++k)
                m0.col(k) = std::sqrt(std::max(0.0, es.eigenvalues()(d_ - 1 - k))) *
                            es.eigenvectors().col(d_ - 1 - k);
            m0_.push_back(std::move(m0));
            probs_.push_back(e.prob(x));
        }
    }

    std::size_t members() const { return m0_.size(); }
    int ref_dim() const { return ref_dim_; }

    /// Purification amplitude matrix of member x (rows: state space, cols: reference).
    Eigen::MatrixXcd amplitude(const Eigen::MatrixXcd& u, std::size_t x) const {
        return m0_[x] * u.leftCols(m0_[x].cols()).transpose();
    }

    double objective(const std::vector<Eigen::MatrixXcd>& us) const {
        return entropy_of_hermitian(average(us));
    }

    std::vector<DescentDirection> descent_direction(const std::vector<Eigen::MatrixXcd>& us) const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(average(us));
        Eigen::VectorXd weights = es.eigenvalues();
        for (int i = 0; i < weights.size(); ++i)
            weights(i) = weights(i) > 1e-12 ? -std::log2(weights(i)) : 0.0;
        const Eigen::MatrixXcd m_log =
            es.eigenvectors() * weights.asDiagonal() * es.eigenvectors().adjoint();

        std::vector<DescentDirection> dirs;
        for (std::size_t x = 0; x < m0_.size(); ++x) {
            const Eigen::MatrixXcd w = amplitude(us[x], x);
            const Eigen::VectorXcd wv = flatten(w);
            const Eigen::VectorXcd gv = m_log * wv;
            Eigen::MatrixXcd g(d_, ref_dim_);
            for (int b = 0; b < d_; ++b)
                for (int r = 0; r < ref_dim_; ++r) g(b, r) = gv(b * ref_dim_ + r);
            const Eigen::MatrixXcd c = probs_[x] * (g.adjoint() * m0_[x]).transpose();
            const Eigen::MatrixXcd z = us[x].leftCols(m0_[x].cols()) * c;
            dirs.push_back(DescentDirection{z - z.adjoint(), {}});
        }
        return dirs;
    }

private:
    Eigen::VectorXcd flatten(const Eigen::MatrixXcd& w) const {
        Eigen::VectorXcd v(d_ * ref_dim_);
        for (int b = 0; b < d_; ++b)
            for (int r = 0; r < ref_dim_; ++r) v(b * ref_dim_ + r) = w(b, r);
        return v;
    }

    Eigen::MatrixXcd average(const std::vector<Eigen::MatrixXcd>& us) const {
        Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(d_ * ref_dim_, d_ * ref_dim_);
        for (std::size_t x = 0; x < m0_.size(); ++x) {
            const Eigen::VectorXcd v = flatten(amplitude(us[x], x));
            avg.noalias() += probs_[x] * (v * v.adjoint());
        }
        return avg;
    }

    int d_, ref_dim_;
    std::vector<Eigen::MatrixXcd> m0_;
    std::vector<double> probs_;
};

struct HextResult {
    double value_bits = 0.0;  // optimizer upper bound on the extension entropy
    std::vector<Eigen::MatrixXcd> argmin_unitaries;
    int restarts_used = 0;
    OptStatus status = OptStatus::budget_exhausted;
    bool upper_bound = true;
};

/// Extension entropy: minimum entropy of sum_x p_x W_x^ext over per-state
/// purifications with a reference of dimension ref_dim (0 selects the state
/// dimension). Multistart upper bound; the identity start uses the canonical
/// purifications and lands at H(W_p) exactly for pure ensembles.
inline HextResult h_ext(const Ensemble& e, int ref_dim = 0, const OptimizerConfig& cfg = {}) {
    if (ref_dim <= 0) ref_dim = e.state_dim();
    const ExtensionProblem prob(e, ref_dim);
    const std::size_t m = prob.members();

    const int restarts = std::max(1, cfg.restarts);
    std::vector<std::vector<Eigen::MatrixXcd>> starts;
    starts.push_back(std::vector<Eigen::MatrixXcd>(
        m, Eigen::MatrixXcd::Identity(ref_dim, ref_dim)));
    for (std::uint64_t i = 0; static_cast<int>(starts.size()) < restarts; ++i) {
        std::mt19937_64 rng = seeded_engine(cfg.seed, i);
        std::vector<Eigen::MatrixXcd> s;
        for (std::size_t x = 0; x < m; ++x) s.push_back(haar_unitary(rng, ref_dim));
        starts.push_back(std::move(s));
    }

    const DescentOutcome best = multistart_minimize(prob, starts, cfg);
    HextResult result;
    result.value_bits = std::max(0.0, best.value);
    result.argmin_unitaries = best.us;
    result.restarts_used = static_cast<int>(starts.size());
    result.status = best.converged ? OptStatus::converged : OptStatus::budget_exhausted;
    return result;
}

/// Purification of cq_state(e) assembled from per-member extension
/// purifications: |u> = sum_x sqrt(p_x) |x>_X |w_x>_{B,B2} |x>_{A2}. Its
/// A-side reduction entropy equals the extension objective of the w_x, which
/// is how E_p(cq state) <= H^ext is realized constructively.
inline PureState extension_purification(const Ensemble& e, int ref_dim,
                                        const std::vector<Eigen::MatrixXcd>& unitaries,
                                        const std::string& x_label = "X",
                                        const std::string& a2_label = "A2",
                                        const std::string& b2_label = "B2") {
    if (ref_dim <= 0) ref_dim = e.state_dim();
    const ExtensionProblem prob(e, ref_dim);
    const int m = static_cast<int>(prob.members());
    const int d = e.state_dim();
    if (unitaries.size() != prob.members())
        throw InvalidConfig("extension_purification: one unitary per member required");

    SpaceShape shape = SpaceShape::single(x_label, m)
                           .tensor_with(e.state_shape())
                           .tensor_with(SpaceShape({Factor{a2_label, m}, Factor{b2_label, ref_dim}}));
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(shape.total_dim());
    for (int x = 0; x < m; ++x) {
        const Eigen::MatrixXcd w = prob.amplitude(unitaries[x], x);
        const double root_p = std::sqrt(e.prob(x));
        for (int b = 0; b < d; ++b)
            for (int r = 0; r < ref_dim; ++r)
                amp(((x * d + b) * m + x) * ref_dim + r) = root_p * w(b, r);
    }
    return PureState(std::move(shape), std::move(amp), Validate::trusted);
}

}  // namespace eoplab
