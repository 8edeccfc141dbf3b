#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "eoplab/channels.hpp"
#include "eoplab/ensemble.hpp"
#include "eoplab/eop.hpp"
#include "eoplab/qmat.hpp"

namespace eoplab {

/// Branch mass below which an encoder entry is dropped and the remaining
/// probabilities renormalized.
inline constexpr double kBranchFloor = 1e-12;

struct EncoderEntry {
    int message = 0;     // classical signal i, selects the decoder map
    double prob = 0.0;   // p_{i,x}
    DensityMatrix state; // rho_{i,x} on the quantum memory
};

/// Visible code (K, tau, nu): the encoder maps the source label x to a
/// classical message plus an L-dimensional quantum state; the decoder applies
/// the message-indexed trace-preserving map.
class VisibleCode {
public:
    VisibleCode(int L, std::vector<std::vector<EncoderEntry>> encoder, std::vector<CPMap> decoder)
        : L_(L), encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
        for (const auto& row : encoder_) {
            double sum = 0.0;
            for (const auto& entry : row) {
                if (entry.message < 0 || entry.message >= static_cast<int>(decoder_.size()))
                    throw InvalidInput("VisibleCode: encoder references unknown message");
                sum += entry.prob;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw InvalidInput("VisibleCode: encoder row sums to " + std::to_string(sum));
        }
    }

    int quantum_dim() const { return L_; }
    int cc() const { return static_cast<int>(decoder_.size()); }
    int size() const { return L_ * cc(); }  // |Psi| = L * CC(kappa)
    int num_labels() const { return static_cast<int>(encoder_.size()); }
    const std::vector<EncoderEntry>& encoder_row(int x) const { return encoder_.at(x); }
    const CPMap& decoder_map(int i) const { return decoder_.at(i); }
    const SpaceShape& output_shape() const { return decoder_[0].out_shape(); }

    /// nu(tau(x)) = sum_i p_{i,x} kappa_{B,i}(rho_{i,x}).
    DensityMatrix decode_average(int x) const {
        const int d = output_shape().total_dim();
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
        for (const auto& entry : encoder_row(x))
            out += entry.prob * apply_cp(decoder_[entry.message], entry.state).entries;
        return DensityMatrix::trusted(output_shape(), std::move(out));
    }

    /// tau(x) as a state on the code space M(cc) (x) Q(L), the classical
    /// message embedded in orthogonal sectors.
    DensityMatrix encoder_state(int x, const std::string& m_label = "M",
                                const std::string& q_label = "Q") const {
        const int dim = cc() * L_;
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& entry : encoder_row(x))
            out.block(entry.message * L_, entry.message * L_, L_, L_) +=
                entry.prob * entry.state.entries();
        return DensityMatrix::trusted(SpaceShape({Factor{m_label, cc()}, Factor{q_label, L_}}),
                                      std::move(out));
    }

private:
    int L_;
    std::vector<std::vector<EncoderEntry>> encoder_;
    std::vector<CPMap> decoder_;
};

/// Maximally entangled input matched to the protocol's A/B input factors.
inline DensityMatrix locc_input_state(const OneWayLOCC& locc, int L) {
    const SpaceShape& a_in = locc.a_instrument().in_shape();
    const SpaceShape& b_in = locc.b_maps()[0].in_shape();
    if (a_in.total_dim() != L || b_in.total_dim() != L)
        throw ShapeError("protocol input dimensions do not match L = " + std::to_string(L));
    SpaceShape shape = a_in.tensor_with(b_in);
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(L * L);
    for (int k = 0; k < L; ++k) amp(k * L + k) = 1.0 / std::sqrt(static_cast<double>(L));
    return to_density(PureState(std::move(shape), std::move(amp), Validate::trusted));
}

/// q_x = Tr (|e_x><e_x| (x) I) kappa(Phi_L).
inline std::vector<double> outcome_distribution(const OneWayLOCC& locc, int L) {
    const DensityMatrix sigma = apply_locc(locc, locc_input_state(locc, L));
    const int x_dim = locc.a_instrument().out_shape().total_dim();
    const int d = locc.b_maps()[0].out_shape().total_dim();
    std::vector<double> q(x_dim, 0.0);
    for (int x = 0; x < x_dim; ++x)
        for (int b = 0; b < d; ++b) q[x] += sigma.entries()(x * d + b, x * d + b).real();
    return q;
}

/// Builds the visible code of the protocol: the encoder sends rho_{i,x} with
/// probability p_{i,x} together with the message i, and the decoder applies
/// kappa_{B,i}. Labels x with vanishing outcome probability fall back to
/// (i = 0, maximally mixed) when allowed.
inline VisibleCode build_visible_code(const OneWayLOCC& locc, int L, bool allow_fallback = true) {
    const DensityMatrix phi = locc_input_state(locc, L);
    const int x_dim = locc.a_instrument().out_shape().total_dim();
    const int branches = cc_size(locc);
    const SpaceShape q_shape = SpaceShape::single("Q", L);

    std::vector<std::string> a_labels;
    for (const auto& f : locc.a_instrument().in_shape().factors()) a_labels.push_back(f.label);
    std::vector<std::string> b_labels;
    for (const auto& f : locc.b_maps()[0].in_shape().factors()) b_labels.push_back(f.label);

    std::vector<std::vector<EncoderEntry>> encoder(x_dim);
    for (int x = 0; x < x_dim; ++x) {
        Eigen::MatrixXcd e_x = Eigen::MatrixXcd::Zero(x_dim, x_dim);
        e_x(x, x) = 1.0;

        double q_x = 0.0;
        std::vector<std::pair<int, Eigen::MatrixXcd>> blocks;  // (i, unnormalized N_{i,x})
        for (int i = 0; i < branches; ++i) {
            // N_{i,x} = Tr_A [(kappa_{A,i}^*(|e_x><e_x|) (x) I_B) Phi_L]
            const Eigen::MatrixXcd heis =
                adjoint_apply(locc.a_instrument().branches()[i], e_x);
            const Eigen::MatrixXcd lifted = detail::kron(heis, Eigen::MatrixXcd::Identity(L, L));
            const Eigen::MatrixXcd n_ix = detail::partial_trace_entries(
                lifted * phi.entries(), phi.shape(), b_labels);
            const double mass = n_ix.trace().real();
            q_x += mass;
            if (mass >= kBranchFloor) blocks.emplace_back(i, n_ix);
        }

        if (blocks.empty() || q_x < kBranchFloor) {
            if (!allow_fallback)
                throw DegenerateBranchError("outcome " + std::to_string(x) +
                                            " has zero probability under the protocol");
            encoder[x].push_back(EncoderEntry{0, 1.0, maximally_mixed(L, "Q")});
            continue;
        }

        double kept = 0.0;
        for (const auto& [i, n_ix] : blocks) kept += n_ix.trace().real();
        for (const auto& [i, n_ix] : blocks) {
            const double mass = n_ix.trace().real();
            encoder[x].push_back(EncoderEntry{
                i, mass / kept, DensityMatrix(q_shape, n_ix / mass)});
        }
    }

    std::vector<CPMap> decoder;
    for (const auto& b : locc.b_maps()) decoder.emplace_back(q_shape, b.out_shape(), b.kraus());
    return VisibleCode(L, std::move(encoder), std::move(decoder));
}

/// eps_p(Psi) = sum_x p_x (1 - F^2(W_x, nu(tau(x)))).
inline double code_error(const VisibleCode& code, const Ensemble& e) {
    if (code.num_labels() != static_cast<int>(e.size()))
        throw ShapeError("code_error: code has " + std::to_string(code.num_labels()) +
                         " labels for an ensemble of " + std::to_string(e.size()));
    if (code.output_shape().total_dim() != e.state_dim())
        throw ShapeError("code_error: decoder output dimension mismatch");
    double err = 0.0;
    for (std::size_t x = 0; x < e.size(); ++x) {
        const double f = fidelity(e.state(x), code.decode_average(static_cast<int>(x)));
        err += e.prob(x) * (1.0 - f * f);
    }
    return err;
}

/// One inequality (or identity) of the direct-part proof. Identities are
/// reported as minus the absolute residual, so "slack >= -1e-9" reads
/// uniformly across entries.
struct ChainEntry {
    std::string name;
    double slack = 0.0;
};

struct LemmaReport {
    double lhs = 0.0;       // eps_p(Psi) / 2
    double fid_term = 0.0;  // 1 - F^2(cq state, kappa(Phi_L))
    double tn_term = 0.0;   // ||cq state - kappa(Phi_L)||_1 / 2
    bool holds = false;
    std::vector<ChainEntry> chain;
    double min_chain_slack = 0.0;
    double min_reconstruction_fidelity = 1.0;  // error-free property of the construction
    bool used_fallback = false;
    std::vector<double> q;
};

/// Evaluates the direct-part bound eps_p/2 <= (1 - F^2) + ||.||_1/2 together
/// with every intermediate inequality of its proof.
inline LemmaReport verify_lemma(const OneWayLOCC& locc, int L, const Ensemble& e) {
    const int x_dim = locc.a_instrument().out_shape().total_dim();
    if (static_cast<int>(e.size()) != x_dim)
        throw ShapeError("verify_lemma: ensemble size must match the protocol's outcome count");
    const int d = locc.b_maps()[0].out_shape().total_dim();
    if (e.state_dim() != d)
        throw ShapeError("verify_lemma: ensemble state dimension must match the decoder output");

    LemmaReport rep;
    const CQState cq = cq_state(e);
    const DensityMatrix sigma = apply_locc(locc, locc_input_state(locc, L));
    const VisibleCode code = build_visible_code(locc, L);
    rep.q = outcome_distribution(locc, L);

    const double f = fidelity(cq.state, sigma);
    rep.fid_term = 1.0 - f * f;
    rep.tn_term = 0.5 * trace_norm_distance(cq.state, sigma);
    const double eps = code_error(code, e);
    rep.lhs = 0.5 * eps;

    // (a) basic inequality F^2 <= Tr sqrt(rho) sqrt(sigma)
    const double overlap = sqrt_overlap(cq.state, sigma);
    rep.chain.push_back({"basic_inequality", overlap - f * f});

    // block-diagonal expansion of Tr sqrt(cq) sqrt(sigma)
    const Eigen::MatrixXcd sqrt_sigma = psd_sqrt(sigma.entries());
    double blocks_sum = 0.0;
    std::vector<double> t_x(x_dim, 0.0);     // Tr sqrt(W_x) sqrt(nu(tau(x)))
    std::vector<double> fid_x(x_dim, 0.0);   // F(W_x, nu(tau(x)))
    double concave_sum = 0.0;
    for (int x = 0; x < x_dim; ++x) {
        const Eigen::MatrixXcd sqrt_wx = matrix_sqrt(e.state(x));
        const Eigen::MatrixXcd sigma_block = sigma.entries().block(x * d, x * d, d, d);
        const Eigen::MatrixXcd sqrt_sigma_block = sqrt_sigma.block(x * d, x * d, d, d);
        blocks_sum += std::sqrt(e.prob(x)) * (sqrt_wx * sqrt_sigma_block).trace().real();
        concave_sum +=
            std::sqrt(e.prob(x)) * (sqrt_wx * psd_sqrt(sigma_block)).trace().real();

        const DensityMatrix decoded = code.decode_average(x);
        t_x[x] = sqrt_overlap(e.state(x), decoded);
        fid_x[x] = fidelity(e.state(x), decoded);

        if (rep.q[x] > kBranchFloor) {
            const DensityMatrix induced(e.state_shape(), sigma_block / rep.q[x]);
            rep.min_reconstruction_fidelity =
                std::min(rep.min_reconstruction_fidelity, fidelity(induced, decoded));
        } else {
            rep.used_fallback = true;
        }
    }
    rep.chain.push_back({"block_diagonal_identity", -std::abs(overlap - blocks_sum)});

    // (b) operator concavity of the square root under the pinching map
    rep.chain.push_back({"operator_concavity", concave_sum - blocks_sum});

    // (9-8-1): the pinched blocks coincide with q_x nu(tau(x)); identical
    // up to fallback labels, whose pinched mass vanishes
    double recon_sum = 0.0, term1 = 0.0, term2 = 0.0, pos_sum = 0.0;
    for (int x = 0; x < x_dim; ++x) {
        const double w = std::sqrt(e.prob(x) * rep.q[x]);
        recon_sum += w * t_x[x];
        term1 += (w - e.prob(x)) * t_x[x];
        term2 += e.prob(x) * t_x[x];
        pos_sum += std::max(w - e.prob(x), 0.0);
    }
    if (!rep.used_fallback)
        rep.chain.push_back({"reconstruction_identity", -std::abs(concave_sum - recon_sum)});
    rep.chain.push_back({"split_identity", -std::abs(recon_sum - (term1 + term2))});

    // (11-21-3-q)
    rep.chain.push_back({"positive_part_bound", pos_sum - term1});
    double tv_q = 0.0, tv_abs = 0.0;
    for (int x = 0; x < x_dim; ++x) {
        tv_q += std::max(rep.q[x] - e.prob(x), 0.0);
        tv_abs += std::abs(rep.q[x] - e.prob(x));
    }
    rep.chain.push_back({"sqrt_to_linear_bound", tv_q - pos_sum});
    rep.chain.push_back({"classical_tv_identity", -std::abs(tv_q - 0.5 * tv_abs)});
    rep.chain.push_back({"data_processing", rep.tn_term - 0.5 * tv_abs});

    // (11-21-4-q): per label, 1/2 (1 - F^2) <= 1 - F <= 1 - Tr sqrt sqrt
    double fid_chain = 1.0;
    for (int x = 0; x < x_dim; ++x) {
        fid_chain = std::min(fid_chain, fid_x[x] - t_x[x]);
        fid_chain = std::min(fid_chain,
                             (1.0 - t_x[x]) - 0.5 * (1.0 - fid_x[x] * fid_x[x]));
    }
    rep.chain.push_back({"fidelity_chain", fid_chain});

    rep.chain.push_back({"final_bound", rep.fid_term + rep.tn_term - rep.lhs});

    rep.min_chain_slack = rep.chain.front().slack;
    for (const auto& entry : rep.chain) rep.min_chain_slack = std::min(rep.min_chain_slack, entry.slack);
    rep.holds = rep.lhs <= rep.fid_term + rep.tn_term + 1e-9;
    return rep;
}

struct ConverseReport {
    double log_size = 0.0;    // log2 |Psi|
    double h_encoded = 0.0;   // H(Tr_A rho~)
    double ep_encoded = 0.0;  // optimizer bound on E_p(rho~)
    double ep_decoded = 0.0;  // optimizer bound on E_p((id (x) nu)(rho~))
    bool dim_bound_ok = false;
    bool chain_monotone = false;
};

/// Checks log2|Psi| >= H(Tr_A rho~) >= E_p(rho~) >= E_p((id (x) nu)(rho~)) on
/// the encoder mixture rho~ = sum_x p_x |e_x><e_x| (x) tau(x). The decoded
/// estimate reuses the encoded argmin pushed through a Stinespring dilation of
/// the decoder, so the optimizer estimates are monotone whenever the
/// inequalities hold.
inline ConverseReport converse_chain_check(const VisibleCode& code, const Ensemble& e,
                                           const OptimizerConfig& cfg = {}) {
    if (code.num_labels() != static_cast<int>(e.size()))
        throw ShapeError("converse_chain_check: label count mismatch");
    const int m = static_cast<int>(e.size());
    const int code_dim = code.size();

    // rho~ on X (x) M (x) Q
    Eigen::MatrixXcd rt = Eigen::MatrixXcd::Zero(m * code_dim, m * code_dim);
    for (int x = 0; x < m; ++x)
        rt.block(x * code_dim, x * code_dim, code_dim, code_dim) =
            e.prob(x) * code.encoder_state(x).entries();
    const SpaceShape rt_shape = SpaceShape({Factor{"X", m}})
                                    .tensor_with(SpaceShape({Factor{"M", code.cc()},
                                                             Factor{"Q", code.quantum_dim()}}));
    const DensityMatrix rho_tilde = DensityMatrix::trusted(rt_shape, std::move(rt));

    ConverseReport rep;
    rep.log_size = std::log2(static_cast<double>(code.size()));
    rep.h_encoded = von_neumann_entropy(partial_trace(rho_tilde, {"M", "Q"}));
    rep.dim_bound_ok = rep.log_size >= rep.h_encoded - 1e-9;

    // ancilla sized to the state: A2 covers any rank, B2 stays trivial
    const Cut cut1{{"X"}, {"M", "Q"}, rho_tilde.dim(), 1};
    const EopResult enc = entanglement_of_purification(rho_tilde, cut1, cfg);
    rep.ep_encoded = enc.value_bits;

    // decoded cq state (id (x) nu)(rho~)
    const int d = code.output_shape().total_dim();
    Eigen::MatrixXcd dec = Eigen::MatrixXcd::Zero(m * d, m * d);
    for (int x = 0; x < m; ++x)
        dec.block(x * d, x * d, d, d) = e.prob(x) * code.decode_average(x).entries();
    const SpaceShape dec_shape = SpaceShape({Factor{"X", m}}).tensor_with(code.output_shape());
    const DensityMatrix decoded = DensityMatrix::trusted(dec_shape, std::move(dec));

    std::vector<std::string> b_out_labels;
    for (const auto& f : code.output_shape().factors()) b_out_labels.push_back(f.label);
    Cut cut2{{"X"}, b_out_labels, decoded.dim(), 1};
    const EopResult dec_opt = entanglement_of_purification(decoded, cut2, cfg);

    // Stinespring push-forward of the encoded argmin: apply nu's dilation
    // V = sum_{i,k} K_{i,k} (x) <i| (x) |e_{i,k}> on the code factor; the
    // A-side reduction is untouched, so its entropy equals rep.ep_encoded
    const PureState u1 = argmin_purification(rho_tilde, cut1, enc, cfg);
    int env_dim = 0;
    for (int i = 0; i < code.cc(); ++i)
        env_dim += static_cast<int>(code.decoder_map(i).kraus().size());
    const int a2 = rho_tilde.dim();
    SpaceShape u2_shape = SpaceShape({Factor{"X", m}})
                              .tensor_with(code.output_shape())
                              .tensor_with(SpaceShape({Factor{"E", env_dim}, Factor{"A2", a2},
                                                       Factor{"B2", 1}}));
    Eigen::VectorXcd amp2 = Eigen::VectorXcd::Zero(u2_shape.total_dim());
    const int L = code.quantum_dim();
    const auto& amp1 = u1.amplitudes();  // index ((x, (i, q)), a2) with b2 = 1
    int env = 0;
    for (int i = 0; i < code.cc(); ++i) {
        for (const auto& kraus : code.decoder_map(i).kraus()) {
            for (int x = 0; x < m; ++x)
                for (int b = 0; b < d; ++b)
                    for (int r = 0; r < a2; ++r) {
                        Complex s = 0.0;
                        for (int qq = 0; qq < L; ++qq)
                            s += kraus(b, qq) * amp1((x * code_dim + i * L + qq) * a2 + r);
                        amp2(((x * d + b) * env_dim + env) * a2 + r) += s;
                    }
            ++env;
        }
    }
    const PureState u2(u2_shape, std::move(amp2), Validate::trusted);
    const double pushed = purification_value_bits(u2, {"X", "A2"});

    rep.ep_decoded = std::min(dec_opt.value_bits, pushed);
    rep.chain_monotone = (rep.h_encoded >= rep.ep_encoded - 1e-9) &&
                         (rep.ep_encoded >= rep.ep_decoded - 1e-9);
    return rep;
}

/// eps(rho, kappa, L) = 1 - F^2(rho, kappa(Phi_L)).
inline double state_generation_error(const OneWayLOCC& locc, int L, const DensityMatrix& target) {
    const double f = fidelity(target, apply_locc(locc, locc_input_state(locc, L)));
    return 1.0 - f * f;
}

/// The ensemble of conditional B-side states induced by measuring the A output
/// of kappa(Phi_L); only labels with positive outcome probability appear.
inline Ensemble induced_ensemble(const OneWayLOCC& locc, int L) {
    const DensityMatrix sigma = apply_locc(locc, locc_input_state(locc, L));
    const std::vector<double> q = outcome_distribution(locc, L);
    const int d = locc.b_maps()[0].out_shape().total_dim();
    std::vector<double> probs;
    std::vector<DensityMatrix> states;
    for (std::size_t x = 0; x < q.size(); ++x) {
        if (q[x] < kBranchFloor) continue;
        probs.push_back(q[x]);
        states.emplace_back(locc.b_maps()[0].out_shape(),
                            sigma.entries().block(x * d, x * d, d, d) / q[x]);
    }
    return Ensemble(std::move(probs), std::move(states));
}

}  // namespace eoplab
