#pragma once

#include <utility>
#include <vector>

#include "eoplab/qmat.hpp"
#include "eoplab/random.hpp"

namespace eoplab {

namespace detail {

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace detail

/// Completely positive, trace-nonincreasing map in Kraus form.
class CPMap {
public:
    CPMap(SpaceShape in_shape, SpaceShape out_shape, std::vector<Eigen::MatrixXcd> kraus)
        : in_(std::move(in_shape)), out_(std::move(out_shape)), kraus_(std::move(kraus)) {
        if (kraus_.empty()) throw InvalidInput("CPMap: no Kraus operators");
        for (const auto& k : kraus_)
            if (k.rows() != out_.total_dim() || k.cols() != in_.total_dim())
                throw ShapeError("CPMap: Kraus operator is " + std::to_string(k.rows()) + "x" +
                                 std::to_string(k.cols()) + " for " + in_.to_string() + " -> " +
                                 out_.to_string());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(kraus_sum(), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().maxCoeff() > 1.0 + 1e-9)
            throw InvalidInput("CPMap: trace-increasing (max eigenvalue of sum K'K = " +
                               std::to_string(es.eigenvalues().maxCoeff()) + ")");
    }

    static CPMap identity(const SpaceShape& shape) {
        return CPMap(shape, shape,
                     {Eigen::MatrixXcd::Identity(shape.total_dim(), shape.total_dim())});
    }

    /// Trace-preserving map discarding the input and preparing `state`.
    static CPMap replace_with(const SpaceShape& in_shape, const DensityMatrix& state) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(state.entries());
        std::vector<Eigen::MatrixXcd> kraus;
        for (int m = 0; m < state.dim(); ++m) {
            const double ev = es.eigenvalues()(m);
            if (ev <= 0.0) continue;
            for (int k = 0; k < in_shape.total_dim(); ++k) {
                Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(state.dim(), in_shape.total_dim());
                op.col(k) = std::sqrt(ev) * es.eigenvectors().col(m);
                kraus.push_back(std::move(op));
            }
        }
        return CPMap(in_shape, state.shape(), std::move(kraus));
    }

    const SpaceShape& in_shape() const { return in_; }
    const SpaceShape& out_shape() const { return out_; }
    const std::vector<Eigen::MatrixXcd>& kraus() const { return kraus_; }

    Eigen::MatrixXcd kraus_sum() const {  // sum K'K on the input space
        Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(in_.total_dim(), in_.total_dim());
        for (const auto& k : kraus_) s += k.adjoint() * k;
        return s;
    }

    bool is_trace_preserving(double tolerance = 1e-9) const {
        const int d = in_.total_dim();
        return detail::max_abs(kraus_sum() - Eigen::MatrixXcd::Identity(d, d)) <= tolerance;
    }

private:
    SpaceShape in_, out_;
    std::vector<Eigen::MatrixXcd> kraus_;
};

/// CP-map-valued measure: branches indexed by the classical outcome, summing
/// to a trace-preserving map.
class Instrument {
public:
    explicit Instrument(std::vector<CPMap> branches) : branches_(std::move(branches)) {
        if (branches_.empty()) throw InvalidInput("Instrument: no branches");
        for (const auto& b : branches_)
            if (b.in_shape() != branches_[0].in_shape() || b.out_shape() != branches_[0].out_shape())
                throw ShapeError("Instrument: branches disagree on in/out shapes");
        Eigen::MatrixXcd s = branches_[0].kraus_sum();
        for (std::size_t i = 1; i < branches_.size(); ++i) s += branches_[i].kraus_sum();
        const int d = branches_[0].in_shape().total_dim();
        const double dev = detail::max_abs(s - Eigen::MatrixXcd::Identity(d, d));
        if (dev > 1e-9)
            throw InvalidInput("Instrument: completeness deviation " + std::to_string(dev));
    }

    const std::vector<CPMap>& branches() const { return branches_; }
    std::size_t num_branches() const { return branches_.size(); }
    const SpaceShape& in_shape() const { return branches_[0].in_shape(); }
    const SpaceShape& out_shape() const { return branches_[0].out_shape(); }

private:
    std::vector<CPMap> branches_;
};

/// kappa = sum_i kappa_{A,i} (x) kappa_{B,i}: an instrument on the A side whose
/// outcome i selects a trace-preserving map on the B side.
class OneWayLOCC {
public:
    OneWayLOCC(Instrument a_instrument, std::vector<CPMap> b_maps)
        : a_(std::move(a_instrument)), b_(std::move(b_maps)) {
        if (b_.size() != a_.num_branches())
            throw ShapeError("OneWayLOCC: " + std::to_string(a_.num_branches()) +
                             " instrument branches vs " + std::to_string(b_.size()) + " B maps");
        for (const auto& m : b_) {
            if (m.in_shape() != b_[0].in_shape() || m.out_shape() != b_[0].out_shape())
                throw ShapeError("OneWayLOCC: B maps disagree on in/out shapes");
            if (!m.is_trace_preserving())
                throw InvalidInput("OneWayLOCC: B map is not trace-preserving");
        }
    }

    const Instrument& a_instrument() const { return a_; }
    const std::vector<CPMap>& b_maps() const { return b_; }

private:
    Instrument a_;
    std::vector<CPMap> b_;
};

/// Number of distinct classical messages of the protocol.
inline int cc_size(const OneWayLOCC& locc) {
    return static_cast<int>(locc.a_instrument().num_branches());
}

struct UnnormalizedState {
    SpaceShape shape;
    Eigen::MatrixXcd entries;  // Hermitian PSD, trace <= 1
};

namespace detail {

/// Position of m's input factors as a contiguous run in `shape`.
inline std::size_t acted_run_start(const SpaceShape& shape, const SpaceShape& acted) {
    const std::size_t n = shape.num_factors(), k = acted.num_factors();
    if (k == 0 || k > n) throw ShapeError("apply: acted factors do not fit state shape");
    for (std::size_t s = 0; s + k <= n; ++s) {
        bool ok = true;
        for (std::size_t j = 0; j < k; ++j)
            if (shape.factor(s + j).label != acted.factor(j).label ||
                shape.factor(s + j).dim != acted.factor(j).dim)
                ok = false;
        if (ok) return s;
    }
    throw ShapeError("apply: state " + shape.to_string() + " has no contiguous run matching " +
                     acted.to_string());
}

inline Eigen::MatrixXcd lift_kraus(const Eigen::MatrixXcd& k, int pre_dim, int post_dim) {
    Eigen::MatrixXcd lifted = k;
    if (pre_dim > 1) lifted = kron(Eigen::MatrixXcd::Identity(pre_dim, pre_dim), lifted);
    if (post_dim > 1) lifted = kron(lifted, Eigen::MatrixXcd::Identity(post_dim, post_dim));
    return lifted;
}

inline std::pair<int, int> bystander_dims(const SpaceShape& shape, std::size_t start,
                                          std::size_t count) {
    int pre = 1, post = 1;
    for (std::size_t i = 0; i < start; ++i) pre *= shape.factor(i).dim;
    for (std::size_t i = start + count; i < shape.num_factors(); ++i) post *= shape.factor(i).dim;
    return {pre, post};
}

inline SpaceShape spliced_shape(const SpaceShape& shape, std::size_t start, std::size_t count,
                                const SpaceShape& replacement) {
    std::vector<Factor> f;
    for (std::size_t i = 0; i < start; ++i) f.push_back(shape.factor(i));
    for (const auto& r : replacement.factors()) f.push_back(r);
    for (std::size_t i = start + count; i < shape.num_factors(); ++i) f.push_back(shape.factor(i));
    return SpaceShape(std::move(f));
}

}  // namespace detail

/// Applies m to the matching contiguous factor run of rho, identity elsewhere.
/// The result is unnormalized when m is not trace-preserving.
inline UnnormalizedState apply_cp(const CPMap& m, const DensityMatrix& rho) {
    const std::size_t start = detail::acted_run_start(rho.shape(), m.in_shape());
    const auto [pre, post] =
        detail::bystander_dims(rho.shape(), start, m.in_shape().num_factors());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(pre * m.out_shape().total_dim() * post,
                                                  pre * m.out_shape().total_dim() * post);
    for (const auto& k : m.kraus()) {
        const Eigen::MatrixXcd lifted = detail::lift_kraus(k, pre, post);
        out += lifted * rho.entries() * lifted.adjoint();
    }
    return {detail::spliced_shape(rho.shape(), start, m.in_shape().num_factors(), m.out_shape()),
            ((out + out.adjoint()) / 2.0).eval()};
}

/// Heisenberg-picture adjoint: sum_k K' E K on the input space. E lives on the
/// output space of m.
inline Eigen::MatrixXcd adjoint_apply(const CPMap& m, const Eigen::MatrixXcd& e) {
    if (e.rows() != m.out_shape().total_dim() || e.cols() != e.rows())
        throw ShapeError("adjoint_apply: observable does not match output space");
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.in_shape().total_dim(), m.in_shape().total_dim());
    for (const auto& k : m.kraus()) out += k.adjoint() * e * k;
    return out;
}

/// Applies kappa = sum_i kappa_{A,i} (x) kappa_{B,i} to a bipartite state whose
/// leading factors form the A part and trailing factors the B part.
inline DensityMatrix apply_locc(const OneWayLOCC& locc, const DensityMatrix& rho) {
    const auto& a_in = locc.a_instrument().in_shape();
    const auto& b_in = locc.b_maps()[0].in_shape();
    const std::size_t a_start = detail::acted_run_start(rho.shape(), a_in);
    if (a_start != 0 || a_in.num_factors() + b_in.num_factors() != rho.shape().num_factors())
        throw ShapeError("apply_locc: state must factor as [A part, B part]");
    detail::acted_run_start(rho.shape(), a_in.tensor_with(b_in));  // validates the B run too

    const SpaceShape out_shape =
        locc.a_instrument().out_shape().tensor_with(locc.b_maps()[0].out_shape());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(out_shape.total_dim(), out_shape.total_dim());
    for (std::size_t i = 0; i < locc.a_instrument().num_branches(); ++i) {
        const auto& a_branch = locc.a_instrument().branches()[i];
        for (const auto& ka : a_branch.kraus())
            for (const auto& kb : locc.b_maps()[i].kraus()) {
                const Eigen::MatrixXcd k = detail::kron(ka, kb);
                out += k * rho.entries() * k.adjoint();
            }
    }
    const double tr = out.trace().real();
    if (std::abs(tr - 1.0) > 1e-9)
        throw InvalidInput("apply_locc: output trace " + std::to_string(tr));
    return DensityMatrix(out_shape, std::move(out));
}

// ---------------------------------------------------------------------------
// randomized protocol generation (verification suites)

/// Trace-preserving map with `kraus_count` Haar-flavored Kraus operators:
/// Gaussian blocks right-normalized by the inverse square root of their sum.
inline CPMap random_tp_map(std::mt19937_64& rng, const SpaceShape& in_shape,
                           const SpaceShape& out_shape, int kraus_count) {
    const int din = in_shape.total_dim(), dout = out_shape.total_dim();
    std::vector<Eigen::MatrixXcd> g;
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(din, din);
    for (int k = 0; k < kraus_count; ++k) {
        g.push_back(gaussian_complex(rng, dout, din));
        s += g.back().adjoint() * g.back();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s);
    const Eigen::MatrixXcd s_inv_sqrt = es.eigenvectors() *
                                        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                        es.eigenvectors().adjoint();
    for (auto& k : g) k = k * s_inv_sqrt;
    return CPMap(in_shape, out_shape, std::move(g));
}

/// Instrument with jointly normalized Gaussian Kraus blocks; completeness is
/// exact by construction.
inline Instrument random_instrument(std::mt19937_64& rng, const SpaceShape& in_shape,
                                    const SpaceShape& out_shape, int branches,
                                    int kraus_per_branch) {
    const CPMap joint = random_tp_map(rng, in_shape, out_shape, branches * kraus_per_branch);
    std::vector<CPMap> split;
    for (int b = 0; b < branches; ++b) {
        std::vector<Eigen::MatrixXcd> kraus(joint.kraus().begin() + b * kraus_per_branch,
                                            joint.kraus().begin() + (b + 1) * kraus_per_branch);
        split.emplace_back(in_shape, out_shape, std::move(kraus));
    }
    return Instrument(std::move(split));
}

/// Random one-way protocol: instrument A(L) -> X(x_dim), per-branch
/// trace-preserving maps B(L) -> B(d_out).
inline OneWayLOCC random_one_way_locc(std::mt19937_64& rng, int L, int x_dim, int d_out,
                                      int branches, int kraus_per_branch) {
    Instrument instr = random_instrument(rng, SpaceShape::single("A", L),
                                         SpaceShape::single("X", x_dim), branches,
                                         kraus_per_branch);
    std::vector<CPMap> b_maps;
    for (int i = 0; i < branches; ++i)
        b_maps.push_back(random_tp_map(rng, SpaceShape::single("B", L),
                                       SpaceShape::single("B", d_out), kraus_per_branch));
    return OneWayLOCC(std::move(instr), std::move(b_maps));
}

}  // namespace eoplab
