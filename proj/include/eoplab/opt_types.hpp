#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eoplab/qmat.hpp"

namespace eoplab {

struct OptimizerConfig {
    int restarts = 32;
    int max_iter = 500;
    std::uint64_t seed = 0;
    double tol = 1e-9;   // convergence: objective improvement over a 20-iteration window
    int ancilla_a2 = 0;  // 0 selects the default d_A * d_B
    int ancilla_b2 = 0;
};

enum class OptStatus { converged, budget_exhausted };

/// Bipartition of a state's factors plus ancilla dimensions for the A2/B2
/// reference spaces of a purification.
struct Cut {
    std::vector<std::string> a_labels;
    std::vector<std::string> b_labels;
    int a2_dim = 0;  // 0 selects the default d_A * d_B
    int b2_dim = 0;
};

struct ResolvedCut {
    std::vector<std::string> a_labels, b_labels;
    int a_dim = 1, b_dim = 1;
    int a2_dim = 1, b2_dim = 1;
};

/// Validates the cut against a state shape and applies ancilla defaults,
/// including the OptimizerConfig override.
inline ResolvedCut resolve_cut(const SpaceShape& shape, const Cut& cut,
                               const OptimizerConfig& cfg = {}) {
    ResolvedCut r;
    r.a_labels = cut.a_labels;
    r.b_labels = cut.b_labels;
    std::size_t covered = 0;
    for (const auto& l : r.a_labels) {
        r.a_dim *= shape.dim_of(l);
        ++covered;
    }
    for (const auto& l : r.b_labels) {
        r.b_dim *= shape.dim_of(l);
        ++covered;
        for (const auto& al : r.a_labels)
            if (al == l) throw ShapeError("cut: label '" + l + "' appears on both sides");
    }
    if (covered != shape.num_factors())
        throw ShapeError("cut: labels do not cover the state shape " + shape.to_string());
    const int dflt = r.a_dim * r.b_dim;
    r.a2_dim = cut.a2_dim > 0 ? cut.a2_dim : (cfg.ancilla_a2 > 0 ? cfg.ancilla_a2 : dflt);
    r.b2_dim = cut.b2_dim > 0 ? cut.b2_dim : (cfg.ancilla_b2 > 0 ? cfg.ancilla_b2 : dflt);
    if (r.a2_dim < 1 || r.b2_dim < 1) throw InvalidConfig("cut: ancilla dims must be >= 1");
    return r;
}

}  // namespace eoplab
