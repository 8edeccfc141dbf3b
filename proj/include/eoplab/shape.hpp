#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "eoplab/errors.hpp"

namespace eoplab {

struct Factor {
    std::string label;
    int dim = 0;
};

/// An ordered tensor factorization of a Hilbert space. Each factor carries a
/// unique subsystem label (e.g. "A", "B", "X", "A2"); composite indices are
/// row-major over the factor list.
class SpaceShape {
public:
    SpaceShape() = default;

    explicit SpaceShape(std::vector<Factor> factors) : factors_(std::move(factors)) {
        for (const auto& f : factors_) {
            if (f.dim <= 0) throw ShapeError("factor '" + f.label + "' has nonpositive dimension");
        }
        for (std::size_t i = 0; i < factors_.size(); ++i)
            for (std::size_t j = i + 1; j < factors_.size(); ++j)
                if (factors_[i].label == factors_[j].label)
                    throw ShapeError("duplicate factor label '" + factors_[i].label + "'");
    }

    static SpaceShape single(std::string label, int dim) {
        return SpaceShape({Factor{std::move(label), dim}});
    }

    int total_dim() const {
        int d = 1;
        for (const auto& f : factors_) d *= f.dim;
        return d;
    }

    std::size_t num_factors() const { return factors_.size(); }
    const Factor& factor(std::size_t i) const { return factors_.at(i); }
    const std::vector<Factor>& factors() const { return factors_; }

    bool has_label(const std::string& label) const {
        return std::any_of(factors_.begin(), factors_.end(),
                           [&](const Factor& f) { return f.label == label; });
    }

    std::size_t position(const std::string& label) const {
        for (std::size_t i = 0; i < factors_.size(); ++i)
            if (factors_[i].label == label) return i;
        throw ShapeError("unknown factor label '" + label + "'");
    }

    int dim_of(const std::string& label) const { return factors_[position(label)].dim; }

    /// Product of the dimensions of the given labels (each must exist).
    int dim_of(const std::vector<std::string>& labels) const {
        int d = 1;
        for (const auto& l : labels) d *= dim_of(l);
        return d;
    }

    /// Subshape consisting of the named factors, kept in their original order.
    SpaceShape subshape(const std::vector<std::string>& labels) const {
        std::vector<Factor> kept;
        for (const auto& f : factors_)
            if (std::find(labels.begin(), labels.end(), f.label) != labels.end()) kept.push_back(f);
        if (kept.size() != labels.size()) {
            for (const auto& l : labels) position(l);  // throws on the missing one
        }
        return SpaceShape(std::move(kept));
    }

    SpaceShape tensor_with(const SpaceShape& other) const {
        std::vector<Factor> all = factors_;
        all.insert(all.end(), other.factors_.begin(), other.factors_.end());
        return SpaceShape(std::move(all));  // re-validates label uniqueness
    }

    SpaceShape relabeled(const std::vector<std::string>& labels) const {
        if (labels.size() != factors_.size())
            throw ShapeError("relabel: expected " + std::to_string(factors_.size()) + " labels");
        std::vector<Factor> out = factors_;
        for (std::size_t i = 0; i < out.size(); ++i) out[i].label = labels[i];
        return SpaceShape(std::move(out));
    }

    /// Row-major strides, one per factor.
    std::vector<int> strides() const {
        std::vector<int> s(factors_.size(), 1);
        for (int i = static_cast<int>(factors_.size()) - 2; i >= 0; --i)
            s[i] = s[i + 1] * factors_[i + 1].dim;
        return s;
    }

    bool operator==(const SpaceShape& other) const {
        if (factors_.size() != other.factors_.size()) return false;
        for (std::size_t i = 0; i < factors_.size(); ++i)
            if (factors_[i].label != other.factors_[i].label ||
                factors_[i].dim != other.factors_[i].dim)
                return false;
        return true;
    }
    bool operator!=(const SpaceShape& other) const { return !(*this == other); }

    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (i) s += "*";
            s += factors_[i].label + "(" + std::to_string(factors_[i].dim) + ")";
        }
        return s.empty() ? "scalar" : s;
    }

private:
    std::vector<Factor> factors_;
};

}  // namespace eoplab
