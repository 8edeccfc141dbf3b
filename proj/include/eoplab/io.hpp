#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eoplab/channels.hpp"
#include "eoplab/ensemble.hpp"
#include "eoplab/opt_types.hpp"
#include "eoplab/qmat.hpp"

namespace eoplab::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// writing. Numbers are emitted with 17 significant digits so that standard
// decimal parsing reproduces every double bit-exactly.

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline void write_real_rows(std::ostream& os, const Eigen::MatrixXcd& m, bool imaginary) {
    os << "[";
    for (int i = 0; i < m.rows(); ++i) {
        os << (i ? ", [" : "[");
        for (int j = 0; j < m.cols(); ++j) {
            if (j) os << ", ";
            os << format_double(imaginary ? m(i, j).imag() : m(i, j).real());
        }
        os << "]";
    }
    os << "]";
}

inline void write_shape(std::ostream& os, const std::vector<std::string>& labels,
                        const std::vector<int>& dims) {
    os << "{\"labels\": [";
    for (std::size_t i = 0; i < labels.size(); ++i)
        os << (i ? ", " : "") << json(labels[i]).dump();
    os << "], \"dims\": [";
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? ", " : "") << dims[i];
    os << "]}";
}

inline void write_matrix_object(std::ostream& os, const std::vector<std::string>& labels,
                                const std::vector<int>& dims, const Eigen::MatrixXcd& m) {
    os << "{\"shape\": ";
    write_shape(os, labels, dims);
    os << ", \"re\": ";
    write_real_rows(os, m, false);
    os << ", \"im\": ";
    write_real_rows(os, m, true);
    os << "}";
}

}  // namespace detail

inline void write_density_matrix(std::ostream& os, const DensityMatrix& rho) {
    std::vector<std::string> labels;
    std::vector<int> dims;
    for (const auto& f : rho.shape().factors()) {
        labels.push_back(f.label);
        dims.push_back(f.dim);
    }
    detail::write_matrix_object(os, labels, dims, rho.entries());
}

inline void write_ensemble(std::ostream& os, const Ensemble& e) {
    os << "{\"probs\": [";
    for (std::size_t x = 0; x < e.size(); ++x)
        os << (x ? ", " : "") << format_double(e.prob(x));
    os << "], \"states\": [";
    for (std::size_t x = 0; x < e.size(); ++x) {
        if (x) os << ", ";
        write_density_matrix(os, e.state(x));
    }
    os << "]}";
}

inline void write_protocol(std::ostream& os, const OneWayLOCC& locc) {
    auto write_kraus = [&os](const CPMap& m) {
        os << "[";
        for (std::size_t k = 0; k < m.kraus().size(); ++k) {
            if (k) os << ", ";
            std::vector<std::string> labels{"out", "in"};
            std::vector<int> dims{static_cast<int>(m.kraus()[k].rows()),
                                  static_cast<int>(m.kraus()[k].cols())};
            detail::write_matrix_object(os, labels, dims, m.kraus()[k]);
        }
        os << "]";
    };
    os << "{\"a_instrument\": [";
    for (std::size_t i = 0; i < locc.a_instrument().num_branches(); ++i) {
        if (i) os << ", ";
        write_kraus(locc.a_instrument().branches()[i]);
    }
    os << "], \"b_maps\": [";
    for (std::size_t i = 0; i < locc.b_maps().size(); ++i) {
        if (i) os << ", ";
        write_kraus(locc.b_maps()[i]);
    }
    os << "]}";
}

template <class T, class Writer>
std::string to_text(const T& value, Writer writer) {
    std::ostringstream os;
    writer(os, value);
    return os.str();
}

inline std::string density_matrix_text(const DensityMatrix& rho) {
    return to_text(rho, [](std::ostream& os, const DensityMatrix& v) { write_density_matrix(os, v); });
}
inline std::string ensemble_text(const Ensemble& e) {
    return to_text(e, [](std::ostream& os, const Ensemble& v) { write_ensemble(os, v); });
}
inline std::string protocol_text(const OneWayLOCC& l) {
    return to_text(l, [](std::ostream& os, const OneWayLOCC& v) { write_protocol(os, v); });
}

inline void save_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open file for writing", path);
    os << text << "\n";
}

// ---------------------------------------------------------------------------
// parsing

inline json parse_json(const std::string& text, const std::string& where) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& err) {
        throw ParseError(err.what(), where + ":byte " + std::to_string(err.byte));
    }
}

inline json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open file", path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_json(buf.str(), path);
}

namespace detail {

inline Eigen::MatrixXcd parse_complex_matrix(const json& j, const std::string& where) {
    if (!j.contains("re")) throw ParseError("matrix object lacks \"re\"", where);
    const json& re = j.at("re");
    const json* im = j.contains("im") ? &j.at("im") : nullptr;
    if (!re.is_array() || re.empty()) throw ParseError("\"re\" must be a nonempty array", where);
    const int rows = static_cast<int>(re.size());
    const int cols = static_cast<int>(re.at(0).size());
    Eigen::MatrixXcd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(re.at(i).size()) != cols)
            throw ParseError("ragged \"re\" rows", where + ":row " + std::to_string(i));
        for (int j2 = 0; j2 < cols; ++j2) {
            const double rv = re.at(i).at(j2).get<double>();
            const double iv = im ? im->at(i).at(j2).get<double>() : 0.0;
            m(i, j2) = Complex(rv, iv);
        }
    }
    return m;
}

inline SpaceShape parse_shape(const json& j, const std::string& where) {
    if (!j.contains("labels") || !j.contains("dims"))
        throw ParseError("shape needs \"labels\" and \"dims\"", where);
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (labels.size() != dims.size()) throw ParseError("labels/dims length mismatch", where);
    std::vector<Factor> factors;
    for (std::size_t i = 0; i < labels.size(); ++i) factors.push_back({labels[i], dims[i]});
    return SpaceShape(std::move(factors));
}

}  // namespace detail

inline DensityMatrix read_density_matrix(const json& j, const std::string& where = "state") {
    if (!j.contains("shape")) throw ParseError("state lacks \"shape\"", where);
    const SpaceShape shape = detail::parse_shape(j.at("shape"), where);
    try {
        return DensityMatrix(shape, detail::parse_complex_matrix(j, where));
    } catch (const std::invalid_argument& err) {
        throw ParseError(err.what(), where);
    }
}

inline Ensemble read_ensemble(const json& j, const std::string& where = "ensemble") {
    if (!j.contains("probs") || !j.contains("states"))
        throw ParseError("ensemble needs \"probs\" and \"states\"", where);
    const auto probs = j.at("probs").get<std::vector<double>>();
    std::vector<DensityMatrix> states;
    for (std::size_t x = 0; x < j.at("states").size(); ++x)
        states.push_back(
            read_density_matrix(j.at("states").at(x), where + ":state " + std::to_string(x)));
    try {
        return Ensemble(probs, std::move(states));
    } catch (const std::invalid_argument& err) {
        throw ParseError(err.what(), where);
    }
}

/// Protocol files list Kraus matrices per instrument branch and per decoder
/// map; in/out spaces are single factors with conventional labels, dims taken
/// from the matrices themselves.
inline OneWayLOCC read_protocol(const json& j, const std::string& where = "protocol") {
    if (!j.contains("a_instrument") || !j.contains("b_maps"))
        throw ParseError("protocol needs \"a_instrument\" and \"b_maps\"", where);
    auto read_kraus_list = [&](const json& branch, const std::string& ctx) {
        std::vector<Eigen::MatrixXcd> ops;
        for (std::size_t k = 0; k < branch.size(); ++k)
            ops.push_back(
                detail::parse_complex_matrix(branch.at(k), ctx + ":kraus " + std::to_string(k)));
        if (ops.empty()) throw ParseError("empty Kraus list", ctx);
        return ops;
    };
    try {
        std::vector<CPMap> branches;
        for (std::size_t i = 0; i < j.at("a_instrument").size(); ++i) {
            auto ops = read_kraus_list(j.at("a_instrument").at(i),
                                       where + ":branch " + std::to_string(i));
            branches.emplace_back(SpaceShape::single("A", static_cast<int>(ops[0].cols())),
                                  SpaceShape::single("X", static_cast<int>(ops[0].rows())),
                                  std::move(ops));
        }
        std::vector<CPMap> b_maps;
        for (std::size_t i = 0; i < j.at("b_maps").size(); ++i) {
            auto ops = read_kraus_list(j.at("b_maps").at(i),
                                       where + ":b_map " + std::to_string(i));
            b_maps.emplace_back(SpaceShape::single("B", static_cast<int>(ops[0].cols())),
                                SpaceShape::single("B", static_cast<int>(ops[0].rows())),
                                std::move(ops));
        }
        return OneWayLOCC(Instrument(std::move(branches)), std::move(b_maps));
    } catch (const std::invalid_argument& err) {
        throw ParseError(err.what(), where);
    }
}

inline OptimizerConfig read_optimizer_config(const json& j, const std::string& where = "config") {
    OptimizerConfig cfg;
    if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
    if (j.contains("max_iter")) cfg.max_iter = j.at("max_iter").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
    if (j.contains("ancilla")) {
        const json& a = j.at("ancilla");
        if (a.contains("a2")) cfg.ancilla_a2 = a.at("a2").get<int>();
        if (a.contains("b2")) cfg.ancilla_b2 = a.at("b2").get<int>();
    }
    if (cfg.restarts < 1 || cfg.max_iter < 1)
        throw ParseError("restarts and max_iter must be positive", where);
    return cfg;
}

}  // namespace eoplab::io
