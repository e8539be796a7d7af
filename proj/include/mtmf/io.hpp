#pragma once

// JSON problem-file loaders: series literals, quadrature specs, and linear
// ODE boundary problems.

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "mtmf/expr.hpp"
#include "mtmf/mtmf.hpp"
#include "mtmf/ode.hpp"
#include "mtmf/quadrature.hpp"

namespace mtmf {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace io_detail {

inline nlohmann::json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return j;
}

inline Expr parse_field(const nlohmann::json& j, const std::string& key, std::size_t arity,
                        bool allow_n = false) {
    if (!j.contains(key)) throw IoError("missing field \"" + key + "\"");
    if (!j[key].is_string()) throw IoError("field \"" + key + "\" must be an expression string");
    try {
        return parse(j[key].get<std::string>(), arity, {allow_n});
    } catch (const ParseError& e) {
        throw IoError("field \"" + key + "\": " + e.what());
    }
}

// [exprs] | {"gen": "<n-expression>"}
inline CoefficientFamily family_from_json(const nlohmann::json& j, std::size_t arity) {
    if (j.is_object() && j.contains("gen")) {
        try {
            return CoefficientFamily::generator(
                parse(j["gen"].get<std::string>(), arity, {true}));
        } catch (const ParseError& e) {
            throw IoError(std::string("generator expression: ") + e.what());
        }
    }
    if (!j.is_array()) throw IoError("coefficient family must be a list or {\"gen\": ...}");
    std::vector<Coefficient> coeffs;
    for (const auto& item : j) {
        if (!item.is_string()) throw IoError("coefficient entries must be expression strings");
        try {
            coeffs.emplace_back(parse(item.get<std::string>(), arity));
        } catch (const ParseError& e) {
            throw IoError(std::string("coefficient expression: ") + e.what());
        }
    }
    return CoefficientFamily::explicit_list(std::move(coeffs));
}

inline TruncationPolicy trunc_from_json(const nlohmann::json& j) {
    TruncationPolicy t;
    if (j.contains("max_terms")) t.max_terms = j["max_terms"].get<std::size_t>();
    if (j.contains("abs_tol")) t.abs_tol = j["abs_tol"].get<double>();
    if (j.contains("consecutive_small"))
        t.consecutive_small = j["consecutive_small"].get<std::size_t>();
    return t;
}

}  // namespace io_detail

inline Mtmf mtmf_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw IoError("series literal must be a JSON object");
    Mtmf f;
    if (!j.contains("arity")) throw IoError("missing field \"arity\"");
    f.arity = j["arity"].get<std::size_t>();
    if (f.arity == 0) throw IoError("arity must be at least 1");
    if (!j.contains("B")) throw IoError("missing field \"B\"");
    try {
        f.B = IndexSet::parse(j["B"].get<std::string>());
    } catch (const IndexSetError& e) {
        throw IoError(std::string("field \"B\": ") + e.what());
    }
    if (!j.contains("a")) throw IoError("missing field \"a\"");
    f.a = io_detail::family_from_json(j["a"], f.arity);
    f.g = Coefficient(io_detail::parse_field(j, "g", f.arity));
    if (j.contains("trunc")) f.trunc = io_detail::trunc_from_json(j["trunc"]);
    return f;
}

inline Mtmf load_mtmf(const std::string& path) {
    return mtmf_from_json(io_detail::load_file(path));
}

inline QuadratureSpec quad_from_json(const nlohmann::json& j) {
    QuadratureSpec spec;
    if (!j.contains("box")) throw IoError("quadrature spec missing \"box\"");
    for (const auto& iv : j["box"]) {
        if (!iv.is_array() || iv.size() != 2)
            throw IoError("box entries must be [lo, hi] pairs");
        spec.box.push_back({iv[0].get<double>(), iv[1].get<double>()});
    }
    if (j.contains("order")) spec.order = j["order"].get<unsigned>();
    if (j.contains("rel_tol")) spec.rel_tol = j["rel_tol"].get<double>();
    if (j.contains("abs_tol")) spec.abs_tol = j["abs_tol"].get<double>();
    return spec;
}

inline QuadratureSpec load_quad(const std::string& path) {
    return quad_from_json(io_detail::load_file(path));
}

inline LodeProblem lode_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw IoError("problem file must be a JSON object");
    LodeProblem prob;
    if (!j.contains("m")) throw IoError("missing field \"m\"");
    prob.m = j["m"].get<std::size_t>();
    if (prob.m == 0) throw IoError("order m must be at least 1");
    if (!j.contains("p") || !j["p"].is_array() || j["p"].size() != prob.m + 1)
        throw IoError("field \"p\" must list the m+1 coefficients p_0..p_m");
    prob.p.clear();
    for (const auto& item : j["p"]) {
        try {
            prob.p.push_back(parse(item.get<std::string>(), 1));
        } catch (const ParseError& e) {
            throw IoError(std::string("coefficient in \"p\": ") + e.what());
        }
    }
    if (!j.contains("interval") || !j["interval"].is_array() || j["interval"].size() != 2)
        throw IoError("field \"interval\" must be [a, b]");
    prob.interval = {j["interval"][0].get<double>(), j["interval"][1].get<double>()};
    if (!j.contains("B")) throw IoError("missing field \"B\"");
    try {
        prob.B = IndexSet::parse(j["B"].get<std::string>());
    } catch (const IndexSetError& e) {
        throw IoError(std::string("field \"B\": ") + e.what());
    }
    if (!j.contains("h_n")) throw IoError("missing field \"h_n\"");
    prob.h_n = io_detail::family_from_json(j["h_n"], 1);
    prob.h_g = io_detail::parse_field(j, "h_g", 1);
    auto matrix = [&](const char* key) {
        if (!j.contains(key)) throw IoError(std::string("missing boundary matrix \"") + key + "\"");
        std::vector<std::vector<double>> m;
        for (const auto& row : j[key]) m.push_back(row.get<std::vector<double>>());
        return m;
    };
    prob.M = matrix("M");
    prob.N = matrix("N");
    prob.x0 = j.contains("x0") ? j["x0"].get<double>() : prob.interval.lo;
    if (j.contains("flavor")) {
        std::string f = j["flavor"].get<std::string>();
        if (f == "static")
            prob.flavor = LodeFlavor::Static;
        else if (f == "spacetime")
            prob.flavor = LodeFlavor::SpaceTime;
        else if (f == "pde_t")
            prob.flavor = LodeFlavor::PdeT;
        else
            throw IoError("unknown flavor: " + f);
    }
    // boundary data extension: the spec's boundary functional values r_j;
    // defaults to the zero vector
    if (j.contains("bc_rhs")) prob.bc_rhs = j["bc_rhs"].get<std::vector<double>>();
    if (j.contains("trunc")) prob.trunc = io_detail::trunc_from_json(j["trunc"]);
    return prob;
}

inline LodeProblem load_lode(const std::string& path) {
    return lode_from_json(io_detail::load_file(path));
}

}  // namespace mtmf
