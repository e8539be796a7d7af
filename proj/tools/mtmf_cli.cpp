// Command-line front door: parses problem files, dispatches to the library
// modules, and emits plain-text scalars or CSV tables with error estimates.
//
// Exit codes: 0 success, 1 input error, 2 internal gate failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mtmf/calculus.hpp"
#include "mtmf/geometry.hpp"
#include "mtmf/io.hpp"
#include "mtmf/lie.hpp"
#include "mtmf/mtmf.hpp"
#include "mtmf/ode.hpp"
#include "mtmf/special.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitGate = 2;

struct CommonFlags {
    std::optional<double> tol;
    std::optional<std::size_t> max_terms;
    std::size_t grid = 201;
    std::string emit_csv;
    bool quiet = false;
};

bool g_quiet = false;

void say(const std::string& line) {
    if (!g_quiet) std::cout << line << "\n";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void apply_flags(mtmf::Mtmf& f, const CommonFlags& c) {
    if (c.tol) f.trunc.abs_tol = *c.tol;
    if (c.max_terms) f.trunc.max_terms = *c.max_terms;
}

mtmf::QuadratureSpec quad_for(const std::string& quad_file, const std::vector<double>& box_flat,
                              std::size_t arity, const CommonFlags& c) {
    mtmf::QuadratureSpec spec;
    if (!quad_file.empty()) {
        spec = mtmf::load_quad(quad_file);
    } else if (!box_flat.empty()) {
        if (box_flat.size() != 2 * arity)
            throw mtmf::IoError("--box needs lo hi pairs for every axis");
        for (std::size_t ax = 0; ax < arity; ++ax)
            spec.box.push_back({box_flat[2 * ax], box_flat[2 * ax + 1]});
    } else {
        for (std::size_t ax = 0; ax < arity; ++ax) spec.box.push_back({0.0, 1.0});
    }
    if (c.tol) spec.abs_tol = *c.tol;
    return spec;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw mtmf::IoError("cannot write CSV file: " + path);
    return out;
}

// render dense ascending coefficients as an integer polynomial over a small
// common denominator, e.g. (3*x1^2 - 1)/2
std::string pretty_poly(const std::vector<double>& c) {
    long denom = 0;
    for (long d = 1; d <= 40320; ++d) {
        bool ok = true;
        for (double v : c) {
            double s = v * d;
            if (std::fabs(s - std::round(s)) > 1e-9 * std::max(1.0, std::fabs(s))) {
                ok = false;
                break;
            }
        }
        if (ok) {
            denom = d;
            break;
        }
    }
    if (denom == 0) return "";
    std::string num;
    int printed = 0;
    for (std::size_t i = c.size(); i-- > 0;) {
        long long n = std::llround(c[i] * denom);
        if (n == 0 && c.size() > 1) continue;
        std::string sign = n < 0 ? (printed ? " - " : "-") : (printed ? " + " : "");
        unsigned long long mag = n < 0 ? -n : n;
        std::string term;
        if (i == 0)
            term = std::to_string(mag);
        else {
            std::string var = i == 1 ? "x1" : "x1^" + std::to_string(i);
            term = mag == 1 ? var : std::to_string(mag) + "*" + var;
        }
        num += sign + term;
        ++printed;
    }
    if (num.empty()) num = "0";
    if (denom == 1) return num;
    return "(" + num + ")/" + std::to_string(denom);
}

mtmf::PolynomialFamily family_by_name(const std::string& name, double alpha, double beta) {
    if (name == "chebyshev1") return mtmf::PolynomialFamily::chebyshev_first();
    if (name == "chebyshev2") return mtmf::PolynomialFamily::chebyshev_second();
    if (name == "hermite") return mtmf::PolynomialFamily::hermite();
    if (name == "jacobi") return mtmf::PolynomialFamily::jacobi(alpha, beta);
    if (name == "laguerre") return mtmf::PolynomialFamily::laguerre();
    if (name == "legendre") return mtmf::PolynomialFamily::legendre();
    throw mtmf::IoError("unknown polynomial family: " + name +
                        " (expected chebyshev1, chebyshev2, hermite, jacobi, laguerre, "
                        "legendre)");
}

// lie-solve accepts expressions over x (independent) and y (state)
std::string xy_to_axes(const std::string& text) {
    std::string s = std::regex_replace(text, std::regex("\\by\\b"), "x2");
    return std::regex_replace(s, std::regex("\\bx\\b"), "x1");
}

int run(int argc, char** argv) {
    CLI::App app{"Taylor-series function space toolkit"};
    app.require_subcommand(1);
    CommonFlags common;
    app.add_option("--tol", common.tol, "tolerance override for truncation/quadrature");
    app.add_option("--max-terms", common.max_terms, "series truncation length override");
    app.add_option("--grid", common.grid, "report grid size");
    app.add_option("--emit-csv", common.emit_csv, "write tabular output to this CSV path");
    app.add_flag("--quiet", common.quiet, "suppress narration, keep results");

    // eval <file> --at x... [--t v]
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a series literal at a point");
    std::string eval_file;
    std::vector<double> eval_at;
    double eval_t = 0.0;
    eval_cmd->add_option("file", eval_file)->required();
    eval_cmd->add_option("--at", eval_at, "evaluation point")->required()->expected(-1);
    eval_cmd->add_option("--t", eval_t, "time value");

    // inner/norm/distance/gram-schmidt
    std::vector<std::string> geo_files;
    std::string geo_quad;
    std::vector<double> geo_box;
    auto add_geo = [&](const char* name, const char* help, int nfiles) {
        auto* sc = app.add_subcommand(name, help);
        sc->add_option("files", geo_files, "series literal files")
            ->required()
            ->expected(nfiles == 0 ? -2 : nfiles);
        sc->add_option("--quad", geo_quad, "quadrature spec file");
        sc->add_option("--box", geo_box, "integration box: lo hi per axis")->expected(-1);
        return sc;
    };
    auto* inner_cmd = add_geo("inner", "inner product of two series", 2);
    auto* norm_cmd = add_geo("norm", "norm of a series", 1);
    auto* dist_cmd = add_geo("distance", "distance between two series", 2);
    auto* gs_cmd = add_geo("gram-schmidt", "orthonormalize a list of series", 0);

    // poly <family> <n>
    auto* poly_cmd = app.add_subcommand("poly", "orthogonal polynomial via the Rodrigues form");
    std::string poly_family;
    std::uint64_t poly_n = 0;
    double fam_alpha = 0.0, fam_beta = 0.0;
    poly_cmd->add_option("family", poly_family)->required();
    poly_cmd->add_option("n", poly_n)->required();
    poly_cmd->add_option("--alpha", fam_alpha, "Jacobi alpha");
    poly_cmd->add_option("--beta", fam_beta, "Jacobi beta");

    // ortho <family> <n_max>
    auto* ortho_cmd = app.add_subcommand("ortho", "weighted Gram matrix of a family");
    std::string ortho_family;
    std::uint64_t ortho_nmax = 4;
    ortho_cmd->add_option("family", ortho_family)->required();
    ortho_cmd->add_option("n_max", ortho_nmax)->required();
    ortho_cmd->add_option("--alpha", fam_alpha, "Jacobi alpha");
    ortho_cmd->add_option("--beta", fam_beta, "Jacobi beta");

    // zeta <x...>
    auto* zeta_cmd = app.add_subcommand("zeta", "Riemann zeta at the sum of the arguments");
    std::vector<double> zeta_args;
    zeta_cmd->add_option("x", zeta_args)->required()->expected(-1);

    // hyp <a;b;x>
    auto* hyp_cmd = app.add_subcommand("hyp", "generalized hypergeometric pFq(a; b; x)");
    std::string hyp_spec;
    hyp_cmd->add_option("abx", hyp_spec, "semicolon-separated: a-list; b-list; x")->required();

    // deriv <file> --axis j --order k --at x...
    auto* deriv_cmd = app.add_subcommand("deriv", "k-th partial derivative of a series");
    std::string deriv_file;
    std::size_t deriv_axis = 1, deriv_order = 1;
    std::vector<double> deriv_at;
    deriv_cmd->add_option("file", deriv_file)->required();
    deriv_cmd->add_option("--axis", deriv_axis, "1-based axis");
    deriv_cmd->add_option("--order", deriv_order, "derivative order k");
    deriv_cmd->add_option("--at", deriv_at, "evaluation point")->required()->expected(-1);

    // ode-solve <file> [--grid n] [--emit-csv] [--t v]
    auto* ode_cmd = app.add_subcommand("ode-solve", "linear boundary problem solver");
    std::string ode_file;
    double ode_t = 1.0;
    ode_cmd->add_option("file", ode_file)->required();
    ode_cmd->add_option("--t", ode_t, "time value for time-variant flavors");

    // lie-solve --h "<expr in x,y>" --order N [--check-interval a b]
    auto* lie_cmd = app.add_subcommand("lie-solve", "nonlinear y' = h(x, y), y(0) = 0");
    std::string lie_h;
    std::size_t lie_order = 7;
    std::vector<double> lie_check;
    lie_cmd->set_help_flag("--help", "print help");  // frees -h for the field option
    lie_cmd->add_option("--h", lie_h, "field h as an expression in x and y")->required();
    lie_cmd->add_option("--order", lie_order, "series order N");
    lie_cmd->add_option("--check-interval", lie_check, "compare against a numeric solve")
        ->expected(2);

    // approx <file> --j J --k K [--box ...]
    auto* approx_cmd = app.add_subcommand("approx", "dyadic simple-function approximation");
    std::string approx_file;
    unsigned approx_j = 4, approx_k = 4;
    std::vector<double> approx_box;
    approx_cmd->add_option("file", approx_file)->required();
    approx_cmd->add_option("--j", approx_j, "value-grid exponent");
    approx_cmd->add_option("--k", approx_k, "level-grid exponent");
    approx_cmd->add_option("--box", approx_box, "domain box: lo hi per axis")->expected(-1);

    // let the shared flags (--tol, --grid, ...) appear after the verb too
    for (auto* sc : app.get_subcommands([](const CLI::App*) { return true; }))
        sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }
    g_quiet = common.quiet;

    if (eval_cmd->parsed()) {
        mtmf::Mtmf f = mtmf::load_mtmf(eval_file);
        apply_flags(f, common);
        if (eval_at.size() != f.arity) throw mtmf::IoError("--at arity mismatch");
        mtmf::EvalReport rep = mtmf::evaluate(f, eval_at, eval_t);
        std::cout << "value = " << fmt(rep.value) << " (terms=" << rep.terms
                  << (rep.converged ? ", converged" : ", NOT converged")
                  << ", tol=" << fmt(f.trunc.abs_tol) << ")\n";
        if (!rep.converged) {
            std::cerr << "gate failure: series did not converge within " << f.trunc.max_terms
                      << " terms\n";
            return kExitGate;
        }
        return kExitOk;
    }

    if (inner_cmd->parsed() || norm_cmd->parsed() || dist_cmd->parsed()) {
        std::vector<mtmf::Mtmf> fs;
        for (const auto& path : geo_files) {
            fs.push_back(mtmf::load_mtmf(path));
            apply_flags(fs.back(), common);
        }
        mtmf::QuadratureSpec quad = quad_for(geo_quad, geo_box, fs[0].arity, common);
        double tol = std::max(quad.abs_tol, quad.rel_tol);
        if (inner_cmd->parsed()) {
            double v = mtmf::inner_product(fs[0], fs[1], quad);
            std::cout << "inner = " << fmt(v) << " (quad tol=" << fmt(tol) << ")\n";
        } else if (norm_cmd->parsed()) {
            double v = mtmf::norm(fs[0], quad);
            std::cout << "norm = " << fmt(v) << " (quad tol=" << fmt(tol) << ")\n";
        } else {
            double v = mtmf::distance(fs[0], fs[1], quad);
            std::cout << "distance = " << fmt(v) << " (quad tol=" << fmt(tol) << ")\n";
        }
        return kExitOk;
    }

    if (gs_cmd->parsed()) {
        std::vector<mtmf::Mtmf> fs;
        for (const auto& path : geo_files) {
            fs.push_back(mtmf::load_mtmf(path));
            apply_flags(fs.back(), common);
        }
        mtmf::QuadratureSpec quad = quad_for(geo_quad, geo_box, fs[0].arity, common);
        std::vector<mtmf::Mtmf> ortho = mtmf::gram_schmidt(fs, quad);
        double tol = std::max(quad.abs_tol, quad.rel_tol);
        say("orthonormalized " + std::to_string(ortho.size()) + " series (quad tol=" +
            fmt(tol) + ")");
        std::ostringstream csv;
        csv << "i,j,inner,quad_tol\n";
        double worst = 0.0;
        for (std::size_t i = 0; i < ortho.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double v = mtmf::inner_product(ortho[i], ortho[j], quad);
                worst = std::max(worst, std::fabs(v - (i == j ? 1.0 : 0.0)));
                csv << i << "," << j << "," << fmt(v) << "," << fmt(tol) << "\n";
            }
        if (!common.emit_csv.empty())
            open_csv(common.emit_csv) << csv.str();
        else
            std::cout << csv.str();
        say("max Gram deviation from identity = " + fmt(worst));
        return kExitOk;
    }

    if (poly_cmd->parsed()) {
        mtmf::PolynomialFamily fam = family_by_name(poly_family, fam_alpha, fam_beta);
        mtmf::Expr p = mtmf::rodrigues_poly(fam, poly_n);
        std::vector<double> coeffs = mtmf::poly_coefficients(p);
        std::string pretty = pretty_poly(coeffs);
        std::cout << (pretty.empty() ? mtmf::to_string(p) : pretty) << "\n";
        return kExitOk;
    }

    if (ortho_cmd->parsed()) {
        mtmf::PolynomialFamily fam = family_by_name(ortho_family, fam_alpha, fam_beta);
        mtmf::QuadratureSpec tols;
        if (common.tol) tols.abs_tol = *common.tol;
        auto gram = mtmf::orthogonality_matrix(fam, ortho_nmax, tols);
        std::ostringstream csv;
        csv << "m,n,inner,quad_tol\n";
        double off = 0.0;
        for (std::size_t m = 0; m < gram.size(); ++m)
            for (std::size_t n = 0; n < gram.size(); ++n) {
                if (m != n) off = std::max(off, std::fabs(gram[m][n]));
                csv << m << "," << n << "," << fmt(gram[m][n]) << "," << fmt(tols.abs_tol)
                    << "\n";
            }
        if (!common.emit_csv.empty())
            open_csv(common.emit_csv) << csv.str();
        else
            std::cout << csv.str();
        say("max off-diagonal magnitude = " + fmt(off));
        if (off > 1e-8) {
            std::cerr << "gate failure: orthogonality off-diagonal " << fmt(off)
                      << " exceeds 1e-8\n";
            return kExitGate;
        }
        return kExitOk;
    }

    if (zeta_cmd->parsed()) {
        double s = 0.0;
        for (double v : zeta_args) s += v;
        mtmf::ZetaResult z = mtmf::zeta_detailed(s);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.8f", z.value);
        std::cout << buf << " (error bound <= " << fmt(z.error_bound) << ")\n";
        return kExitOk;
    }

    if (hyp_cmd->parsed()) {
        auto split = [](const std::string& s, char sep) {
            std::vector<std::string> parts;
            std::string cur;
            for (char ch : s) {
                if (ch == sep) {
                    parts.push_back(cur);
                    cur.clear();
                } else {
                    cur += ch;
                }
            }
            parts.push_back(cur);
            return parts;
        };
        std::vector<std::string> parts = split(hyp_spec, ';');
        if (parts.size() != 3)
            throw mtmf::IoError("hyp argument must be \"a1,a2;b1;x\" (lists may be empty)");
        auto numbers = [&](const std::string& s) {
            std::vector<double> out;
            if (s.empty()) return out;
            for (const auto& tok : split(s, ',')) out.push_back(std::stod(tok));
            return out;
        };
        mtmf::TruncationPolicy tp;
        tp.max_terms = common.max_terms.value_or(200);
        if (common.tol) tp.abs_tol = *common.tol;
        mtmf::HypResult r =
            mtmf::hypergeometric(numbers(parts[0]), numbers(parts[1]), std::stod(parts[2]), tp);
        std::cout << "value = " << fmt(r.value) << " (terms=" << r.terms
                  << (r.terminated ? ", terminating" : "")
                  << (r.diverged ? ", DIVERGENT series" : "")
                  << ", tol=" << fmt(tp.abs_tol) << ")\n";
        if (r.diverged) {
            std::cerr << "gate failure: series diverges for these parameters\n";
            return kExitGate;
        }
        return kExitOk;
    }

    if (deriv_cmd->parsed()) {
        mtmf::Mtmf f = mtmf::load_mtmf(deriv_file);
        apply_flags(f, common);
        if (deriv_at.size() != f.arity) throw mtmf::IoError("--at arity mismatch");
        if (deriv_axis < 1 || deriv_axis > f.arity)
            throw mtmf::IoError("--axis must be in 1.." + std::to_string(f.arity));
        mtmf::DerivativeEvaluator d = mtmf::dk_general(f, deriv_axis - 1, deriv_order);
        double v = d(deriv_at, 0.0);
        double fd = mtmf::fd_check(f, d, deriv_at, deriv_axis - 1, deriv_order, 0.0);
        std::cout << "deriv = " << fmt(v) << " (fd check error=" << fmt(fd) << ")\n";
        return kExitOk;
    }

    if (ode_cmd->parsed()) {
        mtmf::LodeProblem prob = mtmf::load_lode(ode_file);
        if (common.max_terms) prob.trunc.max_terms = *common.max_terms;
        const mtmf::LodeSolution* solp = nullptr;
        mtmf::LodeSolution sol;
        std::optional<mtmf::SpacetimeSolver> solver;
        if (prob.flavor == mtmf::LodeFlavor::Static) {
            sol = mtmf::general_solution(prob);
            solp = &sol;
        } else {
            solver.emplace(prob);
            solp = &solver->cached_solution();
            say("time-variant flavor: space solves cached, reporting t=" + fmt(ode_t));
        }
        say("boundary condition number estimate = " + fmt(solp->condition));
        std::ostringstream csv;
        csv << "x,y,residual\n";
        double a = prob.interval.lo, b = prob.interval.hi;
        std::size_t grid = std::max<std::size_t>(common.grid, 2);
        for (std::size_t i = 0; i < grid; ++i) {
            double x = a + (b - a) * static_cast<double>(i) / (grid - 1);
            double y;
            if (prob.flavor == mtmf::LodeFlavor::Static) {
                y = solp->value(x);
            } else {
                double pt[1] = {x};
                y = mtmf::evaluate(solver->at_time(ode_t), {pt, 1}).value;
            }
            double Ly = 0.0;
            for (std::size_t l = 0; l <= prob.m; ++l)
                Ly += solp->basis->p_at(l, x) * solp->deriv(l, x);
            double h = 0.0;
            for (std::size_t idx = 0; idx < solp->members.size(); ++idx) {
                std::uint64_t n = solp->members[idx];
                h += solp->problem.h_n.at(n)({&x, 1}, 0.0) *
                     mtmf::detail::ipow(mtmf::eval(solp->problem.h_g, {x}), n) /
                     mtmf::factorial(n);
            }
            csv << fmt(x) << "," << fmt(y) << "," << fmt(Ly - h) << "\n";
        }
        if (!common.emit_csv.empty())
            open_csv(common.emit_csv) << csv.str();
        else if (!common.quiet)
            std::cout << csv.str();
        say("equation residual sup = " + fmt(solp->equation_residual) + " (gate 1e-6)");
        double bmax = 0.0;
        for (double r : solp->boundary_residuals) bmax = std::max(bmax, r);
        say("boundary residual max = " + fmt(bmax) + " (gate 1e-8)");
        if (solp->equation_residual > 1e-6 || bmax > 1e-8) {
            std::cerr << "gate failure: residuals exceed the acceptance thresholds\n";
            return kExitGate;
        }
        return kExitOk;
    }

    if (lie_cmd->parsed()) {
        mtmf::Expr h = mtmf::parse(xy_to_axes(lie_h), 2);
        mtmf::NlodeSolution sol = mtmf::nlode_solve(h, lie_order);
        std::ostringstream csv;
        csv << "n,a_n\n";
        for (std::size_t n = 0; n < sol.a.size(); ++n)
            csv << n << "," << fmt(sol.a[n]) << "\n";
        if (!common.emit_csv.empty())
            open_csv(common.emit_csv) << csv.str();
        else
            std::cout << csv.str();
        if (!sol.complete) {
            std::cerr << "gate failure: node budget reached before order " << lie_order
                      << "; lower --order or raise the budget\n";
            return kExitGate;
        }
        if (lie_check.size() == 2) {
            double sup = mtmf::nlode_check(h, sol, lie_check[0], lie_check[1]);
            std::cout << "numeric check sup error = " << fmt(sup) << " on ["
                      << fmt(lie_check[0]) << ", " << fmt(lie_check[1]) << "]\n";
        }
        return kExitOk;
    }

    if (approx_cmd->parsed()) {
        mtmf::Mtmf f = mtmf::load_mtmf(approx_file);
        apply_flags(f, common);
        std::vector<mtmf::Interval> box;
        if (approx_box.empty()) {
            for (std::size_t ax = 0; ax < f.arity; ++ax) box.push_back({0.0, 1.0});
        } else {
            if (approx_box.size() != 2 * f.arity)
                throw mtmf::IoError("--box needs lo hi pairs for every axis");
            for (std::size_t ax = 0; ax < f.arity; ++ax)
                box.push_back({approx_box[2 * ax], approx_box[2 * ax + 1]});
        }
        if (f.arity != 1)
            throw mtmf::IoError("approx reporting currently covers arity 1");
        mtmf::Mtmf h = mtmf::approx_simple(f, approx_j, approx_k, box);
        double sup = 0.0;
        std::size_t grid = std::max<std::size_t>(common.grid, 2);
        for (std::size_t i = 0; i < grid; ++i) {
            double x = box[0].lo + (box[0].hi - box[0].lo) * static_cast<double>(i) / (grid - 1);
            sup = std::max(sup, std::fabs(mtmf::evaluate(f, {x}).value -
                                          mtmf::evaluate(h, {x}).value));
        }
        double bound = std::exp2(-static_cast<double>(approx_k)) +
                       std::exp2(-static_cast<double>(approx_j));
        std::cout << "sup error = " << fmt(sup) << " (bound " << fmt(bound) << ")\n";
        if (sup > bound) {
            std::cerr << "gate failure: approximation exceeded the dyadic bound\n";
            return kExitGate;
        }
        return kExitOk;
    }

    std::cerr << "no verb dispatched\n";
    return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mtmf::IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const mtmf::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitInput;
    } catch (const mtmf::IndexSetError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "gate failure: " << e.what() << "\n";
        return kExitGate;
    }
}
