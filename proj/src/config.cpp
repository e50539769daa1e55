#include "pinn/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pinn/errors.hpp"

namespace pinn::cfg {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(key, "expected a real number, got '" + value + "'");
    }
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(key, "expected an integer, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(key, "expected an unsigned integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError(key, "expected true|false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const auto& tok : tokens(value)) out.push_back(static_cast<int>(parse_int(key, tok)));
    if (out.empty()) throw ConfigError(key, "expected a non-empty list of integers");
    return out;
}

// A term is `coef w0..w{D-1}` or `coef w0..w{D-1} p0..p{D-1}` where D is the
// problem's coordinate count.
TermSpec parse_term(const std::string& key, const std::string& value, std::size_t dims) {
    const auto toks = tokens(value);
    TermSpec term;
    if (toks.size() != 1 + dims && toks.size() != 1 + 2 * dims)
        throw ConfigError(key, "expected coef plus " + std::to_string(dims) +
                                   " frequencies (and optionally as many phases)");
    term.coef = parse_real(key, toks[0]);
    for (std::size_t i = 0; i < dims; ++i) term.omega.push_back(parse_real(key, toks[1 + i]));
    if (toks.size() == 1 + 2 * dims)
        for (std::size_t i = 0; i < dims; ++i)
            term.phase.push_back(parse_real(key, toks[1 + dims + i]));
    return term;
}

void check_range(const std::string& key, bool ok, const std::string& constraint) {
    if (!ok) throw ConfigError(key, "range violation: " + constraint);
}

}  // namespace

Config parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ConfigError(key, "duplicate key");
        kv[key] = value;
    }

    Config c;
    auto take = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        return &it->second;
    };
    auto real_field = [&](const std::string& key, double& field) {
        if (const auto* v = take(key)) field = parse_real(key, *v);
    };
    auto int_field = [&](const std::string& key, int& field) {
        if (const auto* v = take(key)) field = static_cast<int>(parse_int(key, *v));
    };
    auto bool_field = [&](const std::string& key, bool& field) {
        if (const auto* v = take(key)) field = parse_bool(key, *v);
    };
    auto string_field = [&](const std::string& key, std::string& field) {
        if (const auto* v = take(key)) field = *v;
    };

    string_field("problem", c.problem);
    int_field("heat.d", c.heat_d);
    real_field("heat.T", c.heat_T);
    real_field("helmholtz.k", c.helmholtz_k);

    if (const auto* v = take("exact.nterms")) {
        c.exact_given = true;
        const long n = parse_int("exact.nterms", *v);
        check_range("exact.nterms", n >= 0 && n <= 64, "0 <= nterms <= 64");
        const std::size_t dims = c.problem == "helmholtz" ? 2 : static_cast<std::size_t>(c.heat_d) + 1;
        for (long i = 0; i < n; ++i) {
            const std::string key = "exact.term" + std::to_string(i);
            const auto* tv = take(key);
            if (!tv) throw ConfigError(key, "missing term (exact.nterms = " + *v + ")");
            c.exact_terms.push_back(parse_term(key, *tv, dims));
        }
    }

    int_field("n1", c.n1);
    int_field("n2", c.n2);
    int_field("m", c.m);
    string_field("activation", c.activation);
    string_field("init_scale", c.init_scale);
    bool_field("bias_augmented", c.bias_augmented);
    string_field("mode", c.mode);
    real_field("eta", c.eta);
    int_field("iters", c.iters);
    if (const auto* v = take("seed")) c.seed = parse_u64("seed", *v);
    int_field("workers", c.workers);
    real_field("boundary_weight", c.boundary_weight);

    int_field("lbfgs.memory", c.lbfgs.memory);
    int_field("lbfgs.max_iters", c.lbfgs.max_iters);
    real_field("lbfgs.grad_tol", c.lbfgs.grad_tol);
    real_field("lbfgs.wolfe_c1", c.lbfgs.wolfe_c1);
    real_field("lbfgs.wolfe_c2", c.lbfgs.wolfe_c2);
    int_field("lbfgs.max_line_search", c.lbfgs.max_line_search);

    int_field("diagnostics.record_gram_every", c.record_gram_every);
    bool_field("diagnostics.record_residual_terms", c.record_residual_terms);
    int_field("diagnostics.panels", c.panels);
    bool_field("diagnostics.record_timing", c.record_timing);

    int_field("grid.n", c.grid_n);

    if (const auto* v = take("gram_study.widths")) c.gram_widths = parse_int_list("gram_study.widths", *v);
    int_field("gram_study.seeds", c.gram_seeds);
    int_field("gram_study.m_draw", c.gram_m_draw);
    int_field("gram_study.reps", c.gram_reps);

    if (const auto* v = take("scaling.widths")) c.scaling_widths = parse_int_list("scaling.widths", *v);
    int_field("scaling.seeds", c.scaling_seeds);
    int_field("scaling.iters", c.scaling_iters);

    real_field("toy.k1", c.toy_k1);
    real_field("toy.k2", c.toy_k2);
    real_field("toy.eta", c.toy_eta);
    int_field("toy.steps", c.toy_steps);
    real_field("toy.theta1", c.toy_theta1);
    real_field("toy.theta2", c.toy_theta2);
    real_field("toy.theta1_star", c.toy_theta1_star);
    real_field("toy.theta2_star", c.toy_theta2_star);

    // Reject unknown keys: everything consumed above is known, so rebuild the
    // known-key set by serializing and re-scanning.
    {
        static const char* known[] = {
            "problem", "heat.d", "heat.T", "helmholtz.k", "exact.nterms", "n1", "n2", "m",
            "activation", "init_scale", "bias_augmented", "mode", "eta", "iters", "seed",
            "workers", "boundary_weight", "lbfgs.memory", "lbfgs.max_iters", "lbfgs.grad_tol",
            "lbfgs.wolfe_c1", "lbfgs.wolfe_c2", "lbfgs.max_line_search",
            "diagnostics.record_gram_every", "diagnostics.record_residual_terms",
            "diagnostics.panels", "diagnostics.record_timing", "grid.n", "gram_study.widths",
            "gram_study.seeds", "gram_study.m_draw", "gram_study.reps", "scaling.widths",
            "scaling.seeds", "scaling.iters", "toy.k1", "toy.k2", "toy.eta", "toy.steps",
            "toy.theta1", "toy.theta2", "toy.theta1_star", "toy.theta2_star"};
        for (const auto& [key, value] : kv) {
            bool ok = false;
            for (const char* k : known)
                if (key == k) { ok = true; break; }
            if (!ok && key.rfind("exact.term", 0) == 0) {
                const std::string idx = key.substr(10);
                long i = -1;
                try { i = std::stol(idx); } catch (...) {}
                ok = i >= 0 && i < static_cast<long>(c.exact_terms.size());
                if (!ok) throw ConfigError(key, "term index out of range or exact.nterms missing");
            }
            if (!ok) throw ConfigError(key, "unknown key");
        }
    }

    // Range validation.
    check_range("problem", c.problem == "heat" || c.problem == "helmholtz", "heat|helmholtz");
    check_range("heat.d", c.heat_d >= 1 && c.heat_d <= 8, "1 <= d <= 8");
    check_range("heat.T", c.heat_T > 0.0, "T > 0");
    check_range("helmholtz.k", std::isfinite(c.helmholtz_k), "finite");
    check_range("n1", c.n1 >= 1, "n1 >= 1");
    check_range("n2", c.n2 >= 1, "n2 >= 1");
    check_range("m", c.m >= 1, "m >= 1");
    act::kind_from_string(c.activation);  // throws InvalidInput on bad value
    check_range("init_scale", c.init_scale == "unit" || c.init_scale == "invdim", "unit|invdim");
    check_range("mode", c.mode == "igd" || c.mode == "gd", "igd|gd");
    check_range("eta", c.eta >= 0.0 && std::isfinite(c.eta), "eta >= 0");
    check_range("iters", c.iters >= 1, "iters >= 1");
    check_range("workers", c.workers >= 1, "workers >= 1");
    check_range("boundary_weight", c.boundary_weight >= 0.0, "boundary_weight >= 0");
    check_range("lbfgs.memory", c.lbfgs.memory >= 1, "memory >= 1");
    check_range("lbfgs.max_iters", c.lbfgs.max_iters >= 1, "max_iters >= 1");
    check_range("lbfgs.grad_tol", c.lbfgs.grad_tol >= 0.0, "grad_tol >= 0");
    check_range("lbfgs.wolfe_c1",
                c.lbfgs.wolfe_c1 > 0.0 && c.lbfgs.wolfe_c1 < c.lbfgs.wolfe_c2 && c.lbfgs.wolfe_c2 < 1.0,
                "0 < c1 < c2 < 1");
    check_range("lbfgs.max_line_search", c.lbfgs.max_line_search >= 1, "max_line_search >= 1");
    check_range("diagnostics.record_gram_every", c.record_gram_every >= -1, ">= -1");
    check_range("diagnostics.panels", c.panels >= 2 && c.panels % 2 == 0, "even, >= 2");
    check_range("grid.n", c.grid_n >= 2, "grid.n >= 2");
    check_range("gram_study.seeds", c.gram_seeds >= 1, ">= 1");
    check_range("gram_study.m_draw", c.gram_m_draw >= 1, ">= 1");
    check_range("gram_study.reps", c.gram_reps >= 1, ">= 1");
    for (int w : c.gram_widths) check_range("gram_study.widths", w >= 1, "widths >= 1");
    for (int w : c.scaling_widths) check_range("scaling.widths", w >= 1, "widths >= 1");
    check_range("scaling.seeds", c.scaling_seeds >= 1, ">= 1");
    check_range("scaling.iters", c.scaling_iters >= 1, ">= 1");
    check_range("toy.k1", c.toy_k1 > 0.0, "K1 > 0");
    check_range("toy.k2", c.toy_k2 > 0.0, "K2 > 0");
    check_range("toy.eta", c.toy_eta > 0.0, "eta > 0");
    check_range("toy.steps", c.toy_steps >= 1, "steps >= 1");
    return c;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

std::string serialize_config(const Config& c) {
    std::ostringstream out;
    out << "problem = " << c.problem << '\n';
    out << "heat.d = " << c.heat_d << '\n';
    out << "heat.T = " << fmt_real(c.heat_T) << '\n';
    out << "helmholtz.k = " << fmt_real(c.helmholtz_k) << '\n';
    if (c.exact_given) {
        out << "exact.nterms = " << c.exact_terms.size() << '\n';
        for (std::size_t i = 0; i < c.exact_terms.size(); ++i) {
            const TermSpec& t = c.exact_terms[i];
            out << "exact.term" << i << " = " << fmt_real(t.coef);
            for (double w : t.omega) out << ' ' << fmt_real(w);
            if (!t.phase.empty())
                for (double p : t.phase) out << ' ' << fmt_real(p);
            out << '\n';
        }
    }
    out << "n1 = " << c.n1 << '\n';
    out << "n2 = " << c.n2 << '\n';
    out << "m = " << c.m << '\n';
    out << "activation = " << c.activation << '\n';
    out << "init_scale = " << c.init_scale << '\n';
    out << "bias_augmented = " << (c.bias_augmented ? "true" : "false") << '\n';
    out << "mode = " << c.mode << '\n';
    out << "eta = " << fmt_real(c.eta) << '\n';
    out << "iters = " << c.iters << '\n';
    out << "seed = " << c.seed << '\n';
    out << "workers = " << c.workers << '\n';
    out << "boundary_weight = " << fmt_real(c.boundary_weight) << '\n';
    out << "lbfgs.memory = " << c.lbfgs.memory << '\n';
    out << "lbfgs.max_iters = " << c.lbfgs.max_iters << '\n';
    out << "lbfgs.grad_tol = " << fmt_real(c.lbfgs.grad_tol) << '\n';
    out << "lbfgs.wolfe_c1 = " << fmt_real(c.lbfgs.wolfe_c1) << '\n';
    out << "lbfgs.wolfe_c2 = " << fmt_real(c.lbfgs.wolfe_c2) << '\n';
    out << "lbfgs.max_line_search = " << c.lbfgs.max_line_search << '\n';
    out << "diagnostics.record_gram_every = " << c.record_gram_every << '\n';
    out << "diagnostics.record_residual_terms = " << (c.record_residual_terms ? "true" : "false")
        << '\n';
    out << "diagnostics.panels = " << c.panels << '\n';
    out << "diagnostics.record_timing = " << (c.record_timing ? "true" : "false") << '\n';
    out << "grid.n = " << c.grid_n << '\n';
    out << "gram_study.widths = " << fmt_int_list(c.gram_widths) << '\n';
    out << "gram_study.seeds = " << c.gram_seeds << '\n';
    out << "gram_study.m_draw = " << c.gram_m_draw << '\n';
    out << "gram_study.reps = " << c.gram_reps << '\n';
    out << "scaling.widths = " << fmt_int_list(c.scaling_widths) << '\n';
    out << "scaling.seeds = " << c.scaling_seeds << '\n';
    out << "scaling.iters = " << c.scaling_iters << '\n';
    out << "toy.k1 = " << fmt_real(c.toy_k1) << '\n';
    out << "toy.k2 = " << fmt_real(c.toy_k2) << '\n';
    out << "toy.eta = " << fmt_real(c.toy_eta) << '\n';
    out << "toy.steps = " << c.toy_steps << '\n';
    out << "toy.theta1 = " << fmt_real(c.toy_theta1) << '\n';
    out << "toy.theta2 = " << fmt_real(c.toy_theta2) << '\n';
    out << "toy.theta1_star = " << fmt_real(c.toy_theta1_star) << '\n';
    out << "toy.theta2_star = " << fmt_real(c.toy_theta2_star) << '\n';
    return out.str();
}

}  // namespace pinn::cfg
