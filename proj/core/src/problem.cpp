#include "dfield/problem.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dfield/errors.hpp"

namespace dfield {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

void ProblemSpec::validate() const {
    if (n < 1 || n > 3)
        throw ConfigError("n must be in [1, 3]");
    if (m < 1 || m > 9)
        throw ConfigError("m must be in [1, 9]");
    if (d < 1 || d > 8)
        throw ConfigError("d must be in [1, 8]");
    if (!(T > 0.0))
        throw ConfigError("horizon T must be positive");

    if (static_cast<int>(mu.size()) != n)
        throw ConfigError("mu must have n entries");
    if (static_cast<int>(sigma.size()) != n)
        throw ConfigError("sigma must have n rows");
    for (const auto& row : sigma)
        if (static_cast<int>(row.size()) != d)
            throw ConfigError("sigma rows must have d entries");
    if (static_cast<int>(f.size()) != m)
        throw ConfigError("f must have m entries");
    if (static_cast<int>(xi.size()) != m)
        throw ConfigError("xi must have m entries");

    for (int i = 0; i < n; ++i)
        mu[i].validate_dims(n, m, d, "mu[" + std::to_string(i + 1) + "]");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            sigma[i][j].validate_dims(n, m, d,
                "sigma[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]");
    for (int j = 0; j < m; ++j)
        f[j].validate_dims(n, m, d, "f[" + std::to_string(j + 1) + "]");
    for (int j = 0; j < m; ++j) {
        std::string label = "xi[" + std::to_string(j + 1) + "]";
        xi[j].validate_dims(n, m, d, label);
        if (!xi[j].references_only_x())
            throw ConfigError("terminal condition " + label + " may reference x variables only");
    }

    const auto& l = lipschitz;
    if (l.L && *l.L < 0.0)
        throw ConfigError("declared L must be nonnegative");
    if (l.L_sigma_z < 0.0 || l.L_xi_x < 0.0)
        throw ConfigError("declared Lipschitz constants must be nonnegative");
    if (l.L && l.L_sigma_z > *l.L)
        throw ConfigError("L_sigma_z must not exceed L");
    double prev_h = -1.0, prev_l = -1.0;
    for (auto [H, LH] : l.local_L) {
        if (H <= prev_h)
            throw ConfigError("local_L radii must be strictly increasing");
        if (LH < prev_l)
            throw ConfigError("local_L values must be nondecreasing in H");
        if (LH < 0.0 || H < 0.0)
            throw ConfigError("local_L entries must be nonnegative");
        prev_h = H;
        prev_l = LH;
    }
    if (mode == ProblemMode::GlobalLipschitz && !l.L)
        throw ConfigError("GlobalLipschitz mode requires a declared L");
}

LipschitzTriple ProblemSpec::triple(std::optional<double> L_override,
                                    std::optional<double> lip_terminal) const {
    LipschitzTriple c;
    c.L = L_override ? *L_override : lipschitz.L.value_or(0.0);
    c.L_sigma_z = lipschitz.L_sigma_z;
    c.L_xi_x = lip_terminal ? *lip_terminal : lipschitz.L_xi_x;
    return c;
}

std::optional<double> ProblemSpec::local_lipschitz(double H) const {
    for (auto [radius, LH] : lipschitz.local_L)
        if (radius >= H)
            return LH;
    if (lipschitz.local_L.empty() && lipschitz.L)
        return *lipschitz.L;  // globally Lipschitz problem: every ball is covered
    return std::nullopt;
}

std::string AdmissibilityReport::to_string() const {
    std::ostringstream os;
    for (const auto& c : checks)
        os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    for (const auto& w : warnings)
        os << "WARN " << w << "\n";
    os << (pass ? "ADMISSIBLE" : "NOT ADMISSIBLE") << "\n";
    return os.str();
}

AdmissibilityReport check_admissible(const ProblemSpec& p) {
    AdmissibilityReport r;
    const auto& l = p.lipschitz;

    {
        // product condition; L_sigma_z = 0 means the forbidden value is inf
        double prod = l.L_sigma_z * l.L_xi_x;
        bool ok = prod < 1.0;
        std::string detail;
        if (l.L_sigma_z == 0.0)
            detail = "L_{sigma,z} = 0, bound is infinite";
        else
            detail = "L_{sigma,z}*L_{xi,x} = " + fmt(prod) + (ok ? " < 1" : " >= 1");
        r.checks.push_back({"product L_{sigma,z}*L_{xi,x} < 1", ok, detail});
    }

    auto require_finite = [&](const char* name, const std::optional<double>& v) {
        bool ok = v.has_value() && std::isfinite(*v);
        r.checks.push_back({std::string(name) + " declared finite", ok,
                            ok ? fmt(*v) : "missing or non-finite"});
    };

    if (p.mode == ProblemMode::GlobalLipschitz) {
        require_finite("L", l.L);
    } else {
        require_finite("sup_sigma", l.sup_sigma);
        require_finite("sup_xi", l.sup_xi);
        bool has_table = !l.local_L.empty() || l.L.has_value();
        r.checks.push_back({"local_L table present", has_table,
                            has_table ? std::to_string(l.local_L.size()) + " entries"
                                      : "missing"});
    }

    bool div = false;
    for (const auto& e : p.mu) div = div || e.has_division();
    for (const auto& row : p.sigma)
        for (const auto& e : row) div = div || e.has_division();
    for (const auto& e : p.f) div = div || e.has_division();
    for (const auto& e : p.xi) div = div || e.has_division();
    if (div)
        r.warnings.push_back("coefficients contain division: Lipschitz constants "
                             "must be user-declared, they cannot be inferred");

    r.pass = true;
    for (const auto& c : r.checks)
        r.pass = r.pass && c.pass;
    return r;
}

} // namespace dfield
