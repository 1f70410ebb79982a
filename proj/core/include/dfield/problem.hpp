#ifndef DFIELD_PROBLEM_HPP
#define DFIELD_PROBLEM_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dfield/contraction.hpp"
#include "dfield/expr.hpp"

namespace dfield {

enum class ProblemMode { GlobalLipschitz, MarkovianLocalLipschitz };

/// User-declared Lipschitz and bound data. The theory is driven by these
/// constants; they are never inferred (sampling gives lower bounds only).
struct LipschitzDecl {
    std::optional<double> L;          // required in GlobalLipschitz mode
    double L_sigma_z = 0.0;
    double L_xi_x = 0.0;
    std::optional<double> sup_sigma;  // required in Markovian mode
    std::optional<double> sup_xi;     // required in Markovian mode
    std::optional<double> sup_f00;
    std::vector<std::pair<double, double>> local_L;  // (H, L_H), nondecreasing
};

struct ProblemSpec {
    int n = 1, m = 1, d = 1;
    double T = 1.0;
    std::vector<Expr> mu;                  // n entries
    std::vector<std::vector<Expr>> sigma;  // n rows x d columns
    std::vector<Expr> f;                   // m entries
    std::vector<Expr> xi;                  // m entries, functions of x only
    LipschitzDecl lipschitz;
    ProblemMode mode = ProblemMode::GlobalLipschitz;

    /// Structural validation: dimension caps, expression array shapes,
    /// variable indices, xi depending on x only. Throws ConfigError.
    void validate() const;

    /// Triple for the contraction module. `L_override` substitutes the
    /// effective coefficient constant (cutoff mode), `lip_terminal` the
    /// current slice estimate in place of the declared L_xi_x.
    LipschitzTriple triple(std::optional<double> L_override = {},
                           std::optional<double> lip_terminal = {}) const;

    /// L_H from the local_L table: smallest declared radius >= H.
    /// Falls back to the global L when the table is empty and L is set.
    std::optional<double> local_lipschitz(double H) const;
};

struct AdmissibilityCheck {
    std::string name;
    bool pass;
    std::string detail;
};

struct AdmissibilityReport {
    bool pass = false;
    std::vector<AdmissibilityCheck> checks;
    std::vector<std::string> warnings;
    std::string to_string() const;
};

/// Hypothesis check for local existence: L_sigma_z * L_xi_x < 1 (with the
/// 1/0 = inf convention) plus the mode-required finite-norm declarations.
/// Pure function of the declarations.
AdmissibilityReport check_admissible(const ProblemSpec& p);

} // namespace dfield

#endif
