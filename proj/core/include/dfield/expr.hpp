#ifndef DFIELD_EXPR_HPP
#define DFIELD_EXPR_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfield/errors.hpp"

namespace dfield {

enum class ExprOp {
    Constant, Time, VarX, VarY, VarZ,
    Add, Sub, Mul, Div, Neg, Pow,
    Sin, Cos, Exp, Log, Tanh, Sqrt, Abs, Min, Max,
};

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprOp op;
    double value = 0.0;   // Constant
    int i = 0;            // VarX/VarY/VarZ row index (1-based); Pow exponent
    int j = 0;            // VarZ column index (1-based)
    ExprNodePtr a, b;
};

/// Immutable arithmetic expression over (t, x1..xn, y1..ym, z11..zmd).
/// Safe for concurrent read-only evaluation once parsed.
class Expr {
public:
    Expr() = default;

    /// Parses with precedence ^ > unary- > * / > + -. Whitespace-insensitive.
    /// Exponents of ^ must be integer literals. Throws ParseError.
    static Expr parse(std::string_view text);

    /// z is row-major m*d. Throws EvalError when a subexpression produces a
    /// non-finite value.
    double eval(double t, std::span<const double> x, std::span<const double> y,
                std::span<const double> z) const;

    /// Canonical text form; parse(str()) is structurally equal to *this.
    std::string str() const;

    bool same_structure(const Expr& other) const;

    /// Checks every variable index against (n, m, d). Throws ConfigError.
    void validate_dims(int n, int m, int d, std::string_view label) const;

    bool references_only_x() const;  // no t, y or z anywhere
    bool has_division() const;       // Div node or negative Pow exponent

    bool empty() const { return root_ == nullptr; }
    const ExprNode& root() const { return *root_; }

private:
    explicit Expr(ExprNodePtr r) : root_(std::move(r)) {}
    ExprNodePtr root_;
};

struct SampleBox {
    std::pair<double, double> t{0.0, 0.0};
    std::vector<std::pair<double, double>> x, y, z;  // z flattened row-major m*d
};

struct GroupLipschitz {
    double x = 0.0, y = 0.0, z = 0.0;
};

/// Monte-Carlo lower bound on the Lipschitz constant per variable block:
/// max secant slope over pairs that differ in one block only. Deterministic
/// for a fixed seed.
GroupLipschitz sample_lipschitz(const Expr& e, const SampleBox& box,
                                int n_samples, std::uint64_t seed);

} // namespace dfield

#endif
