#include "dfield/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>

#include "dfield/rng.hpp"

namespace dfield {

namespace {

ExprNodePtr make(ExprOp op, ExprNodePtr a = nullptr, ExprNodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

struct FunctionInfo {
    ExprOp op;
    int arity;
};

const std::map<std::string_view, FunctionInfo>& function_table() {
    static const std::map<std::string_view, FunctionInfo> table = {
        {"sin", {ExprOp::Sin, 1}},   {"cos", {ExprOp::Cos, 1}},
        {"exp", {ExprOp::Exp, 1}},   {"log", {ExprOp::Log, 1}},
        {"tanh", {ExprOp::Tanh, 1}}, {"sqrt", {ExprOp::Sqrt, 1}},
        {"abs", {ExprOp::Abs, 1}},   {"min", {ExprOp::Min, 2}},
        {"max", {ExprOp::Max, 2}},
    };
    return table;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprNodePtr run() {
        if (text_.empty())
            throw ParseError("empty expression", 0);
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("empty expression", 0);
        ExprNodePtr e = expression();
        skip_ws();
        if (pos_ < text_.size())
            throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c))
            throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ExprNodePtr expression() {
        ExprNodePtr e = term();
        for (;;) {
            if (accept('+'))
                e = make(ExprOp::Add, e, term());
            else if (accept('-'))
                e = make(ExprOp::Sub, e, term());
            else
                return e;
        }
    }

    ExprNodePtr term() {
        ExprNodePtr e = unary();
        for (;;) {
            if (accept('*'))
                e = make(ExprOp::Mul, e, unary());
            else if (accept('/'))
                e = make(ExprOp::Div, e, unary());
            else
                return e;
        }
    }

    ExprNodePtr unary() {
        if (accept('-'))
            return make(ExprOp::Neg, unary());
        return power();
    }

    ExprNodePtr power() {
        ExprNodePtr base = atom();
        while (accept('^')) {
            skip_ws();
            std::size_t at = pos_;
            bool negated = accept('-');
            skip_ws();
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                throw ParseError("exponent of '^' must be an integer literal", at);
            int k = 0;
            auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), k);
            if (ec != std::errc())
                throw ParseError("invalid integer exponent", pos_);
            pos_ = static_cast<std::size_t>(p - text_.data());
            if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
                throw ParseError("exponent of '^' must be an integer literal", at);
            auto n = make(ExprOp::Pow, base);
            n->i = negated ? -k : k;
            base = n;
        }
        return base;
    }

    ExprNodePtr atom() {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError("unexpected end of expression", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ExprNodePtr e = expression();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    ExprNodePtr number() {
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double v = 0.0;
        auto [p, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || p == begin)
            throw ParseError("invalid numeric literal", pos_);
        pos_ = static_cast<std::size_t>(p - text_.data());
        auto n = make(ExprOp::Constant);
        n->value = v;
        return n;
    }

    ExprNodePtr identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);

        if (auto it = function_table().find(name); it != function_table().end()) {
            expect('(');
            ExprNodePtr a = expression();
            ExprNodePtr b;
            if (it->second.arity == 2) {
                if (!accept(','))
                    throw ParseError(std::string(name) + " takes 2 arguments", start);
                b = expression();
            } else if (peek() == ',') {
                throw ParseError(std::string(name) + " takes 1 argument", start);
            }
            expect(')');
            return make(it->second.op, std::move(a), std::move(b));
        }

        if (name == "t")
            return make(ExprOp::Time);

        auto parse_index = [&](std::string_view digits, std::size_t at) {
            int v = 0;
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
            if (ec != std::errc() || p != digits.data() + digits.size() || v < 1)
                throw ParseError("bad variable index in '" + std::string(name) + "'", at);
            return v;
        };

        if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1 &&
            std::isdigit(static_cast<unsigned char>(name[1]))) {
            auto n = make(name[0] == 'x' ? ExprOp::VarX : ExprOp::VarY);
            n->i = parse_index(name.substr(1), start);
            return n;
        }
        if (name[0] == 'z' && name.size() == 3 &&
            std::isdigit(static_cast<unsigned char>(name[1])) &&
            std::isdigit(static_cast<unsigned char>(name[2]))) {
            auto n = make(ExprOp::VarZ);
            n->i = name[1] - '0';
            n->j = name[2] - '0';
            if (n->i < 1 || n->j < 1)
                throw ParseError("bad variable index in '" + std::string(name) + "'", start);
            return n;
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }
};

double ipow(double base, int k) {
    if (k < 0)
        return 1.0 / ipow(base, -k);
    double r = 1.0, b = base;
    while (k > 0) {
        if (k & 1)
            r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int precedence(ExprOp op) {
    switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub: return 1;
    case ExprOp::Mul:
    case ExprOp::Div: return 2;
    case ExprOp::Neg: return 3;
    case ExprOp::Pow: return 4;
    default:          return 5;
    }
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& child, int parent_prec, bool force_parens, std::string& out) {
    bool parens = force_parens || precedence(child.op) < parent_prec;
    if (parens)
        out += '(';
    print_node(child, out);
    if (parens)
        out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
    switch (n.op) {
    case ExprOp::Constant: out += format_double(n.value); return;
    case ExprOp::Time:     out += 't'; return;
    case ExprOp::VarX:     out += 'x'; out += std::to_string(n.i); return;
    case ExprOp::VarY:     out += 'y'; out += std::to_string(n.i); return;
    case ExprOp::VarZ:     out += 'z'; out += std::to_string(n.i); out += std::to_string(n.j); return;
    case ExprOp::Add:
        print_child(*n.a, 1, false, out); out += '+'; print_child(*n.b, 2, false, out); return;
    case ExprOp::Sub:
        print_child(*n.a, 1, false, out); out += '-'; print_child(*n.b, 2, false, out); return;
    case ExprOp::Mul:
        print_child(*n.a, 2, false, out); out += '*'; print_child(*n.b, 3, false, out); return;
    case ExprOp::Div:
        print_child(*n.a, 2, false, out); out += '/'; print_child(*n.b, 3, false, out); return;
    case ExprOp::Neg:
        out += '-'; print_child(*n.a, 3, false, out); return;
    case ExprOp::Pow:
        // base must re-parse as an atom: parenthesize anything compound
        print_child(*n.a, 4, precedence(n.a->op) < 5, out);
        out += '^';
        out += std::to_string(n.i);
        return;
    case ExprOp::Sin:  out += "sin(";  print_node(*n.a, out); out += ')'; return;
    case ExprOp::Cos:  out += "cos(";  print_node(*n.a, out); out += ')'; return;
    case ExprOp::Exp:  out += "exp(";  print_node(*n.a, out); out += ')'; return;
    case ExprOp::Log:  out += "log(";  print_node(*n.a, out); out += ')'; return;
    case ExprOp::Tanh: out += "tanh("; print_node(*n.a, out); out += ')'; return;
    case ExprOp::Sqrt: out += "sqrt("; print_node(*n.a, out); out += ')'; return;
    case ExprOp::Abs:  out += "abs(";  print_node(*n.a, out); out += ')'; return;
    case ExprOp::Min:
        out += "min("; print_node(*n.a, out); out += ','; print_node(*n.b, out); out += ')'; return;
    case ExprOp::Max:
        out += "max("; print_node(*n.a, out); out += ','; print_node(*n.b, out); out += ')'; return;
    }
}

struct EvalCtx {
    double t;
    std::span<const double> x, y, z;
    std::size_t zcols;  // d, row length of the row-major z block
};

double eval_node(const ExprNode& n, const EvalCtx& c) {
    double r;
    switch (n.op) {
    case ExprOp::Constant: return n.value;
    case ExprOp::Time:     return c.t;
    case ExprOp::VarX:
        if (static_cast<std::size_t>(n.i) > c.x.size())
            throw EvalError("variable x" + std::to_string(n.i) + " out of range");
        return c.x[n.i - 1];
    case ExprOp::VarY:
        if (static_cast<std::size_t>(n.i) > c.y.size())
            throw EvalError("variable y" + std::to_string(n.i) + " out of range");
        return c.y[n.i - 1];
    case ExprOp::VarZ: {
        std::size_t idx = static_cast<std::size_t>(n.i - 1) * c.zcols +
                          static_cast<std::size_t>(n.j - 1);
        if (c.zcols == 0 || static_cast<std::size_t>(n.j) > c.zcols || idx >= c.z.size())
            throw EvalError("variable z" + std::to_string(n.i) + std::to_string(n.j) +
                            " out of range");
        return c.z[idx];
    }
    case ExprOp::Add: r = eval_node(*n.a, c) + eval_node(*n.b, c); break;
    case ExprOp::Sub: r = eval_node(*n.a, c) - eval_node(*n.b, c); break;
    case ExprOp::Mul: r = eval_node(*n.a, c) * eval_node(*n.b, c); break;
    case ExprOp::Div: r = eval_node(*n.a, c) / eval_node(*n.b, c); break;
    case ExprOp::Neg: r = -eval_node(*n.a, c); break;
    case ExprOp::Pow: r = ipow(eval_node(*n.a, c), n.i); break;
    case ExprOp::Sin: r = std::sin(eval_node(*n.a, c)); break;
    case ExprOp::Cos: r = std::cos(eval_node(*n.a, c)); break;
    case ExprOp::Exp: r = std::exp(eval_node(*n.a, c)); break;
    case ExprOp::Log: r = std::log(eval_node(*n.a, c)); break;
    case ExprOp::Tanh: r = std::tanh(eval_node(*n.a, c)); break;
    case ExprOp::Sqrt: r = std::sqrt(eval_node(*n.a, c)); break;
    case ExprOp::Abs: r = std::abs(eval_node(*n.a, c)); break;
    case ExprOp::Min: r = std::min(eval_node(*n.a, c), eval_node(*n.b, c)); break;
    case ExprOp::Max: r = std::max(eval_node(*n.a, c), eval_node(*n.b, c)); break;
    default: throw EvalError("corrupt expression node");
    }
    if (!std::isfinite(r)) {
        std::string s;
        print_node(n, s);
        throw EvalError("non-finite value in subexpression '" + s + "'");
    }
    return r;
}

} // namespace

Expr Expr::parse(std::string_view text) {
    Parser p(text);
    return Expr(p.run());
}

double Expr::eval(double t, std::span<const double> x, std::span<const double> y,
                  std::span<const double> z) const {
    // z is row-major m*d with m = y.size()
    std::size_t zcols = (y.empty() || z.empty()) ? 0 : z.size() / y.size();
    EvalCtx c{t, x, y, z, zcols};
    return eval_node(*root_, c);
}

std::string Expr::str() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

namespace {

bool same_node(const ExprNode& a, const ExprNode& b) {
    if (a.op != b.op || a.i != b.i || a.j != b.j)
        return false;
    if (a.op == ExprOp::Constant &&
        !(a.value == b.value || (std::isnan(a.value) && std::isnan(b.value))))
        return false;
    if ((a.a == nullptr) != (b.a == nullptr) || (a.b == nullptr) != (b.b == nullptr))
        return false;
    if (a.a && !same_node(*a.a, *b.a))
        return false;
    if (a.b && !same_node(*a.b, *b.b))
        return false;
    return true;
}

template <typename Fn>
void visit(const ExprNode& n, Fn&& fn) {
    fn(n);
    if (n.a)
        visit(*n.a, fn);
    if (n.b)
        visit(*n.b, fn);
}

} // namespace

bool Expr::same_structure(const Expr& other) const {
    if (!root_ || !other.root_)
        return root_ == other.root_;
    return same_node(*root_, *other.root_);
}

void Expr::validate_dims(int n, int m, int d, std::string_view label) const {
    visit(*root_, [&](const ExprNode& node) {
        auto fail = [&](const std::string& var) {
            throw ConfigError("expression '" + std::string(label) + "': variable " + var +
                              " exceeds declared dimensions (n=" + std::to_string(n) +
                              ", m=" + std::to_string(m) + ", d=" + std::to_string(d) + ")");
        };
        if (node.op == ExprOp::VarX && node.i > n)
            fail("x" + std::to_string(node.i));
        if (node.op == ExprOp::VarY && node.i > m)
            fail("y" + std::to_string(node.i));
        if (node.op == ExprOp::VarZ && (node.i > m || node.j > d))
            fail("z" + std::to_string(node.i) + std::to_string(node.j));
    });
}

bool Expr::references_only_x() const {
    bool ok = true;
    visit(*root_, [&](const ExprNode& node) {
        if (node.op == ExprOp::Time || node.op == ExprOp::VarY || node.op == ExprOp::VarZ)
            ok = false;
    });
    return ok;
}

bool Expr::has_division() const {
    bool found = false;
    visit(*root_, [&](const ExprNode& node) {
        if (node.op == ExprOp::Div || (node.op == ExprOp::Pow && node.i < 0))
            found = true;
    });
    return found;
}

GroupLipschitz sample_lipschitz(const Expr& e, const SampleBox& box,
                                int n_samples, std::uint64_t seed) {
    if (n_samples < 2)
        throw ConfigError("sample_lipschitz requires n_samples >= 2");

    SplitMix64 rng(seed);
    std::vector<double> x(box.x.size()), y(box.y.size()), z(box.z.size());
    std::vector<double> x2(box.x.size()), y2(box.y.size()), z2(box.z.size());

    auto draw = [&](const std::vector<std::pair<double, double>>& b, std::vector<double>& out) {
        for (std::size_t i = 0; i < b.size(); ++i)
            out[i] = rng.next_uniform(b[i].first, b[i].second);
    };

    GroupLipschitz est;
    auto secant = [&](double& acc, std::span<const double> p, std::span<const double> q,
                      double fp, double fq) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            d2 += (p[i] - q[i]) * (p[i] - q[i]);
        if (d2 > 0.0)
            acc = std::max(acc, std::abs(fp - fq) / std::sqrt(d2));
    };

    for (int s = 0; s < n_samples; ++s) {
        double t = rng.next_uniform(box.t.first, box.t.second);
        draw(box.x, x);
        draw(box.y, y);
        draw(box.z, z);
        double base = e.eval(t, x, y, z);

        if (!box.x.empty()) {
            draw(box.x, x2);
            secant(est.x, x, x2, base, e.eval(t, x2, y, z));
        }
        if (!box.y.empty()) {
            draw(box.y, y2);
            secant(est.y, y, y2, base, e.eval(t, x, y2, z));
        }
        if (!box.z.empty()) {
            draw(box.z, z2);
            secant(est.z, z, z2, base, e.eval(t, x, y, z2));
        }
    }
    return est;
}

} // namespace dfield
