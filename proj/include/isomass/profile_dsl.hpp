#pragma once

// Radial profile expressions: parsing, canonical printing, and evaluation with
// exact first and second derivatives by second-order forward-mode dual numbers.
//
// Grammar (lowest to highest precedence):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'r' | 'pi' | name | fn '(' expr (',' expr)* ')' | '(' expr ')'
//   fn      := sqrt | exp | log | sin | cos | tanh | pow | min | max

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isomass/errors.hpp"
#include "isomass/numerics.hpp"

namespace isomass {

/// Value with first and second derivative along one scalar variable.
struct Dual2 {
  double v = 0, d = 0, dd = 0;

  static constexpr Dual2 constant(double c) { return {c, 0, 0}; }
  static constexpr Dual2 variable(double x) { return {x, 1, 0}; }
};

inline Dual2 operator+(Dual2 a, Dual2 b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Dual2 operator-(Dual2 a, Dual2 b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Dual2 operator-(Dual2 a) { return {-a.v, -a.d, -a.dd}; }
inline Dual2 operator*(Dual2 a, Dual2 b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2 * a.d * b.d + a.v * b.dd};
}
inline Dual2 operator/(Dual2 a, Dual2 b) {
  const double q = a.v / b.v;
  const double qd = (a.d - q * b.d) / b.v;
  const double qdd = (a.dd - 2 * qd * b.d - q * b.dd) / b.v;
  return {q, qd, qdd};
}

/// Chain rule for g(x) given g, g', g'' at x.v.
inline Dual2 chain(Dual2 x, double g0, double g1, double g2) {
  return {g0, g1 * x.d, g2 * x.d * x.d + g1 * x.dd};
}

/// Named parameter bindings. Names are unique.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(std::initializer_list<std::pair<const std::string, double>> init) {
    for (const auto& [k, v] : init) add(k, v);
  }

  void add(const std::string& name, double value) {
    if (!values_.emplace(name, value).second) throw ConfigError("duplicate parameter '" + name + "'");
  }
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  double at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw UnknownIdentifier(name, 0);
    return it->second;
  }
  const std::map<std::string, double>& values() const { return values_; }
  bool empty() const { return values_.empty(); }

 private:
  std::map<std::string, double> values_;
};

enum class NodeKind { Number, Variable, Pi, Param, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Function { Sqrt, Exp, Log, Sin, Cos, Tanh, Pow, Min, Max };

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  double number = 0;
  std::string name;  // parameter name
  Function fn = Function::Sqrt;
  std::vector<NodePtr> args;
};

inline bool operator==(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::Number:
      if (a.number != b.number) return false;
      break;
    case NodeKind::Param:
      if (a.name != b.name) return false;
      break;
    case NodeKind::Call:
      if (a.fn != b.fn) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!(*a.args[i] == *b.args[i])) return false;
  return true;
}

/// Result of evaluating a profile: value and two derivatives. nonsmooth is set
/// when a min/max tie was hit and the derivatives are one-sided.
struct EvalResult {
  double value = 0;
  double first_derivative = 0;
  double second_derivative = 0;
  bool nonsmooth = false;
};

inline const char* function_name(Function f) {
  switch (f) {
    case Function::Sqrt: return "sqrt";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Tanh: return "tanh";
    case Function::Pow: return "pow";
    case Function::Min: return "min";
    case Function::Max: return "max";
  }
  return "?";
}

/// Immutable parsed expression in the radial variable r.
class ProfileExpr {
 public:
  ProfileExpr() = default;
  explicit ProfileExpr(NodePtr root) : root_(std::move(root)) {}

  const ExprNode& root() const { return *root_; }
  bool valid() const { return root_ != nullptr; }

  /// Parameter names referenced by the expression.
  std::set<std::string> parameters() const {
    std::set<std::string> out;
    collect(*root_, out);
    return out;
  }

  friend bool operator==(const ProfileExpr& a, const ProfileExpr& b) {
    if (!a.root_ || !b.root_) return a.root_ == b.root_;
    return *a.root_ == *b.root_;
  }

 private:
  static void collect(const ExprNode& n, std::set<std::string>& out) {
    if (n.kind == NodeKind::Param) out.insert(n.name);
    for (const auto& a : n.args) collect(*a, out);
  }

  NodePtr root_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ >= text_.size()) fail({"expression"});
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail({"operator", "end of input"});
    return e;
  }

  const std::vector<std::pair<std::string, std::size_t>>& params() const { return params_; }

 private:
  static std::shared_ptr<ExprNode> make(NodeKind k, std::vector<NodePtr> args = {}) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->args = std::move(args);
    return n;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::string found = pos_ >= text_.size() ? "end of input" : "'" + std::string(1, text_[pos_]) + "'";
    throw SyntaxError(pos_, std::move(expected), found);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                   text_[pos_] == '\r'))
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

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = make(NodeKind::Add, {lhs, term()});
      else if (accept('-'))
        lhs = make(NodeKind::Sub, {lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(NodeKind::Mul, {lhs, unary()});
      else if (accept('/'))
        lhs = make(NodeKind::Div, {lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(NodeKind::Negate, {unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(NodeKind::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail({"number", "identifier", "'('"});
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) fail({"')'"});
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail({"number", "identifier", "'('"});
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail({"number"});
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Number;
    n->number = value;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      static const std::map<std::string, std::pair<Function, std::size_t>> kFunctions = {
          {"sqrt", {Function::Sqrt, 1}}, {"exp", {Function::Exp, 1}},   {"log", {Function::Log, 1}},
          {"sin", {Function::Sin, 1}},   {"cos", {Function::Cos, 1}},   {"tanh", {Function::Tanh, 1}},
          {"pow", {Function::Pow, 2}},   {"min", {Function::Min, 2}},   {"max", {Function::Max, 2}}};
      auto it = kFunctions.find(name);
      if (it == kFunctions.end()) throw UnknownIdentifier(name, start);
      ++pos_;
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      if (!accept(')')) fail({"','", "')'"});
      if (args.size() != it->second.second) {
        pos_ = start;
        fail({name + " with " + std::to_string(it->second.second) + " argument(s)"});
      }
      auto n = make(NodeKind::Call, std::move(args));
      n->fn = it->second.first;
      return n;
    }
    if (name == "r") return make(NodeKind::Variable);
    if (name == "pi") return make(NodeKind::Pi);
    params_.emplace_back(name, start);
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Param;
    n->name = name;
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<std::pair<std::string, std::size_t>> params_;
};

struct EvalState {
  const ParamSet* params;
  bool nonsmooth = false;
};

inline Dual2 eval_node(const ExprNode& n, Dual2 r, EvalState& st) {
  const auto arg = [&](std::size_t i) { return eval_node(*n.args[i], r, st); };
  switch (n.kind) {
    case NodeKind::Number: return Dual2::constant(n.number);
    case NodeKind::Variable: return r;
    case NodeKind::Pi: return Dual2::constant(kPi);
    case NodeKind::Param: return Dual2::constant(st.params->at(n.name));
    case NodeKind::Negate: return -arg(0);
    case NodeKind::Add: return arg(0) + arg(1);
    case NodeKind::Sub: return arg(0) - arg(1);
    case NodeKind::Mul: return arg(0) * arg(1);
    case NodeKind::Div: {
      const Dual2 den = arg(1);
      if (den.v == 0) throw EvalError("division by zero");
      return arg(0) / den;
    }
    case NodeKind::Pow: break;
    case NodeKind::Call: break;
  }

  Function fn = n.kind == NodeKind::Pow ? Function::Pow : n.fn;
  const Dual2 x = arg(0);
  switch (fn) {
    case Function::Sqrt: {
      if (x.v < 0) throw EvalError("sqrt of negative value");
      if (x.v == 0) {
        if (x.d != 0 || x.dd != 0) throw EvalError("sqrt is not differentiable at 0");
        return Dual2::constant(0);
      }
      const double s = std::sqrt(x.v);
      return chain(x, s, 0.5 / s, -0.25 / (s * x.v));
    }
    case Function::Exp: {
      const double e = std::exp(x.v);
      return chain(x, e, e, e);
    }
    case Function::Log:
      if (x.v <= 0) throw EvalError("log of non-positive value");
      return chain(x, std::log(x.v), 1 / x.v, -1 / (x.v * x.v));
    case Function::Sin: return chain(x, std::sin(x.v), std::cos(x.v), -std::sin(x.v));
    case Function::Cos: return chain(x, std::cos(x.v), -std::sin(x.v), -std::cos(x.v));
    case Function::Tanh: {
      const double t = std::tanh(x.v);
      const double s = 1 - t * t;
      return chain(x, t, s, -2 * t * s);
    }
    case Function::Pow: {
      const Dual2 y = arg(1);
      if (y.d == 0 && y.dd == 0) {
        const double k = y.v;
        if (x.v == 0) {
          if (k == 0) return Dual2::constant(1);
          if (k < 0) throw EvalError("zero raised to a negative power");
          if (x.d == 0 && x.dd == 0) return Dual2::constant(0);
          const double g1 = k > 1 ? 0 : (k == 1 ? 1 : kInf);
          const double g2 = (k > 2 || k == 1) ? 0 : (k == 2 ? 2 : kInf);
          const Dual2 out = chain(x, 0, g1, g2);
          if (!std::isfinite(out.d) || !std::isfinite(out.dd)) throw EvalError("power is not differentiable at 0");
          return out;
        }
        if (x.v < 0 && k != std::floor(k)) throw EvalError("negative base with non-integer exponent");
        const double p0 = std::pow(x.v, k);
        const double p1 = k * std::pow(x.v, k - 1);
        const double p2 = k * (k - 1) * std::pow(x.v, k - 2);
        return chain(x, p0, p1, p2);
      }
      if (x.v <= 0) throw EvalError("non-positive base with variable exponent");
      const double lx = std::log(x.v);
      const Dual2 logx = chain(x, lx, 1 / x.v, -1 / (x.v * x.v));
      const Dual2 e = y * logx;
      const double ex = std::exp(e.v);
      return chain(e, ex, ex, ex);
    }
    case Function::Min:
    case Function::Max: {
      const Dual2 y = arg(1);
      const bool is_max = fn == Function::Max;
      const double scale = std::max({1.0, std::abs(x.v), std::abs(y.v)});
      if (std::abs(x.v - y.v) <= 1e-12 * scale) {
        // Tie: differentiate from the right.
        st.nonsmooth = true;
        const bool take_x = is_max ? (x.d > y.d || (x.d == y.d && x.dd >= y.dd))
                                   : (x.d < y.d || (x.d == y.d && x.dd <= y.dd));
        return take_x ? x : y;
      }
      return (x.v > y.v) == is_max ? x : y;
    }
  }
  throw EvalError("unsupported node");
}

inline void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      out += buf;
      return;
    }
    case NodeKind::Variable: out += "r"; return;
    case NodeKind::Pi: out += "pi"; return;
    case NodeKind::Param: out += n.name; return;
    case NodeKind::Negate:
      out += "(-";
      print_node(*n.args[0], out);
      out += ")";
      return;
    case NodeKind::Call:
      out += function_name(n.fn);
      out += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.args[i], out);
      }
      out += ")";
      return;
    default: break;
  }
  const char* op = n.kind == NodeKind::Add   ? " + "
                   : n.kind == NodeKind::Sub ? " - "
                   : n.kind == NodeKind::Mul ? " * "
                   : n.kind == NodeKind::Div ? " / "
                                             : " ^ ";
  out += "(";
  print_node(*n.args[0], out);
  out += op;
  print_node(*n.args[1], out);
  out += ")";
}

}  // namespace detail

/// Parses a profile expression. Identifiers other than r, pi and function
/// names become free parameters.
inline ProfileExpr parse(std::string_view text) {
  if (text.empty()) throw SyntaxError(0, {"expression"}, "end of input");
  detail::Parser p(text);
  return ProfileExpr(p.parse_all());
}

/// Parses and checks every free parameter is bound in params.
inline ProfileExpr parse(std::string_view text, const ParamSet& params) {
  if (text.empty()) throw SyntaxError(0, {"expression"}, "end of input");
  detail::Parser p(text);
  NodePtr root = p.parse_all();
  for (const auto& [name, offset] : p.params())
    if (!params.contains(name)) throw UnknownIdentifier(name, offset);
  return ProfileExpr(std::move(root));
}

/// Canonical fully parenthesized form; parse(print(e)) == e.
inline std::string print(const ProfileExpr& e) {
  std::string out;
  detail::print_node(e.root(), out);
  return out;
}

/// Evaluates the expression and its first two r-derivatives at r.
inline EvalResult eval_d2(const ProfileExpr& expr, double r, const ParamSet& params) {
  detail::EvalState st{&params};
  const Dual2 out = detail::eval_node(expr.root(), Dual2::variable(r), st);
  if (!std::isfinite(out.v) || !std::isfinite(out.d) || !std::isfinite(out.dd))
    throw EvalError("expression is not finite at r = " + std::to_string(r));
  return {out.v, out.d, out.dd, st.nonsmooth};
}

inline double eval(const ProfileExpr& expr, double r, const ParamSet& params) {
  return eval_d2(expr, r, params).value;
}

}  // namespace isomass
