#pragma once
// Refraction index n(x) as a small arithmetic expression in x1, x2.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := num | 'x1' | 'x2' | '(' expr ')' | factor '^' uint

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "teig/error.hpp"
#include "teig/mesh.hpp"

namespace teig {

class Coefficient {
 public:
  enum class Op { add, sub, mul, div, pow };

  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  struct Number { double value; };
  struct Variable { int index; };  // 1 or 2
  struct Binary { Op op; NodePtr lhs, rhs; };
  struct Power { NodePtr base; unsigned exponent; };
  struct Node { std::variant<Number, Variable, Binary, Power> v; };

  Coefficient() : Coefficient(1.0) {}
  explicit Coefficient(double constant)
      : root_(std::make_shared<Node>(Node{Number{constant}})), text_(format_number(constant)) {}

  static Coefficient parse(std::string_view text);

  double operator()(Point2 x) const { return eval(*root_, x); }
  bool is_constant() const { return !depends_on_position(*root_); }
  const std::string& text() const { return text_; }

 private:
  Coefficient(NodePtr root, std::string text) : root_(std::move(root)), text_(std::move(text)) {}

  static std::string format_number(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
  }

  static double eval(const Node& n, Point2 x) {
    return std::visit(
        [&](const auto& node) -> double {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Number>) {
            return node.value;
          } else if constexpr (std::is_same_v<T, Variable>) {
            return node.index == 1 ? x.x1 : x.x2;
          } else if constexpr (std::is_same_v<T, Power>) {
            const double b = eval(*node.base, x);
            double r = 1.0;
            for (unsigned i = 0; i < node.exponent; ++i) r *= b;
            return r;
          } else {
            const double a = eval(*node.lhs, x), b = eval(*node.rhs, x);
            switch (node.op) {
              case Op::add: return a + b;
              case Op::sub: return a - b;
              case Op::mul: return a * b;
              case Op::div: return a / b;
              default: return 0.0;
            }
          }
        },
        n.v);
  }

  static bool depends_on_position(const Node& n) {
    return std::visit(
        [](const auto& node) -> bool {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Number>) return false;
          else if constexpr (std::is_same_v<T, Variable>) return true;
          else if constexpr (std::is_same_v<T, Power>) return node.exponent > 0 && depends_on_position(*node.base);
          else return depends_on_position(*node.lhs) || depends_on_position(*node.rhs);
        },
        n.v);
  }

  friend class CoefficientParser;
  NodePtr root_;
  std::string text_;
};

class CoefficientParser {
 public:
  explicit CoefficientParser(std::string_view text) : s_(text) {}

  Coefficient run() {
    auto root = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return Coefficient(std::move(root), std::string(s_));
  }

 private:
  using NodePtr = Coefficient::NodePtr;
  using Node = Coefficient::Node;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("coefficient expression, offset " + std::to_string(pos_) + ": " + msg, pos_);
  }

  NodePtr binary(Coefficient::Op op, NodePtr a, NodePtr b) {
    return std::make_shared<Node>(Node{Coefficient::Binary{op, std::move(a), std::move(b)}});
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(Coefficient::Op::add, lhs, term());
      else if (accept('-')) lhs = binary(Coefficient::Op::sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) lhs = binary(Coefficient::Op::mul, lhs, factor());
      else if (accept('/')) lhs = binary(Coefficient::Op::div, lhs, factor());
      else return lhs;
    }
  }

  NodePtr factor() {
    NodePtr base = primary();
    while (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) {
        if (pos_ < s_.size() && s_[pos_] == '-') fail("negative exponents are not supported");
        fail("expected a non-negative integer exponent");
      }
      if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
        fail("fractional exponents are not supported");
      unsigned e = 0;
      auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, e);
      if (ec != std::errc() || e > 64) {
        pos_ = start;
        fail("exponent out of range");
      }
      (void)p;
      base = std::make_shared<Node>(Node{Coefficient::Power{std::move(base), e}});
    }
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (c == 'x') {
      if (pos_ + 1 < s_.size() && (s_[pos_ + 1] == '1' || s_[pos_ + 1] == '2') &&
          (pos_ + 2 >= s_.size() || !std::isalnum(static_cast<unsigned char>(s_[pos_ + 2])))) {
        const int idx = s_[pos_ + 1] - '0';
        pos_ += 2;
        return std::make_shared<Node>(Node{Coefficient::Variable{idx}});
      }
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("malformed number");
      pos_ = static_cast<std::size_t>(p - s_.data());
      return std::make_shared<Node>(Node{Coefficient::Number{v}});
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
      fail("unknown identifier '" + std::string(s_.substr(pos_, end - pos_)) + "' (expected x1 or x2)");
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline Coefficient Coefficient::parse(std::string_view text) { return CoefficientParser(text).run(); }

inline Coefficient parse_coefficient(std::string_view text) { return Coefficient::parse(text); }

/// Which linearization of the transmission problem applies.
enum class Case {
  I,   // n_s > 1, alpha = 1/(n-1)
  II,  // n_b < 1, beta = n/(1-n)
};

inline std::string_view to_string(Case c) { return c == Case::I ? "I" : "II"; }

/// Case and the declared bounds n_s <= n(x) <= n_b.
struct CaseSelector {
  Case which = Case::I;
  double n_s = 2.0;
  double n_b = 2.0;

  /// Picks Case I if n_s > 1, Case II if n_b < 1.
  static CaseSelector from_bounds(double n_s, double n_b) {
    check_bounds(n_s, n_b);
    if (n_s > 1.0) return {Case::I, n_s, n_b};
    if (n_b < 1.0) return {Case::II, n_s, n_b};
    throw ConfigError("refraction bounds [" + std::to_string(n_s) + ", " + std::to_string(n_b) +
                      "] straddle 1: need n_s > 1 (Case I) or n_b < 1 (Case II)");
  }

  static CaseSelector make(Case which, double n_s, double n_b) {
    check_bounds(n_s, n_b);
    if (which == Case::I && !(n_s > 1.0))
      throw ConfigError("Case I requires n_s > 1 (declared n_s = " + std::to_string(n_s) + ")");
    if (which == Case::II && !(n_b < 1.0))
      throw ConfigError("Case II requires n_b < 1 (declared n_b = " + std::to_string(n_b) + ")");
    return {which, n_s, n_b};
  }

 private:
  static void check_bounds(double n_s, double n_b) {
    if (!(n_s > 0.0) || !(n_b >= n_s) || !std::isfinite(n_b))
      throw ConfigError("refraction bounds must satisfy 0 < n_s <= n_b < inf (got n_s = " + std::to_string(n_s) +
                        ", n_b = " + std::to_string(n_b) + ")");
  }
};

}  // namespace teig
