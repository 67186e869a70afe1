#pragma once
/**
 * @file exprlang.hpp
 * @brief Analytic-expression language: lexer, Pratt parser, printer, and
 *        jet evaluator, wrapping expressions as AnalyticMaps.
 *
 * Grammar (EBNF):
 *   expr     := addexpr
 *   addexpr  := mulexpr { ("+" | "-") mulexpr }
 *   mulexpr  := unexpr  { ("*" | "/") unexpr }
 *   unexpr   := "-" unexpr | powexpr
 *   powexpr  := atom [ "^" unexpr ]          (right associative)
 *   atom     := number | constant | variable | function "(" expr ")"
 *             | "(" expr ")"
 *   constant := "pi" | "i" | "e"
 *   function := exp | log | sqrt | sin | cos | tan | sinh | cosh | tanh
 *
 * One free variable per expression; no implicit multiplication. Whitespace
 * is insignificant. Errors carry byte offsets and expected-token sets.
 */

#include <cctype>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "cmc1/analytic.hpp"
#include "cmc1/errors.hpp"
#include "cmc1/jet.hpp"

namespace cmc1 {
namespace expr {

enum class Kind { Number, Constant, Variable, Unary, Binary, Call };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind;
  double number = 0.0;      // Kind::Number
  std::string name;         // Constant / Call name
  char op = 0;              // Binary op: + - * / ^
  NodePtr lhs, rhs;         // Unary uses lhs only
};

inline NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->number = v;
  return n;
}
inline NodePtr make_constant(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->name = std::move(name);
  return n;
}
inline NodePtr make_variable() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  return n;
}
inline NodePtr make_unary(NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Unary;
  n->lhs = std::move(a);
  return n;
}
inline NodePtr make_binary(char op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}
inline NodePtr make_call(std::string name, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->name = std::move(name);
  n->lhs = std::move(a);
  return n;
}

inline bool is_function_name(const std::string& s) {
  static const char* names[] = {"exp", "log", "sqrt", "sin", "cos",
                                "tan", "sinh", "cosh", "tanh"};
  for (const char* n : names)
    if (s == n) return true;
  return false;
}

// --------------------------------------------------------------------------
// Lexer.
// --------------------------------------------------------------------------

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen,
                 RParen, End };

struct Token {
  Tok kind;
  double number = 0.0;
  std::string ident;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    tok_.offset = pos_;
    if (pos_ >= s_.size()) {
      tok_.kind = Tok::End;
      return;
    }
    const char c = s_[pos_];
    switch (c) {
      case '+': tok_.kind = Tok::Plus; ++pos_; return;
      case '-': tok_.kind = Tok::Minus; ++pos_; return;
      case '*': tok_.kind = Tok::Star; ++pos_; return;
      case '/': tok_.kind = Tok::Slash; ++pos_; return;
      case '^': tok_.kind = Tok::Caret; ++pos_; return;
      case '(': tok_.kind = Tok::LParen; ++pos_; return;
      case ')': tok_.kind = Tok::RParen; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             std::isdigit(static_cast<unsigned char>(s_[pos_])))
        ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        while (pos_ < s_.size() &&
               std::isdigit(static_cast<unsigned char>(s_[pos_])))
          ++pos_;
      }
      // Exponent part only when followed by a digit (with optional sign), so
      // "2*e" still lexes the constant e separately.
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
        if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
          pos_ = p;
          while (pos_ < s_.size() &&
                 std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        }
      }
      tok_.kind = Tok::Number;
      tok_.number = std::stod(s_.substr(start, pos_ - start));
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
              s_[pos_] == '_'))
        ++pos_;
      tok_.kind = Tok::Ident;
      tok_.ident = s_.substr(start, pos_ - start);
      return;
    }
    throw SyntaxError("unexpected character '" + std::string(1, c) + "'",
                      pos_, {"number", "identifier", "operator"});
  }

  std::string s_;
  std::size_t pos_ = 0;
  Token tok_;
};

// --------------------------------------------------------------------------
// Parser (precedence climbing; ^ right-associative and strongest, then
// unary minus, then * /, then + -).
// --------------------------------------------------------------------------

class Parser {
 public:
  Parser(const std::string& text, std::string var)
      : lex_(text), var_(std::move(var)) {}

  NodePtr parse() {
    NodePtr e = parse_add();
    const Token& t = lex_.peek();
    if (t.kind != Tok::End)
      throw SyntaxError("trailing input", t.offset, {"end of input", "operator"});
    return e;
  }

 private:
  NodePtr parse_add() {
    NodePtr lhs = parse_mul();
    for (;;) {
      const Tok k = lex_.peek().kind;
      if (k == Tok::Plus || k == Tok::Minus) {
        const char op = (k == Tok::Plus) ? '+' : '-';
        lex_.take();
        lhs = make_binary(op, lhs, parse_mul());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_mul() {
    NodePtr lhs = parse_unary();
    for (;;) {
      const Tok k = lex_.peek().kind;
      if (k == Tok::Star || k == Tok::Slash) {
        const char op = (k == Tok::Star) ? '*' : '/';
        lex_.take();
        lhs = make_binary(op, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      return make_unary(parse_unary());
    }
    return parse_pow();
  }

  NodePtr parse_pow() {
    NodePtr base = parse_atom();
    if (lex_.peek().kind == Tok::Caret) {
      lex_.take();
      // Right-associative; the exponent may itself start with a unary minus.
      return make_binary('^', base, parse_unary());
    }
    return base;
  }

  NodePtr parse_atom() {
    const Token t = lex_.take();
    switch (t.kind) {
      case Tok::Number:
        return make_number(t.number);
      case Tok::LParen: {
        NodePtr e = parse_add();
        expect_rparen();
        return e;
      }
      case Tok::Ident: {
        if (t.ident == var_) return make_variable();
        if (t.ident == "pi" || t.ident == "i" || t.ident == "e")
          return make_constant(t.ident);
        if (is_function_name(t.ident)) {
          const Token& open = lex_.peek();
          if (open.kind != Tok::LParen)
            throw SyntaxError("expected argument list", open.offset, {"'('"});
          lex_.take();
          NodePtr arg = parse_add();
          expect_rparen();
          return make_call(t.ident, arg);
        }
        throw UnknownIdentifier(t.ident, t.offset);
      }
      default:
        throw SyntaxError("expected expression", t.offset,
                          {"number", "constant", "variable", "function",
                           "'('", "'-'"});
    }
  }

  void expect_rparen() {
    const Token& t = lex_.peek();
    if (t.kind != Tok::RParen)
      throw SyntaxError("expected ')'", t.offset, {"')'"});
    lex_.take();
  }

  Lexer lex_;
  std::string var_;
};

// --------------------------------------------------------------------------
// Printer (minimal parentheses; round-trips through the parser).
// --------------------------------------------------------------------------

namespace detail {
inline int precedence_of(const Node& n) {
  switch (n.kind) {
    case Kind::Binary:
      if (n.op == '+' || n.op == '-') return 1;
      if (n.op == '*' || n.op == '/') return 2;
      return 4;  // ^
    case Kind::Unary:
      return 3;
    default:
      return 5;
  }
}

inline std::string number_repr(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec <= 16; ++prec) {
    char s[40];
    std::snprintf(s, sizeof s, "%.*g", prec, v);
    if (std::stod(s) == v) return s;
  }
  return buf;
}

inline void print_node(const Node& n, std::string& out, const std::string& var,
                       int min_prec) {
  const int prec = precedence_of(n);
  const bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (n.kind) {
    case Kind::Number:
      out += number_repr(n.number);
      break;
    case Kind::Constant:
      out += n.name;
      break;
    case Kind::Variable:
      out += var;
      break;
    case Kind::Unary:
      out += '-';
      print_node(*n.lhs, out, var, 3);
      break;
    case Kind::Binary: {
      if (n.op == '^') {
        // Left operand must outrank ^, the right is a unary-level expr.
        print_node(*n.lhs, out, var, 5);
        out += '^';
        print_node(*n.rhs, out, var, 3);
      } else {
        const int p = precedence_of(n);
        print_node(*n.lhs, out, var, p);
        out += n.op;
        // Left-associative: the right operand needs strictly higher rank.
        print_node(*n.rhs, out, var, p + 1);
      }
      break;
    }
    case Kind::Call:
      out += n.name;
      out += '(';
      print_node(*n.lhs, out, var, 0);
      out += ')';
      break;
  }
  if (parens) out += ')';
}
}  // namespace detail

// --------------------------------------------------------------------------
// Evaluation.
// --------------------------------------------------------------------------

namespace detail {
inline bool depends_on_var(const Node& n) {
  switch (n.kind) {
    case Kind::Variable: return true;
    case Kind::Number:
    case Kind::Constant: return false;
    case Kind::Unary:
    case Kind::Call: return depends_on_var(*n.lhs);
    case Kind::Binary:
      return depends_on_var(*n.lhs) || depends_on_var(*n.rhs);
  }
  return false;
}

inline bool mentions_i(const Node& n) {
  switch (n.kind) {
    case Kind::Constant: return n.name == "i";
    case Kind::Number:
    case Kind::Variable: return false;
    case Kind::Unary:
    case Kind::Call: return mentions_i(*n.lhs);
    case Kind::Binary: return mentions_i(*n.lhs) || mentions_i(*n.rhs);
  }
  return false;
}

inline Jet eval_node(const Node& n, const Jet& var) {
  switch (n.kind) {
    case Kind::Number:
      return Jet::constant(n.number, var.base(), var.order());
    case Kind::Constant: {
      complex v = (n.name == "pi") ? complex(kPi)
                  : (n.name == "i") ? complex(0.0, 1.0)
                                    : complex(std::exp(1.0));
      return Jet::constant(v, var.base(), var.order());
    }
    case Kind::Variable:
      return var;
    case Kind::Unary:
      return complex(0.0) - eval_node(*n.lhs, var);
    case Kind::Binary: {
      const Jet a = eval_node(*n.lhs, var);
      switch (n.op) {
        case '+': return a + eval_node(*n.rhs, var);
        case '-': return a - eval_node(*n.rhs, var);
        case '*': return a * eval_node(*n.rhs, var);
        case '/': return jet_div(a, eval_node(*n.rhs, var));
        default: {  // '^'
          if (!depends_on_var(*n.rhs)) {
            const complex w = eval_node(*n.rhs, var).value();
            return jet_pow(a, w);
          }
          return jet_exp(eval_node(*n.rhs, var) * jet_log(a));
        }
      }
    }
    case Kind::Call: {
      const Jet a = eval_node(*n.lhs, var);
      if (n.name == "exp") return jet_exp(a);
      if (n.name == "log") return jet_log(a);
      if (n.name == "sqrt") return jet_sqrt(a);
      if (n.name == "sin") return jet_sin(a);
      if (n.name == "cos") return jet_cos(a);
      if (n.name == "tan") return jet_tan(a);
      if (n.name == "sinh") return jet_sinh(a);
      if (n.name == "cosh") return jet_cosh(a);
      return jet_tanh(a);
    }
  }
  throw InvalidArgument("eval_node: corrupt AST");
}
}  // namespace detail

}  // namespace expr

/// Parsed analytic expression in one declared free variable.
class Expr {
 public:
  Expr() = default;
  Expr(expr::NodePtr root, std::string var)
      : root_(std::move(root)), var_(std::move(var)) {}

  const expr::NodePtr& root() const { return root_; }
  const std::string& var() const { return var_; }

  std::string print() const {
    std::string out;
    expr::detail::print_node(*root_, out, var_, 0);
    return out;
  }

  Jet eval_jet(complex at, int order) const {
    return expr::detail::eval_node(*root_, Jet::variable(at, order));
  }
  complex eval(complex at) const { return eval_jet(at, 0).value(); }

  /// Structural equality of two ASTs (numbers compared exactly).
  static bool identical(const Expr& a, const Expr& b) {
    return identical_nodes(a.root_, b.root_);
  }

  AnalyticMap as_map() const {
    Expr self = *this;
    const bool real_axis = !expr::detail::mentions_i(*root_);
    return AnalyticMap(
        [self](complex z, int n) { return self.eval_jet(z, n); }, {},
        real_axis);
  }

 private:
  static bool identical_nodes(const expr::NodePtr& a, const expr::NodePtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case expr::Kind::Number: return a->number == b->number;
      case expr::Kind::Constant: return a->name == b->name;
      case expr::Kind::Variable: return true;
      case expr::Kind::Unary: return identical_nodes(a->lhs, b->lhs);
      case expr::Kind::Binary:
        return a->op == b->op && identical_nodes(a->lhs, b->lhs) &&
               identical_nodes(a->rhs, b->rhs);
      case expr::Kind::Call:
        return a->name == b->name && identical_nodes(a->lhs, b->lhs);
    }
    return false;
  }

  expr::NodePtr root_;
  std::string var_;
};

/// Parse an expression over the named free variable.
inline Expr parse_expr(const std::string& text, const std::string& var) {
  expr::Parser p(text, var);
  return Expr(p.parse(), var);
}

/// Convenience: parse to an AnalyticMap directly.
inline AnalyticMap parse_map(const std::string& text, const std::string& var) {
  return parse_expr(text, var).as_map();
}

}  // namespace cmc1
