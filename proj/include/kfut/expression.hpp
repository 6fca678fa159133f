#pragma once

// Scalar expressions over chart coordinates x1..xm, evaluated on jets.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'pi' | xN | func '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: log, exp, sqrt, pow(a, b), pospart(a) (a where a > 0, else 0).

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "kfut/error.hpp"
#include "kfut/jet.hpp"

namespace kfut {

class Expression {
 public:
  Expression() = default;

  static Expression parse(std::string_view text, int num_vars) {
    Parser p{text, 0, num_vars};
    Expression e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("unexpected trailing input");
    e.source_ = std::string(text);
    e.num_vars_ = num_vars;
    return e;
  }

  bool empty() const { return root_ == nullptr; }
  const std::string& source() const { return source_; }
  int num_vars() const { return num_vars_; }

  Jet operator()(std::span<const Jet> x) const {
    if (static_cast<int>(x.size()) != num_vars_)
      throw Error(ErrorKind::shape, "expression expects " + std::to_string(num_vars_) + " coordinates");
    return eval(*root_, x);
  }

  double operator()(std::span<const double> x) const {
    auto jets = coordinate_jets(x, 0);
    return (*this)(std::span<const Jet>(jets)).value();
  }

 private:
  enum class Op { number, variable, add, sub, mul, div, neg, pow, log, exp, sqrt, pospart };

  struct Node {
    Op op;
    double number = 0.0;
    int var = 0;
    std::unique_ptr<Node> a, b;
  };

  struct Parser {
    std::string_view s;
    std::size_t pos;
    int num_vars;

    [[noreturn]] void fail(const std::string& msg) const {
      throw Error(ErrorKind::parse, msg + " at column " + std::to_string(pos + 1) + " in '" + std::string(s) + "'");
    }

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool accept(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> a = nullptr, std::unique_ptr<Node> b = nullptr) {
      auto n = std::make_unique<Node>();
      n->op = op;
      n->a = std::move(a);
      n->b = std::move(b);
      return n;
    }

    std::unique_ptr<Node> parse_expr() {
      auto lhs = parse_term();
      for (;;) {
        if (accept('+'))
          lhs = make(Op::add, std::move(lhs), parse_term());
        else if (accept('-'))
          lhs = make(Op::sub, std::move(lhs), parse_term());
        else
          return lhs;
      }
    }

    std::unique_ptr<Node> parse_term() {
      auto lhs = parse_unary();
      for (;;) {
        if (accept('*'))
          lhs = make(Op::mul, std::move(lhs), parse_unary());
        else if (accept('/'))
          lhs = make(Op::div, std::move(lhs), parse_unary());
        else
          return lhs;
      }
    }

    std::unique_ptr<Node> parse_unary() {
      if (accept('-')) return make(Op::neg, parse_unary());
      if (accept('+')) return parse_unary();
      auto base = parse_primary();
      if (accept('^')) return make(Op::pow, std::move(base), parse_unary());
      return base;
    }

    std::unique_ptr<Node> parse_primary() {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of expression");
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        auto e = parse_expr();
        if (!accept(')')) fail("expected ')'");
        return e;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::string rest(s.substr(pos));
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(rest, &used);
        } catch (const std::exception&) {
          fail("malformed number");
        }
        pos += used;
        auto n = make(Op::number);
        n->number = v;
        return n;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string_view name = s.substr(start, pos - start);
        if (name == "pi") {
          auto n = make(Op::number);
          n->number = std::numbers::pi;
          return n;
        }
        if (name.size() >= 2 && name[0] == 'x' && std::isdigit(static_cast<unsigned char>(name[1]))) {
          const int idx = std::stoi(std::string(name.substr(1)));
          if (idx < 1 || idx > num_vars) {
            pos = start;
            fail("coordinate '" + std::string(name) + "' outside x1..x" + std::to_string(num_vars));
          }
          auto n = make(Op::variable);
          n->var = idx - 1;
          return n;
        }
        Op op;
        int arity = 1;
        if (name == "log")
          op = Op::log;
        else if (name == "exp")
          op = Op::exp;
        else if (name == "sqrt")
          op = Op::sqrt;
        else if (name == "pospart")
          op = Op::pospart;
        else if (name == "pow") {
          op = Op::pow;
          arity = 2;
        } else {
          pos = start;
          fail("unknown identifier '" + std::string(name) + "'");
        }
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        auto a = parse_expr();
        std::unique_ptr<Node> b;
        if (arity == 2) {
          if (!accept(',')) fail("expected ',' in pow(a, b)");
          b = parse_expr();
        }
        if (!accept(')')) fail("expected ')'");
        return make(op, std::move(a), std::move(b));
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  };

  static Jet eval(const Node& n, std::span<const Jet> x) {
    switch (n.op) {
      case Op::number: return x[0].lift(n.number);
      case Op::variable: return x[static_cast<std::size_t>(n.var)];
      case Op::add: return eval(*n.a, x) + eval(*n.b, x);
      case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
      case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
      case Op::div: return eval(*n.a, x) / eval(*n.b, x);
      case Op::neg: return -eval(*n.a, x);
      case Op::pow: {
        if (n.b->op == Op::number) return pow(eval(*n.a, x), n.b->number);
        return pow(eval(*n.a, x), eval(*n.b, x));
      }
      case Op::log: return log(eval(*n.a, x));
      case Op::exp: return exp(eval(*n.a, x));
      case Op::sqrt: return sqrt(eval(*n.a, x));
      case Op::pospart: {
        Jet a = eval(*n.a, x);
        return a.value() > 0.0 ? a : a.lift(0.0);
      }
    }
    throw Error(ErrorKind::parse, "corrupt expression tree");
  }

  std::shared_ptr<const Node> root_;
  std::string source_;
  int num_vars_ = 0;
};

}  // namespace kfut
