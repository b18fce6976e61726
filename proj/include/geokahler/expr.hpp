#pragma once

// Closed-form component expressions over chart coordinates and named
// parameters.  Grammar (EBNF):
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = "-" unary | power ;
//   power   = primary [ "^" unary ] ;
//   primary = number | ident | ident "(" expr ")" | "(" expr ")" ;
//
// Functions: sin cos tan sinh cosh tanh exp log sqrt abs.  The identifier
// `pi` is predefined.  `^` is right associative and binds tighter than unary
// minus, so -x^2 = -(x^2).

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "geokahler/jet.hpp"

namespace geokahler {

class ExprError : public std::runtime_error {
 public:
  ExprError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct Symbols {
  std::vector<std::string> coords;
  std::map<std::string, double> params;
};

class Expr {
 public:
  enum class Kind { Num, Var, Param, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Fn { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs };

  Expr() : node_(make_num(0.0)) {}
  static Expr constant(double v) { return Expr(make_num(v)); }
  static Expr parse(std::string_view src, const Symbols& sym);

  double eval(const std::vector<double>& x) const { return eval_node<double>(*node_, x); }
  Jet eval(const std::vector<Jet>& x) const { return eval_node<Jet>(*node_, x); }

  std::string str() const {
    std::string out;
    print(*node_, out);
    return out;
  }
  bool depends_on_coordinates() const { return has_var(*node_); }
  bool is_zero_literal() const { return node_->kind == Kind::Num && node_->num == 0.0; }

  friend bool operator==(const Expr& a, const Expr& b) { return same(*a.node_, *b.node_); }

 private:
  struct Node {
    Kind kind = Kind::Num;
    double num = 0.0;
    std::string name;
    int index = 0;
    Fn fn = Fn::Sin;
    std::shared_ptr<const Node> a, b;
  };
  using NodePtr = std::shared_ptr<const Node>;
  explicit Expr(NodePtr n) : node_(std::move(n)) {}

  static NodePtr make_num(double v) {
    auto n = std::make_shared<Node>();
    n->num = v;
    return n;
  }

  static const std::map<std::string, Fn>& functions() {
    static const std::map<std::string, Fn> table = {
        {"sin", Fn::Sin},   {"cos", Fn::Cos},   {"tan", Fn::Tan}, {"sinh", Fn::Sinh}, {"cosh", Fn::Cosh},
        {"tanh", Fn::Tanh}, {"exp", Fn::Exp},   {"log", Fn::Log}, {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}};
    return table;
  }
  static const char* fn_name(Fn f) {
    switch (f) {
      case Fn::Sin: return "sin";
      case Fn::Cos: return "cos";
      case Fn::Tan: return "tan";
      case Fn::Sinh: return "sinh";
      case Fn::Cosh: return "cosh";
      case Fn::Tanh: return "tanh";
      case Fn::Exp: return "exp";
      case Fn::Log: return "log";
      case Fn::Sqrt: return "sqrt";
      case Fn::Abs: return "abs";
    }
    return "?";
  }

  class Parser;

  template <typename T>
  static T apply_fn(Fn f, const T& x) {
    using std::abs, std::cos, std::cosh, std::exp, std::log, std::sin, std::sinh, std::sqrt, std::tan, std::tanh;
    switch (f) {
      case Fn::Sin: return sin(x);
      case Fn::Cos: return cos(x);
      case Fn::Tan: return tan(x);
      case Fn::Sinh: return sinh(x);
      case Fn::Cosh: return cosh(x);
      case Fn::Tanh: return tanh(x);
      case Fn::Exp: return exp(x);
      case Fn::Log: return log(x);
      case Fn::Sqrt: return sqrt(x);
      case Fn::Abs: return abs(x);
    }
    return x;
  }

  template <typename T>
  static T eval_node(const Node& n, const std::vector<T>& x) {
    switch (n.kind) {
      case Kind::Num: return T(n.num);
      case Kind::Param: return T(n.num);
      case Kind::Var: return x.at(static_cast<std::size_t>(n.index));
      case Kind::Neg: return -eval_node<T>(*n.a, x);
      case Kind::Add: return eval_node<T>(*n.a, x) + eval_node<T>(*n.b, x);
      case Kind::Sub: return eval_node<T>(*n.a, x) - eval_node<T>(*n.b, x);
      case Kind::Mul: return eval_node<T>(*n.a, x) * eval_node<T>(*n.b, x);
      case Kind::Div: return eval_node<T>(*n.a, x) / eval_node<T>(*n.b, x);
      case Kind::Pow: {
        using std::pow;
        const T base = eval_node<T>(*n.a, x);
        if (!has_var(*n.b)) return pow(base, eval_node<double>(*n.b, std::vector<double>{}));
        return pow(base, eval_node<T>(*n.b, x));
      }
      case Kind::Call: return apply_fn<T>(n.fn, eval_node<T>(*n.a, x));
    }
    return T(0.0);
  }

  static bool has_var(const Node& n) {
    if (n.kind == Kind::Var) return true;
    return (n.a && has_var(*n.a)) || (n.b && has_var(*n.b));
  }

  static bool same(const Node& p, const Node& q) {
    if (p.kind != q.kind) return false;
    switch (p.kind) {
      case Kind::Num: return p.num == q.num;
      case Kind::Var: return p.index == q.index && p.name == q.name;
      case Kind::Param: return p.name == q.name && p.num == q.num;
      case Kind::Call: return p.fn == q.fn && same(*p.a, *q.a);
      case Kind::Neg: return same(*p.a, *q.a);
      default: return same(*p.a, *q.a) && same(*p.b, *q.b);
    }
  }

  static int precedence(const Node& n) {
    switch (n.kind) {
      case Kind::Add:
      case Kind::Sub: return 1;
      case Kind::Mul:
      case Kind::Div: return 2;
      case Kind::Neg: return 3;
      case Kind::Pow: return 4;
      case Kind::Num: return n.num < 0 ? 0 : 5;
      default: return 5;
    }
  }

  static void print_child(const Node& c, int min_prec, std::string& out) {
    const bool paren = precedence(c) < min_prec;
    if (paren) out += '(';
    print(c, out);
    if (paren) out += ')';
  }

  static void print(const Node& n, std::string& out) {
    switch (n.kind) {
      case Kind::Num: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.num);
        out += buf;
        return;
      }
      case Kind::Var:
      case Kind::Param: out += n.name; return;
      case Kind::Neg:
        out += '-';
        print_child(*n.a, 3, out);
        return;
      case Kind::Add:
      case Kind::Sub:
        print_child(*n.a, 1, out);
        out += n.kind == Kind::Add ? " + " : " - ";
        print_child(*n.b, 2, out);
        return;
      case Kind::Mul:
      case Kind::Div:
        print_child(*n.a, 2, out);
        out += n.kind == Kind::Mul ? "*" : "/";
        print_child(*n.b, 3, out);
        return;
      case Kind::Pow:
        print_child(*n.a, 5, out);
        out += '^';
        print_child(*n.b, 3, out);
        return;
      case Kind::Call:
        out += fn_name(n.fn);
        out += '(';
        print(*n.a, out);
        out += ')';
        return;
    }
  }

  NodePtr node_;
};

class Expr::Parser {
 public:
  Parser(std::string_view s, const Symbols& sym) : s_(s), sym_(sym) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ExprError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

 private:
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
  static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(Kind::Add, lhs, term());
      else if (accept('-')) lhs = binary(Kind::Sub, lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary(Kind::Mul, lhs, unary());
      else if (accept('/')) lhs = binary(Kind::Div, lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Kind::Neg;
      n->a = unary();
      return n;
    }
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary(Kind::Pow, base, unary());
    return base;
  }
  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ExprError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) throw ExprError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ExprError(std::string("unexpected '") + c + "'", pos_);
  }
  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
      if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
        pos_ = q;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    const std::string text(s_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      throw ExprError("malformed number '" + text + "'", start);
    }
    if (used != text.size()) throw ExprError("malformed number '" + text + "'", start);
    return make_num(v);
  }
  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    const auto& fns = functions();
    if (auto it = fns.find(name); it != fns.end()) {
      if (!accept('(')) throw ExprError("expected '(' after function '" + name + "'", pos_);
      auto n = std::make_shared<Node>();
      n->kind = Kind::Call;
      n->fn = it->second;
      n->a = expr();
      if (!accept(')')) throw ExprError("expected ')'", pos_);
      return n;
    }
    for (std::size_t i = 0; i < sym_.coords.size(); ++i)
      if (sym_.coords[i] == name) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Var;
        n->name = name;
        n->index = static_cast<int>(i);
        return n;
      }
    if (auto it = sym_.params.find(name); it != sym_.params.end()) {
      auto n = std::make_shared<Node>();
      n->kind = Kind::Param;
      n->name = name;
      n->num = it->second;
      return n;
    }
    if (name == "pi") {
      auto n = std::make_shared<Node>();
      n->kind = Kind::Param;
      n->name = name;
      n->num = std::numbers::pi;
      return n;
    }
    throw ExprError("unknown identifier '" + name + "'", start);
  }

  std::string_view s_;
  const Symbols& sym_;
  std::size_t pos_ = 0;
};

inline Expr Expr::parse(std::string_view src, const Symbols& sym) { return Expr(Parser(src, sym).run()); }

}  // namespace geokahler
