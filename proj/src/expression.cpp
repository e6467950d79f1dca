#include "optmix/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "optmix/errors.hpp"

namespace optmix {

struct Expression::Node {
  enum class Op { Num, X, Y, Add, Sub, Mul, Pow, Neg, Sin, Cos };
  Op op;
  double value = 0.0;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr,
             double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size())
      fail("unexpected trailing input '" + s_.substr(pos_) + "'");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("expression '" + s_ + "': " + why);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (consume('+'))
        lhs = make(Node::Op::Add, lhs, term());
      else if (consume('-'))
        lhs = make(Node::Op::Sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (consume('*'))
        lhs = make(Node::Op::Mul, lhs, factor());
      else
        return lhs;
    }
  }

  // '^' binds tighter than unary minus: -x^2 = -(x^2)
  NodePtr factor() {
    if (consume('-')) return make(Node::Op::Neg, factor());
    if (consume('+')) return factor();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (consume('^')) return make(Node::Op::Pow, base, factor());  // right assoc
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make(Node::Op::Num, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t e = pos_;
      while (e < s_.size() && std::isalpha(static_cast<unsigned char>(s_[e]))) ++e;
      const std::string name = s_.substr(pos_, e - pos_);
      pos_ = e;
      if (name == "x") return make(Node::Op::X);
      if (name == "y") return make(Node::Op::Y);
      if (name == "pi") return make(Node::Op::Num, nullptr, nullptr, std::numbers::pi);
      if (name == "sin" || name == "cos") {
        if (!consume('(')) fail("expected '(' after " + name);
        NodePtr arg = expr();
        if (!consume(')')) fail("missing ')' after " + name + " argument");
        return make(name == "sin" ? Node::Op::Sin : Node::Op::Cos, arg);
      }
      fail("unknown identifier '" + name + "'");
    }
    if (consume('(')) {
      NodePtr e = expr();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    fail(std::string("unexpected character '") + peek() + "'");
  }
};

double eval_node(const Node& n, double x, double y) {
  switch (n.op) {
    case Node::Op::Num: return n.value;
    case Node::Op::X: return x;
    case Node::Op::Y: return y;
    case Node::Op::Add: return eval_node(*n.lhs, x, y) + eval_node(*n.rhs, x, y);
    case Node::Op::Sub: return eval_node(*n.lhs, x, y) - eval_node(*n.rhs, x, y);
    case Node::Op::Mul: return eval_node(*n.lhs, x, y) * eval_node(*n.rhs, x, y);
    case Node::Op::Pow: return std::pow(eval_node(*n.lhs, x, y), eval_node(*n.rhs, x, y));
    case Node::Op::Neg: return -eval_node(*n.lhs, x, y);
    case Node::Op::Sin: return std::sin(eval_node(*n.lhs, x, y));
    case Node::Op::Cos: return std::cos(eval_node(*n.lhs, x, y));
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& source) {
  Expression e;
  e.source_ = source;
  e.root_ = Parser(source).run();
  return e;
}

double Expression::eval(double x, double y) const {
  if (!root_) throw ConfigError("evaluating an empty expression");
  return eval_node(*root_, x, y);
}

}  // namespace optmix
