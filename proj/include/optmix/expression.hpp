#pragma once

#include <memory>
#include <string>

namespace optmix {

/// Arithmetic over {x, y, pi, numbers, + - * ^, unary minus, sin, cos,
/// parentheses}: the vocabulary of the benchmark initial conditions.
class Expression {
 public:
  static Expression parse(const std::string& source);  // ConfigError on bad input
  double eval(double x, double y) const;
  const std::string& source() const { return source_; }

  Expression() = default;

  struct Node;  // exposed for the parser implementation

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace optmix
