#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geomech/error.hpp"

namespace geomech {

using Binding = std::map<std::string, double, std::less<>>;

enum class Op { Number, Name, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Ln, Sqrt };

// Immutable expression tree. Copies share structure.
class Expression {
 public:
  struct Node {
    Op op;
    double value = 0.0;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  Expression();  // the literal 0
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  static Expression number(double value);
  static Expression name(std::string name);

  const Node& root() const { return *root_; }
  const NodePtr& node() const { return root_; }

  bool is_number() const { return root_->op == Op::Number; }
  bool is_zero() const { return is_number() && root_->value == 0.0; }

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  friend Expression pow(const Expression& base, const Expression& exponent);

 private:
  NodePtr root_;
};

Expression apply(Op function, const Expression& argument);

Expression parse(std::string_view text);
Expression differentiate(const Expression& e, std::string_view var);
double evaluate(const Expression& e, const Binding& binding);

// Fully parenthesised text that parses back to a structurally equal tree.
std::string to_string(const Expression& e);

bool structurally_equal(const Expression& a, const Expression& b);
std::set<std::string> free_names(const Expression& e);
bool depends_on(const Expression& e, std::string_view name);

// Expression with names resolved to slots once, for repeated evaluation.
// Names not listed as slots must be present in `constants`.
class CompiledExpression {
 public:
  CompiledExpression() = default;
  CompiledExpression(const Expression& e, const std::vector<std::string>& slots,
                     const Binding& constants);

  double operator()(std::span<const double> values) const;

 private:
  struct Instr {
    Op op;
    double value;
    int slot;
    int lhs;
    int rhs;
  };
  int emit(const Expression::NodePtr& node, const std::vector<std::string>& slots,
           const Binding& constants);
  double run(int index, std::span<const double> values) const;

  std::vector<Instr> code_;
  std::vector<Expression::NodePtr> source_;
  int entry_ = -1;
};

}  // namespace geomech
