#include "geomech/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

namespace geomech {

namespace {

using NodePtr = Expression::NodePtr;
using Node = Expression::Node;

NodePtr make_number(double v) { return std::make_shared<const Node>(Node{Op::Number, v, {}, nullptr, nullptr}); }

NodePtr make_node(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
  if (op == Op::Neg && lhs->op == Op::Number) return make_number(-lhs->value);
  return std::make_shared<const Node>(Node{op, 0.0, {}, std::move(lhs), std::move(rhs)});
}

bool is_num(const NodePtr& n, double v) { return n->op == Op::Number && n->value == v; }

struct FunctionName {
  const char* text;
  Op op;
};
constexpr FunctionName kFunctions[] = {
    {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp},
    {"ln", Op::Ln},   {"sqrt", Op::Sqrt}, {"neg", Op::Neg},
};

const char* function_text(Op op) {
  for (const auto& f : kFunctions)
    if (f.op == op) return f.text;
  return "?";
}

double int_power(double base, long long exponent) {
  const bool invert = exponent < 0;
  unsigned long long e = invert ? static_cast<unsigned long long>(-exponent)
                                : static_cast<unsigned long long>(exponent);
  double result = 1.0;
  double factor = base;
  while (e != 0) {
    if (e & 1ULL) result *= factor;
    factor *= factor;
    e >>= 1;
  }
  return invert ? 1.0 / result : result;
}

// Raised by the scalar kernels; callers attach the offending sub-expression.
struct RawDomain {
  const char* what;
};

[[noreturn]] void domain_fail(const char* what) { throw RawDomain{what}; }

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (b == 0.0) domain_fail("division by zero");
      return a / b;
    case Op::Pow: {
      if (b == std::nearbyint(b) && std::abs(b) < 9.0e15) {
        if (a == 0.0 && b < 0.0) domain_fail("division by zero");
        return int_power(a, static_cast<long long>(b));
      }
      if (!(a > 0.0)) domain_fail("non-integer power of non-positive base");
      return std::pow(a, b);
    }
    default: break;
  }
  return 0.0;
}

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return std::exp(a);
    case Op::Ln:
      if (!(a > 0.0)) domain_fail("logarithm of non-positive value");
      return std::log(a);
    case Op::Sqrt:
      if (a < 0.0) domain_fail("square root of negative value");
      return std::sqrt(a);
    default: break;
  }
  return 0.0;
}

bool is_unary(Op op) { return op >= Op::Neg; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression run() {
    skip();
    if (pos_ == text_.size()) throw SyntaxError(pos_, "empty expression");
    NodePtr e = expr();
    skip();
    if (pos_ != text_.size()) throw SyntaxError(pos_, "unexpected character");
    return Expression(e);
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw SyntaxError(pos_, std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make_node(Op::Add, lhs, term());
      else if (accept('-')) lhs = make_node(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (accept('*')) lhs = make_node(Op::Mul, lhs, factor());
      else if (accept('/')) lhs = make_node(Op::Div, lhs, factor());
      else return lhs;
    }
  }

  // Unary minus is taken here so that -a^b reads as -(a^b).
  NodePtr factor() {
    if (accept('-')) return make_node(Op::Neg, factor());
    NodePtr b = base();
    if (accept('^')) return make_node(Op::Pow, b, exponent());
    return b;
  }

  NodePtr exponent() {
    if (accept('-')) return make_node(Op::Neg, exponent());
    return base();
  }

  NodePtr base() {
    skip();
    if (pos_ == text_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (c == '-') {
      ++pos_;
      return make_node(Op::Neg, base());
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw SyntaxError(pos_, "unexpected character");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t count = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) throw SyntaxError(start, "malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw SyntaxError(pos_, "malformed exponent");
    }
    const std::string token(text_.substr(start, pos_ - start));
    return make_number(std::strtod(token.c_str(), nullptr));
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string id(text_.substr(start, pos_ - start));
    skip();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      for (const auto& f : kFunctions) {
        if (id == f.text) {
          NodePtr arg = expr();
          expect(')');
          return make_node(f.op, arg);
        }
      }
      throw UnknownFunction("unknown function '" + id + "' at offset " + std::to_string(start));
    }
    return std::make_shared<const Node>(Node{Op::Name, 0.0, std::move(id), nullptr, nullptr});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& n, const Binding& b) {
  switch (n.op) {
    case Op::Number: return n.value;
    case Op::Name: {
      auto it = b.find(n.name);
      if (it == b.end()) throw MissingBinding(n.name);
      return it->second;
    }
    default: break;
  }
  const double a = eval_node(*n.lhs, b);
  const double r = is_unary(n.op) ? 0.0 : eval_node(*n.rhs, b);
  try {
    return is_unary(n.op) ? apply_unary(n.op, a) : apply_binary(n.op, a, r);
  } catch (const RawDomain& err) {
    throw DomainError(std::string(err.what) + " in " +
                      to_string(Expression(std::make_shared<const Node>(n))));
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", std::abs(n.value));
      if (std::signbit(n.value)) {
        out += "(-";
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case Op::Name: out += n.name; return;
    case Op::Neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    default: break;
  }
  if (is_unary(n.op)) {
    out += function_text(n.op);
    out += '(';
    print_node(*n.lhs, out);
    out += ')';
    return;
  }
  static constexpr char kSymbol[] = {'?', '?', '+', '-', '*', '/', '^'};
  out += '(';
  print_node(*n.lhs, out);
  out += ' ';
  out += kSymbol[static_cast<int>(n.op)];
  out += ' ';
  print_node(*n.rhs, out);
  out += ')';
}

bool nodes_equal(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  if (a.op == Op::Number) return a.value == b.value && std::signbit(a.value) == std::signbit(b.value);
  if (a.op == Op::Name) return a.name == b.name;
  if (!nodes_equal(*a.lhs, *b.lhs)) return false;
  return is_unary(a.op) || nodes_equal(*a.rhs, *b.rhs);
}

void collect_names(const Node& n, std::set<std::string>& out) {
  if (n.op == Op::Name) out.insert(n.name);
  if (n.lhs) collect_names(*n.lhs, out);
  if (n.rhs) collect_names(*n.rhs, out);
}

bool node_depends(const Node& n, std::string_view name) {
  if (n.op == Op::Name) return n.name == name;
  return (n.lhs && node_depends(*n.lhs, name)) || (n.rhs && node_depends(*n.rhs, name));
}

// Folds literals unless the operation would raise a domain error.
std::optional<double> fold(Op op, const NodePtr& a, const NodePtr& b) {
  if (a->op != Op::Number || (b && b->op != Op::Number)) return std::nullopt;
  try {
    return b ? apply_binary(op, a->value, b->value) : apply_unary(op, a->value);
  } catch (const RawDomain&) {
    return std::nullopt;
  }
}

}  // namespace

Expression::Expression() : root_(make_number(0.0)) {}

Expression Expression::number(double value) { return Expression(make_number(value)); }

Expression Expression::name(std::string name) {
  return Expression(std::make_shared<const Node>(Node{Op::Name, 0.0, std::move(name), nullptr, nullptr}));
}

Expression operator+(const Expression& a, const Expression& b) {
  if (auto v = fold(Op::Add, a.node(), b.node())) return Expression::number(*v);
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Expression(make_node(Op::Add, a.node(), b.node()));
}

Expression operator-(const Expression& a, const Expression& b) {
  if (auto v = fold(Op::Sub, a.node(), b.node())) return Expression::number(*v);
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  return Expression(make_node(Op::Sub, a.node(), b.node()));
}

Expression operator*(const Expression& a, const Expression& b) {
  if (auto v = fold(Op::Mul, a.node(), b.node())) return Expression::number(*v);
  if (a.is_zero() || b.is_zero()) return Expression::number(0.0);
  if (is_num(a.node(), 1.0)) return b;
  if (is_num(b.node(), 1.0)) return a;
  if (is_num(a.node(), -1.0)) return -b;
  if (is_num(b.node(), -1.0)) return -a;
  return Expression(make_node(Op::Mul, a.node(), b.node()));
}

Expression operator/(const Expression& a, const Expression& b) {
  if (auto v = fold(Op::Div, a.node(), b.node())) return Expression::number(*v);
  if (is_num(b.node(), 1.0)) return a;
  if (a.is_zero() && b.is_number() && b.root().value != 0.0) return a;
  return Expression(make_node(Op::Div, a.node(), b.node()));
}

Expression operator-(const Expression& a) {
  if (a.root().op == Op::Neg) return Expression(a.root().lhs);
  return Expression(make_node(Op::Neg, a.node()));
}

Expression pow(const Expression& base, const Expression& exponent) {
  if (auto v = fold(Op::Pow, base.node(), exponent.node())) return Expression::number(*v);
  if (exponent.is_zero()) return Expression::number(1.0);
  if (is_num(exponent.node(), 1.0)) return base;
  return Expression(make_node(Op::Pow, base.node(), exponent.node()));
}

Expression apply(Op function, const Expression& argument) {
  if (function == Op::Neg) return -argument;
  if (auto v = fold(function, argument.node(), nullptr)) return Expression::number(*v);
  return Expression(make_node(function, argument.node()));
}

Expression parse(std::string_view text) { return Parser(text).run(); }

Expression differentiate(const Expression& e, std::string_view var) {
  const Node& n = e.root();
  auto d = [&](const NodePtr& child) { return differentiate(Expression(child), var); };
  switch (n.op) {
    case Op::Number: return Expression::number(0.0);
    case Op::Name: return Expression::number(n.name == var ? 1.0 : 0.0);
    default: break;
  }
  const Expression a(n.lhs);
  const Expression da = d(n.lhs);
  switch (n.op) {
    case Op::Neg: return -da;
    case Op::Sin: return apply(Op::Cos, a) * da;
    case Op::Cos: return -(apply(Op::Sin, a) * da);
    case Op::Exp: return e * da;
    case Op::Ln: return da / a;
    case Op::Sqrt: return da / (Expression::number(2.0) * e);
    default: break;
  }
  const Expression b(n.rhs);
  switch (n.op) {
    case Op::Add: return da + d(n.rhs);
    case Op::Sub: return da - d(n.rhs);
    case Op::Mul: return da * b + a * d(n.rhs);
    case Op::Div: return (da * b - a * d(n.rhs)) / pow(b, Expression::number(2.0));
    case Op::Pow:
      if (!depends_on(b, var)) return b * pow(a, b - Expression::number(1.0)) * da;
      return e * (d(n.rhs) * apply(Op::Ln, a) + b * da / a);
    default: break;
  }
  return Expression::number(0.0);
}

double evaluate(const Expression& e, const Binding& binding) { return eval_node(e.root(), binding); }

std::string to_string(const Expression& e) {
  std::string out;
  print_node(e.root(), out);
  return out;
}

bool structurally_equal(const Expression& a, const Expression& b) { return nodes_equal(a.root(), b.root()); }

std::set<std::string> free_names(const Expression& e) {
  std::set<std::string> out;
  collect_names(e.root(), out);
  return out;
}

bool depends_on(const Expression& e, std::string_view name) { return node_depends(e.root(), name); }

CompiledExpression::CompiledExpression(const Expression& e, const std::vector<std::string>& slots,
                                       const Binding& constants) {
  entry_ = emit(e.node(), slots, constants);
}

int CompiledExpression::emit(const Expression::NodePtr& node, const std::vector<std::string>& slots,
                             const Binding& constants) {
  const Node& n = *node;
  Instr ins{n.op, n.value, -1, -1, -1};
  if (n.op == Op::Name) {
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i] == n.name) ins.slot = static_cast<int>(i);
    if (ins.slot < 0) {
      auto it = constants.find(n.name);
      if (it == constants.end()) throw MissingBinding(n.name);
      ins.op = Op::Number;
      ins.value = it->second;
    }
  } else if (n.op != Op::Number) {
    ins.lhs = emit(n.lhs, slots, constants);
    if (n.rhs) ins.rhs = emit(n.rhs, slots, constants);
  }
  code_.push_back(ins);
  source_.push_back(node);
  return static_cast<int>(code_.size()) - 1;
}

double CompiledExpression::run(int index, std::span<const double> values) const {
  const Instr& ins = code_[static_cast<std::size_t>(index)];
  switch (ins.op) {
    case Op::Number: return ins.value;
    case Op::Name: return values[static_cast<std::size_t>(ins.slot)];
    default: break;
  }
  const double a = run(ins.lhs, values);
  const double b = is_unary(ins.op) ? 0.0 : run(ins.rhs, values);
  try {
    return is_unary(ins.op) ? apply_unary(ins.op, a) : apply_binary(ins.op, a, b);
  } catch (const RawDomain& err) {
    throw DomainError(std::string(err.what) + " in " +
                      to_string(Expression(source_[static_cast<std::size_t>(index)])));
  }
}

double CompiledExpression::operator()(std::span<const double> values) const {
  if (entry_ < 0) return 0.0;
  return run(entry_, values);
}

}  // namespace geomech
