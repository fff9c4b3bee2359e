#include "prigp/prior_expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "prigp/csv.hpp"

namespace prigp::expr {
namespace {

constexpr int kMaxDepth = 200;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

std::string_view func_name(Func f) {
  switch (f) {
    case Func::kSin: return "sin";
    case Func::kCos: return "cos";
    case Func::kExp: return "exp";
    case Func::kLog: return "log";
    case Func::kAbs: return "abs";
    case Func::kSqrt: return "sqrt";
  }
  return "?";
}

std::optional<Func> func_from_name(std::string_view name) {
  for (Func f : {Func::kSin, Func::kCos, Func::kExp, Func::kLog, Func::kAbs, Func::kSqrt}) {
    if (func_name(f) == name) return f;
  }
  return std::nullopt;
}

// x, y, z -> 0, 1, 2; x1..xN -> 0..N-1.
std::optional<std::size_t> variable_index(std::string_view name) {
  if (name == "x") return 0;
  if (name == "y") return 1;
  if (name == "z") return 2;
  if (name.size() >= 2 && name[0] == 'x') {
    std::size_t idx = 0;
    const auto* first = name.data() + 1;
    const auto* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, idx);
    if (ec == std::errc() && ptr == last && idx >= 1 && name[1] != '0') return idx - 1;
  }
  return std::nullopt;
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected,
                         const std::string& found)
    : InputError("syntax error at offset " + std::to_string(offset) + ": expected " +
                 join(expected) + ", found " + found),
      offset_(offset),
      expected_(std::move(expected)) {}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Ast run() {
    skip_ws();
    if (pos_ >= src_.size()) fail({"expression"});
    ast_.root_ = parse_expr(0);
    skip_ws();
    if (pos_ < src_.size()) fail({"operator", "end of input"});
    return std::move(ast_);
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::string found = "end of input";
    if (pos_ < src_.size()) {
      found = "'";
      found += src_[pos_];
      found += "'";
    }
    throw SyntaxError(pos_, std::move(expected), found);
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::int32_t push(Node n) {
    ast_.nodes_.push_back(n);
    return static_cast<std::int32_t>(ast_.nodes_.size() - 1);
  }

  std::int32_t binary(NodeKind k, std::int32_t l, std::int32_t r) {
    Node n;
    n.kind = k;
    n.lhs = l;
    n.rhs = r;
    return push(n);
  }

  void enter(int depth) const {
    if (depth > kMaxDepth) throw SyntaxError(pos_, {"shallower nesting"}, "nesting deeper than 200");
  }

  std::int32_t parse_expr(int depth) {
    enter(depth);
    std::int32_t lhs = parse_term(depth + 1);
    for (;;) {
      if (accept('+')) {
        lhs = binary(NodeKind::kAdd, lhs, parse_term(depth + 1));
      } else if (accept('-')) {
        lhs = binary(NodeKind::kSub, lhs, parse_term(depth + 1));
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_term(int depth) {
    enter(depth);
    std::int32_t lhs = parse_unary(depth + 1);
    for (;;) {
      if (accept('*')) {
        lhs = binary(NodeKind::kMul, lhs, parse_unary(depth + 1));
      } else if (accept('/')) {
        lhs = binary(NodeKind::kDiv, lhs, parse_unary(depth + 1));
      } else {
        return lhs;
      }
    }
  }

  std::int32_t negate(std::int32_t operand) {
    Node n;
    n.kind = NodeKind::kNeg;
    n.lhs = operand;
    return push(n);
  }

  std::int32_t parse_unary(int depth) {
    enter(depth);
    if (accept('-')) return negate(parse_unary(depth + 1));
    return parse_power(depth + 1);
  }

  std::int32_t parse_signed(int depth) {
    enter(depth);
    if (accept('-')) return negate(parse_signed(depth + 1));
    return parse_primary(depth + 1);
  }

  std::int32_t parse_power(int depth) {
    enter(depth);
    std::int32_t lhs = parse_primary(depth + 1);
    while (accept('^')) lhs = binary(NodeKind::kPow, lhs, parse_signed(depth + 1));
    return lhs;
  }

  std::int32_t parse_primary(int depth) {
    enter(depth);
    skip_ws();
    if (pos_ >= src_.size()) fail({"number", "identifier", "'('"});
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      std::int32_t inner = parse_expr(depth + 1);
      if (!accept(')')) fail({"')'"});
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier(depth);
    fail({"number", "identifier", "'('"});
  }

  std::int32_t parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && is_digit(src_[p])) {
        pos_ = p;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      pos_ = start;
      fail({"number"});
    }
    Node n;
    n.kind = NodeKind::kConst;
    n.value = value;
    return push(n);
  }

  std::int32_t parse_identifier(int depth) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (auto f = func_from_name(name)) {
      if (!accept('(')) fail({"'('"});
      std::int32_t arg = parse_expr(depth + 1);
      if (!accept(')')) fail({"')'"});
      Node n;
      n.kind = NodeKind::kCall;
      n.func = *f;
      n.lhs = arg;
      return push(n);
    }
    Node n;
    if (auto v = variable_index(name)) {
      n.kind = NodeKind::kVar;
      n.var = *v;
      return push(n);
    }
    if (name == "pi") {
      n.value = std::numbers::pi;
      return push(n);
    }
    if (name == "e") {
      n.value = std::numbers::e;
      return push(n);
    }
    pos_ = start;
    fail({"variable (x, y, z, x1..xm)", "constant (pi, e)",
          "function (sin, cos, exp, log, abs, sqrt)"});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Ast ast_;
};

Ast Ast::parse(std::string_view source) { return Parser(source).run(); }

std::size_t Ast::arity() const {
  std::size_t n = 0;
  for (const Node& node : nodes_) {
    if (node.kind == NodeKind::kVar) n = std::max(n, node.var + 1);
  }
  return n;
}

double Ast::evaluate(std::span<const double> point) const {
  if (point.size() < arity()) {
    throw InputError("expression needs " + std::to_string(arity()) + " coordinates, got " +
                     std::to_string(point.size()));
  }
  return eval_node(root_, point);
}

double Ast::eval_node(std::int32_t id, std::span<const double> point) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  auto bad = [&](const std::string& why) -> NumericError {
    std::string sub;
    render(id, sub);
    return NumericError("numeric error in '" + sub + "': " + why);
  };
  double v = 0.0;
  switch (n.kind) {
    case NodeKind::kConst:
      return n.value;
    case NodeKind::kVar:
      v = point[n.var];
      if (!std::isfinite(v)) throw bad("non-finite coordinate");
      return v;
    case NodeKind::kNeg:
      return -eval_node(n.lhs, point);
    case NodeKind::kAdd:
      v = eval_node(n.lhs, point) + eval_node(n.rhs, point);
      break;
    case NodeKind::kSub:
      v = eval_node(n.lhs, point) - eval_node(n.rhs, point);
      break;
    case NodeKind::kMul:
      v = eval_node(n.lhs, point) * eval_node(n.rhs, point);
      break;
    case NodeKind::kDiv: {
      const double num = eval_node(n.lhs, point);
      const double den = eval_node(n.rhs, point);
      if (den == 0.0) throw bad("division by zero");
      v = num / den;
      break;
    }
    case NodeKind::kPow:
      v = std::pow(eval_node(n.lhs, point), eval_node(n.rhs, point));
      break;
    case NodeKind::kCall: {
      const double a = eval_node(n.lhs, point);
      switch (n.func) {
        case Func::kSin: v = std::sin(a); break;
        case Func::kCos: v = std::cos(a); break;
        case Func::kExp: v = std::exp(a); break;
        case Func::kAbs: v = std::abs(a); break;
        case Func::kLog:
          if (!(a > 0.0)) throw bad("logarithm of nonpositive value " + format_double(a));
          v = std::log(a);
          break;
        case Func::kSqrt:
          if (a < 0.0) throw bad("square root of negative value " + format_double(a));
          v = std::sqrt(a);
          break;
      }
      break;
    }
  }
  if (!std::isfinite(v)) throw bad("result is not finite");
  return v;
}

std::string Ast::to_string() const {
  std::string out;
  render(root_, out);
  return out;
}

void Ast::render(std::int32_t id, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  auto bin = [&](const char* op) {
    out += '(';
    render(n.lhs, out);
    out += op;
    render(n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case NodeKind::kConst:
      // Negative literals cannot come out of the parser, but keep output parseable.
      if (n.value < 0) {
        out += "(-" + format_double(-n.value) + ")";
      } else {
        out += format_double(n.value);
      }
      break;
    case NodeKind::kVar:
      out += "x" + std::to_string(n.var + 1);
      break;
    case NodeKind::kNeg:
      out += "(-";
      render(n.lhs, out);
      out += ')';
      break;
    case NodeKind::kAdd: bin(" + "); break;
    case NodeKind::kSub: bin(" - "); break;
    case NodeKind::kMul: bin(" * "); break;
    case NodeKind::kDiv: bin(" / "); break;
    case NodeKind::kPow: bin("^"); break;
    case NodeKind::kCall:
      out += func_name(n.func);
      out += '(';
      render(n.lhs, out);
      out += ')';
      break;
  }
}

namespace {

constexpr CatalogEntry kCatalog[] = {
    {"prior.zero", "0"},
    {"prior.minus_one", "-1"},
    {"prior.sin2x", "sin(2*x)"},
    {"prior.cos2x", "cos(2*x)"},
    {"prior.lorenz_f", "-10*sin(z) - 10*x - 0.5/(1+exp(-x*y/10))"},
    {"prior.neg10_sin_z", "-10*sin(z)"},
    {"prior.neg10_x", "-10*x"},
    {"prior.ten_y_logistic", "10*y - 0.5/(1+exp(-x*y/10))"},
    {"prior.logistic", "-0.5/(1+exp(-x*y/10))"},
    {"prior.neg10_cos_z", "-10*cos(z)"},
};

}  // namespace

std::optional<std::string_view> catalog_lookup(std::string_view name) {
  for (const auto& e : kCatalog) {
    if (e.name == name) return e.source;
  }
  return std::nullopt;
}

std::span<const CatalogEntry> catalog() { return kCatalog; }

double lipschitz_estimate(const Ast& ast, const Box& box) {
  box.validate();
  const std::size_t m = box.dim();
  std::size_t per_dim = 50;
  while (per_dim > 1 && std::pow(static_cast<double>(per_dim), static_cast<double>(m)) > 1e5) {
    --per_dim;
  }
  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) total *= per_dim;

  std::vector<double> point(m), probe(m);
  std::vector<std::size_t> idx(m, 0);
  double best = 0.0;
  for (std::size_t count = 0; count < total; ++count) {
    for (std::size_t j = 0; j < m; ++j) {
      point[j] = box.lower[j] + (static_cast<double>(idx[j]) + 0.5) * box.width(j) /
                                    static_cast<double>(per_dim);
    }
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double h = 1e-5 * box.width(j);
      probe = point;
      probe[j] = point[j] + h;
      const double up = ast.evaluate(probe);
      probe[j] = point[j] - h;
      const double down = ast.evaluate(probe);
      const double g = (up - down) / (2.0 * h);
      norm_sq += g * g;
    }
    best = std::max(best, std::sqrt(norm_sq));
    for (std::size_t j = 0; j < m; ++j) {
      if (++idx[j] < per_dim) break;
      idx[j] = 0;
    }
  }
  return std::max(1.1 * best, 1e-12);
}

}  // namespace prigp::expr

namespace prigp {

PriorMeanFunction::PriorMeanFunction(std::string_view source, std::size_t dim)
    : dim_(dim), source_(source) {
  std::string_view text = source;
  if (auto named = expr::catalog_lookup(source)) {
    text = *named;
  } else if (source.starts_with("prior.")) {
    throw InputError("unknown catalog prior '" + std::string(source) + "'");
  }
  ast_ = expr::Ast::parse(text);
  if (ast_.arity() > dim) {
    throw InputError("prior '" + std::string(source) + "' references coordinate " +
                     std::to_string(ast_.arity()) + " but the domain has dimension " +
                     std::to_string(dim));
  }
}

double PriorMeanFunction::operator()(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw InputError("prior expects dimension " + std::to_string(dim_) + ", got " +
                     std::to_string(x.size()));
  }
  return ast_.evaluate(x);
}

}  // namespace prigp
