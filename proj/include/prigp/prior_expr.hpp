#pragma once
// Arithmetic expression language for prior-mean functions.
//
// Grammar (lowest to highest precedence):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' signed)*        left-associative
//   signed  := '-' signed | primary
//   primary := number | variable | constant | func '(' expr ')' | '(' expr ')'
//
// Variables are x, y, z (coordinates 1..3) or x1..xm. Constants: pi, e.
// Functions: sin cos exp log abs sqrt.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prigp/domain.hpp"
#include "prigp/error.hpp"

namespace prigp::expr {

enum class NodeKind : std::uint8_t { kConst, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow, kCall };
enum class Func : std::uint8_t { kSin, kCos, kExp, kLog, kAbs, kSqrt };

struct Node {
  NodeKind kind = NodeKind::kConst;
  Func func = Func::kSin;
  double value = 0.0;      // kConst
  std::size_t var = 0;     // kVar, zero-based coordinate
  std::int32_t lhs = -1;   // operand / left child
  std::int32_t rhs = -1;   // right child
};

/// Raised by parse(); carries the byte offset and the set of tokens that
/// would have been accepted there.
class SyntaxError : public InputError {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found);
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Immutable expression tree stored as a flat node array.
class Ast {
 public:
  static Ast parse(std::string_view source);

  double evaluate(std::span<const double> point) const;

  /// Fully parenthesised rendering that parses back to an equivalent tree.
  std::string to_string() const;

  /// Number of coordinates referenced (max variable index + 1, 0 if none).
  std::size_t arity() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::int32_t root() const { return root_; }

 private:
  friend class Parser;
  double eval_node(std::int32_t id, std::span<const double> point) const;
  void render(std::int32_t id, std::string& out) const;

  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

/// Built-in named priors, e.g. "prior.sin2x". Returns the expression source.
std::optional<std::string_view> catalog_lookup(std::string_view name);

struct CatalogEntry {
  std::string_view name;
  std::string_view source;
};
std::span<const CatalogEntry> catalog();

/// Max gradient norm of `ast` over a cell-centred grid in `box` (50 points per
/// dimension, total capped at 1e5), central differences with step
/// 1e-5 * width, times a 1.1 safety factor. Never below 1e-12.
double lipschitz_estimate(const Ast& ast, const Box& box);

}  // namespace prigp::expr

namespace prigp {

/// A prior mean function f̂ over R^m, defined by an expression or catalog name.
class PriorMeanFunction {
 public:
  /// `source` is either a catalog name ("prior.zero") or an inline expression.
  /// Throws SyntaxError / InputError if it does not parse or references a
  /// coordinate >= dim.
  PriorMeanFunction(std::string_view source, std::size_t dim);

  /// Zero prior in `dim` dimensions.
  static PriorMeanFunction zero(std::size_t dim) { return PriorMeanFunction("0", dim); }

  double operator()(std::span<const double> x) const;

  const expr::Ast& ast() const { return ast_; }
  std::size_t dim() const { return dim_; }
  const std::string& source() const { return source_; }

 private:
  expr::Ast ast_;
  std::size_t dim_;
  std::string source_;
};

}  // namespace prigp
