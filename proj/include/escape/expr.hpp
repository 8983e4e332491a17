#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "escape/dyadic.hpp"

namespace escape {

// Expression AST over Var(i), ConstRational(p,q), Neg, Add, Sub, Mul, Div,
// Abs and n-ary Min/Max. A vector of d expressions defines a map R^d -> R^d.
// Everything except Div and rational constants evaluates exactly in dyadic
// interval arithmetic; Div and constants round outward to a precision the
// caller picks per stage.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Var, Const, Neg, Add, Sub, Mul, Div, Abs, Min, Max };

  Kind kind;
  int var_index = 0;    // Var, 1-based
  mpq_class constant;   // Const
  std::vector<ExprPtr> args;

  // Largest 1-based variable index mentioned (0 for constants).
  int max_var_index() const;
};

namespace ex {
ExprPtr var(int index);
ExprPtr constant(const mpq_class& v);
ExprPtr constant(long p, long q = 1);
ExprPtr neg(ExprPtr a);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr abs(ExprPtr a);
ExprPtr min(std::vector<ExprPtr> args);
ExprPtr max(std::vector<ExprPtr> args);
}  // namespace ex

// Enclosure of e over the box; inclusion-monotone in the box and never wider
// as precision_bits grows. nullopt = DivisionIndeterminate somewhere (a
// denominator enclosure straddles zero); the caller must treat the result as
// unbounded.
std::optional<DyadicInterval> eval_on_box(const Expr& e, std::span<const DyadicInterval> box,
                                          long precision_bits);

std::optional<Box> eval_vector_on_box(std::span<const ExprPtr> es,
                                      std::span<const DyadicInterval> box,
                                      long precision_bits);

// Exact rational evaluation; nullopt on exact division by zero.
std::optional<mpq_class> eval_exact(const Expr& e, std::span<const mpq_class> x);
std::optional<std::vector<mpq_class>> eval_vector_exact(std::span<const ExprPtr> es,
                                                        std::span<const mpq_class> x);

// S-expression syntax: (var 1), (const p q), (add e1 e2), (sub e1 e2),
// (mul e1 e2), (div e1 e2), (neg e), (abs e), (min e1 e2 ...), (max e1 e2 ...).
std::string to_sexpr(const Expr& e);

struct ParseError {
  int line = 0;
  int column = 0;
  std::string message;
};

class SexprParser {
 public:
  explicit SexprParser(std::string_view text);

  // Parses the next expression; nullptr at end of input. Throws ParseError.
  ExprPtr next();
  bool at_end();

  // Reads one bare token (used by the spec-file readers). Throws at EOF.
  std::string next_token();
  std::optional<std::string> peek_token();
  int line() const { return line_; }
  int column() const { return col_; }

 private:
  void skip_ws();
  [[noreturn]] void fail(const std::string& msg) const;

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Parses a single expression from text (must consume all input).
ExprPtr parse_sexpr(std::string_view text);

// "p/q" or "p"; throws ParseError on malformed input.
mpq_class parse_rational_token(const std::string& tok);

}  // namespace escape
