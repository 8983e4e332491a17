#include "escape/expr.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>

namespace escape {

int Expr::max_var_index() const {
  if (kind == Kind::Var) return var_index;
  int m = 0;
  for (const auto& a : args) m = std::max(m, a->max_var_index());
  return m;
}

namespace ex {

namespace {
ExprPtr node(Expr::Kind k, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->args = std::move(args);
  for (const auto& a : e->args) {
    if (!a) throw std::invalid_argument("null expression argument");
  }
  return e;
}
}  // namespace

ExprPtr var(int index) {
  if (index < 1) throw std::invalid_argument("variable index must be >= 1");
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->var_index = index;
  return e;
}

ExprPtr constant(const mpq_class& v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Const;
  e->constant = v;
  return e;
}

ExprPtr constant(long p, long q) { return constant(make_rational(p, q)); }

ExprPtr neg(ExprPtr a) { return node(Expr::Kind::Neg, {std::move(a)}); }
ExprPtr add(ExprPtr a, ExprPtr b) { return node(Expr::Kind::Add, {std::move(a), std::move(b)}); }
ExprPtr sub(ExprPtr a, ExprPtr b) { return node(Expr::Kind::Sub, {std::move(a), std::move(b)}); }
ExprPtr mul(ExprPtr a, ExprPtr b) { return node(Expr::Kind::Mul, {std::move(a), std::move(b)}); }
ExprPtr div(ExprPtr a, ExprPtr b) { return node(Expr::Kind::Div, {std::move(a), std::move(b)}); }
ExprPtr abs(ExprPtr a) { return node(Expr::Kind::Abs, {std::move(a)}); }

ExprPtr min(std::vector<ExprPtr> args) {
  if (args.empty()) throw std::invalid_argument("min needs at least one argument");
  return node(Expr::Kind::Min, std::move(args));
}

ExprPtr max(std::vector<ExprPtr> args) {
  if (args.empty()) throw std::invalid_argument("max needs at least one argument");
  return node(Expr::Kind::Max, std::move(args));
}

}  // namespace ex

std::optional<DyadicInterval> eval_on_box(const Expr& e, std::span<const DyadicInterval> box,
                                          long precision_bits) {
  switch (e.kind) {
    case Expr::Kind::Var: {
      int i = e.var_index - 1;
      if (i < 0 || i >= static_cast<int>(box.size()))
        throw std::invalid_argument("variable index outside box dimension");
      return box[i];
    }
    case Expr::Kind::Const: {
      Dyadic lo = Dyadic::round_down(e.constant, precision_bits);
      Dyadic hi = Dyadic::round_up(e.constant, precision_bits);
      return DyadicInterval(lo, hi);
    }
    case Expr::Kind::Neg: {
      auto a = eval_on_box(*e.args[0], box, precision_bits);
      if (!a) return std::nullopt;
      return iv_neg(*a);
    }
    case Expr::Kind::Abs: {
      auto a = eval_on_box(*e.args[0], box, precision_bits);
      if (!a) return std::nullopt;
      return iv_abs(*a);
    }
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul:
    case Expr::Kind::Div: {
      auto a = eval_on_box(*e.args[0], box, precision_bits);
      if (!a) return std::nullopt;
      auto b = eval_on_box(*e.args[1], box, precision_bits);
      if (!b) return std::nullopt;
      switch (e.kind) {
        case Expr::Kind::Add: return iv_add(*a, *b);
        case Expr::Kind::Sub: return iv_sub(*a, *b);
        case Expr::Kind::Mul: return iv_mul(*a, *b);
        default: return iv_div(*a, *b, precision_bits);
      }
    }
    case Expr::Kind::Min:
    case Expr::Kind::Max: {
      std::optional<DyadicInterval> acc;
      for (const auto& arg : e.args) {
        auto v = eval_on_box(*arg, box, precision_bits);
        if (!v) return std::nullopt;
        if (!acc) {
          acc = *v;
        } else {
          acc = e.kind == Expr::Kind::Min ? iv_min(*acc, *v) : iv_max(*acc, *v);
        }
      }
      return acc;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

std::optional<Box> eval_vector_on_box(std::span<const ExprPtr> es,
                                      std::span<const DyadicInterval> box,
                                      long precision_bits) {
  Box out;
  out.reserve(es.size());
  for (const auto& e : es) {
    auto v = eval_on_box(*e, box, precision_bits);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

std::optional<mpq_class> eval_exact(const Expr& e, std::span<const mpq_class> x) {
  switch (e.kind) {
    case Expr::Kind::Var: {
      int i = e.var_index - 1;
      if (i < 0 || i >= static_cast<int>(x.size()))
        throw std::invalid_argument("variable index outside point dimension");
      return x[i];
    }
    case Expr::Kind::Const: return e.constant;
    case Expr::Kind::Neg: {
      auto a = eval_exact(*e.args[0], x);
      if (!a) return std::nullopt;
      return mpq_class(-*a);
    }
    case Expr::Kind::Abs: {
      auto a = eval_exact(*e.args[0], x);
      if (!a) return std::nullopt;
      return rational_abs(*a);
    }
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul:
    case Expr::Kind::Div: {
      auto a = eval_exact(*e.args[0], x);
      if (!a) return std::nullopt;
      auto b = eval_exact(*e.args[1], x);
      if (!b) return std::nullopt;
      switch (e.kind) {
        case Expr::Kind::Add: return mpq_class(*a + *b);
        case Expr::Kind::Sub: return mpq_class(*a - *b);
        case Expr::Kind::Mul: return mpq_class(*a * *b);
        default:
          if (sgn(*b) == 0) return std::nullopt;
          return mpq_class(*a / *b);
      }
    }
    case Expr::Kind::Min:
    case Expr::Kind::Max: {
      std::optional<mpq_class> acc;
      for (const auto& arg : e.args) {
        auto v = eval_exact(*arg, x);
        if (!v) return std::nullopt;
        if (!acc) {
          acc = *v;
        } else if (e.kind == Expr::Kind::Min ? (*v < *acc) : (*v > *acc)) {
          acc = *v;
        }
      }
      return acc;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

std::optional<std::vector<mpq_class>> eval_vector_exact(std::span<const ExprPtr> es,
                                                        std::span<const mpq_class> x) {
  std::vector<mpq_class> out;
  out.reserve(es.size());
  for (const auto& e : es) {
    auto v = eval_exact(*e, x);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

std::string to_sexpr(const Expr& e) {
  std::ostringstream os;
  switch (e.kind) {
    case Expr::Kind::Var: os << "(var " << e.var_index << ")"; break;
    case Expr::Kind::Const:
      os << "(const " << e.constant.get_num().get_str() << " "
         << e.constant.get_den().get_str() << ")";
      break;
    case Expr::Kind::Neg: os << "(neg " << to_sexpr(*e.args[0]) << ")"; break;
    case Expr::Kind::Abs: os << "(abs " << to_sexpr(*e.args[0]) << ")"; break;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul:
    case Expr::Kind::Div: {
      const char* name = e.kind == Expr::Kind::Add   ? "add"
                         : e.kind == Expr::Kind::Sub ? "sub"
                         : e.kind == Expr::Kind::Mul ? "mul"
                                                     : "div";
      os << "(" << name << " " << to_sexpr(*e.args[0]) << " " << to_sexpr(*e.args[1]) << ")";
      break;
    }
    case Expr::Kind::Min:
    case Expr::Kind::Max: {
      os << "(" << (e.kind == Expr::Kind::Min ? "min" : "max");
      for (const auto& a : e.args) os << " " << to_sexpr(*a);
      os << ")";
      break;
    }
  }
  return os.str();
}

SexprParser::SexprParser(std::string_view text) : text_(text) {}

void SexprParser::skip_ws() {
  while (pos_ < text_.size()) {
    char c = text_[pos_];
    if (c == '#') {  // comment to end of line
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      continue;
    }
    if (c == '\n') {
      ++line_;
      col_ = 1;
      ++pos_;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col_;
      ++pos_;
      continue;
    }
    break;
  }
}

void SexprParser::fail(const std::string& msg) const {
  throw ParseError{line_, col_, msg};
}

bool SexprParser::at_end() {
  skip_ws();
  return pos_ >= text_.size();
}

std::string SexprParser::next_token() {
  skip_ws();
  if (pos_ >= text_.size()) fail("unexpected end of input");
  char c = text_[pos_];
  if (c == '(' || c == ')') {
    ++pos_;
    ++col_;
    return std::string(1, c);
  }
  std::size_t start = pos_;
  while (pos_ < text_.size()) {
    char d = text_[pos_];
    if (d == '(' || d == ')' || d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == '#')
      break;
    ++pos_;
    ++col_;
  }
  return std::string(text_.substr(start, pos_ - start));
}

std::optional<std::string> SexprParser::peek_token() {
  std::size_t save_pos = pos_;
  int save_line = line_, save_col = col_;
  if (at_end()) return std::nullopt;
  std::string tok = next_token();
  pos_ = save_pos;
  line_ = save_line;
  col_ = save_col;
  return tok;
}

namespace {

bool is_integer_token(const std::string& t) {
  if (t.empty()) return false;
  std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
  if (i == t.size()) return false;
  for (; i < t.size(); ++i)
    if (t[i] < '0' || t[i] > '9') return false;
  return true;
}

}  // namespace

mpq_class parse_rational_token(const std::string& tok) {
  auto slash = tok.find('/');
  if (slash != std::string::npos) {
    std::string num = tok.substr(0, slash);
    std::string den = tok.substr(slash + 1);
    if (!is_integer_token(num) || !is_integer_token(den))
      throw ParseError{0, 0, "malformed rational '" + tok + "'"};
    mpz_class d(den, 10);
    if (sgn(d) == 0) throw ParseError{0, 0, "zero denominator in '" + tok + "'"};
    return make_rational(mpz_class(num, 10), d);
  }
  auto dot = tok.find('.');
  if (dot != std::string::npos) {
    std::string whole = tok.substr(0, dot);
    std::string frac = tok.substr(dot + 1);
    std::string sign;
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) {
      sign = whole.substr(0, 1);
      whole = whole.substr(1);
    }
    if (whole.empty()) whole = "0";
    if (frac.empty() || !is_integer_token(whole) || !is_integer_token(frac) ||
        frac[0] == '-' || frac[0] == '+')
      throw ParseError{0, 0, "malformed decimal '" + tok + "'"};
    mpz_class scale(1);
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    mpz_class num = mpz_class(whole, 10) * scale + mpz_class(frac, 10);
    if (sign == "-") num = -num;
    return make_rational(num, scale);
  }
  if (!is_integer_token(tok)) throw ParseError{0, 0, "malformed rational '" + tok + "'"};
  return mpq_class(mpz_class(tok, 10));
}

ExprPtr SexprParser::next() {
  if (at_end()) return nullptr;
  int start_line = line_, start_col = col_;
  std::string tok = next_token();
  if (tok != "(")
    throw ParseError{start_line, start_col, "expected '(' to open an expression"};
  std::string head = next_token();
  auto read_args = [&](std::size_t lo, std::size_t hi) {
    std::vector<ExprPtr> args;
    while (true) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ')') {
        ++pos_;
        ++col_;
        break;
      }
      ExprPtr a = next();
      if (!a) fail("unterminated expression");
      args.push_back(std::move(a));
      if (args.size() > hi) fail("too many arguments for '" + head + "'");
    }
    if (args.size() < lo) fail("too few arguments for '" + head + "'");
    return args;
  };

  if (head == "var") {
    std::string idx = next_token();
    if (!is_integer_token(idx)) fail("variable index must be an integer");
    long i = std::stol(idx);
    if (next_token() != ")") fail("expected ')' after variable index");
    return ex::var(static_cast<int>(i));
  }
  if (head == "const") {
    std::string p = next_token();
    std::string q = next_token();
    if (!is_integer_token(p) || !is_integer_token(q)) fail("const needs two integers");
    if (next_token() != ")") fail("expected ')' after constant");
    mpz_class den(q, 10);
    if (sgn(den) == 0) fail("constant with zero denominator");
    return ex::constant(make_rational(mpz_class(p, 10), den));
  }
  if (head == "neg") return ex::neg(read_args(1, 1)[0]);
  if (head == "abs") return ex::abs(read_args(1, 1)[0]);
  if (head == "add") {
    auto a = read_args(2, 2);
    return ex::add(a[0], a[1]);
  }
  if (head == "sub") {
    auto a = read_args(2, 2);
    return ex::sub(a[0], a[1]);
  }
  if (head == "mul") {
    auto a = read_args(2, 2);
    return ex::mul(a[0], a[1]);
  }
  if (head == "div") {
    auto a = read_args(2, 2);
    return ex::div(a[0], a[1]);
  }
  if (head == "min") return ex::min(read_args(1, SIZE_MAX));
  if (head == "max") return ex::max(read_args(1, SIZE_MAX));
  throw ParseError{start_line, start_col, "unknown operator '" + head + "'"};
}

ExprPtr parse_sexpr(std::string_view text) {
  SexprParser p(text);
  ExprPtr e = p.next();
  if (!e) throw ParseError{p.line(), p.column(), "empty expression"};
  if (!p.at_end()) throw ParseError{p.line(), p.column(), "trailing input after expression"};
  return e;
}

}  // namespace escape
