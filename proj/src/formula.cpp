/*
 * Copyright 2026 The TabFlow Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tabflow/formula.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "tabflow/error.hpp"

namespace tabflow {

Expr Expr::col(std::string name) {
  Expr e;
  e.op = Op::kColumn;
  e.column = std::move(name);
  return e;
}

Expr Expr::lit(double value) {
  Expr e;
  e.op = Op::kLiteral;
  e.literal = value;
  return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  Expr e;
  e.op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

Expr Expr::neg(Expr operand) {
  Expr e;
  e.op = Op::kNeg;
  e.args.push_back(std::move(operand));
  return e;
}

bool Expr::operator==(const Expr& other) const {
  if (op != other.op) return false;
  switch (op) {
    case Op::kColumn:
      return column == other.column;
    case Op::kLiteral:
      return literal == other.literal;
    default:
      return args == other.args;
  }
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
    }
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool peek(char ch) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == ch;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    while (true) {
      if (peek('+')) {
        ++pos_;
        lhs = Expr::binary(Expr::Op::kAdd, std::move(lhs), parse_product());
      } else if (peek('-')) {
        ++pos_;
        lhs = Expr::binary(Expr::Op::kSub, std::move(lhs), parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        lhs = Expr::binary(Expr::Op::kMul, std::move(lhs), parse_unary());
      } else if (peek('/')) {
        ++pos_;
        lhs = Expr::binary(Expr::Op::kDiv, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (peek('-')) {
      ++pos_;
      if (pos_ < text_.size() && starts_number(text_[pos_])) {
        return Expr::lit(-parse_number());
      }
      return Expr::neg(parse_unary());
    }
    return parse_primary();
  }

  static bool starts_number(char ch) {
    return std::isdigit(static_cast<unsigned char>(ch)) || ch == '.';
  }

  static bool ident_start(char ch) {
    return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_';
  }

  static bool ident_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
  }

  double parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
        pos_ = p;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw ParseError(fmt::format("malformed number '{}'",
                                   text_.substr(start, pos_ - start)),
                       start);
    }
    return value;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of formula", pos_);
    const char ch = text_[pos_];
    if (ch == '(') {
      ++pos_;
      Expr inner = parse_sum();
      if (!peek(')')) throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (ch == '`') {
      const std::size_t start = pos_++;
      const auto close = text_.find('`', pos_);
      if (close == std::string_view::npos) {
        throw ParseError("unterminated quoted column name", start);
      }
      std::string name(text_.substr(pos_, close - pos_));
      if (name.empty()) throw ParseError("empty column name", start);
      pos_ = close + 1;
      return Expr::col(std::move(name));
    }
    if (starts_number(ch)) return Expr::lit(parse_number());
    if (ident_start(ch)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      return Expr::col(std::string(text_.substr(start, pos_ - start)));
    }
    throw ParseError(fmt::format("unknown token '{}'", ch), pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int precedence(Expr::Op op) {
  switch (op) {
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
      return 1;
    case Expr::Op::kMul:
    case Expr::Op::kDiv:
      return 2;
    case Expr::Op::kNeg:
      return 3;
    default:
      return 4;
  }
}

bool is_bare_identifier(const std::string& name) {
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) {
    return false;
  }
  for (char ch : name) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) return false;
  }
  return true;
}

void print(const Expr& e, std::string& out) {
  switch (e.op) {
    case Expr::Op::kColumn:
      if (is_bare_identifier(e.column)) {
        out += e.column;
      } else {
        out += '`';
        out += e.column;
        out += '`';
      }
      return;
    case Expr::Op::kLiteral:
      out += fmt::format("{}", e.literal);
      return;
    case Expr::Op::kNeg: {
      const Expr& arg = e.args[0];
      out += '-';
      // "-(2)" keeps a negated literal distinct from the literal -2.
      const bool wrap = precedence(arg.op) < precedence(Expr::Op::kNeg) ||
                        arg.op == Expr::Op::kLiteral;
      if (wrap) out += '(';
      print(arg, out);
      if (wrap) out += ')';
      return;
    }
    default:
      break;
  }
  const int p = precedence(e.op);
  const Expr& lhs = e.args[0];
  const Expr& rhs = e.args[1];
  const bool wrap_l = precedence(lhs.op) < p;
  // Left associativity: an equal-precedence right operand needs parentheses.
  const bool wrap_r = precedence(rhs.op) <= p;
  if (wrap_l) out += '(';
  print(lhs, out);
  if (wrap_l) out += ')';
  switch (e.op) {
    case Expr::Op::kAdd:
      out += " + ";
      break;
    case Expr::Op::kSub:
      out += " - ";
      break;
    case Expr::Op::kMul:
      out += " * ";
      break;
    default:
      out += " / ";
      break;
  }
  if (wrap_r) out += '(';
  print(rhs, out);
  if (wrap_r) out += ')';
}

void collect(const Expr& e, std::set<std::string>& out) {
  if (e.op == Expr::Op::kColumn) out.insert(e.column);
  for (const auto& a : e.args) collect(a, out);
}

double apply(Expr::Op op, double a, double b) {
  switch (op) {
    case Expr::Op::kAdd:
      return a + b;
    case Expr::Op::kSub:
      return a - b;
    case Expr::Op::kMul:
      return a * b;
    case Expr::Op::kDiv:
      if (b == 0.0) throw DivisionByZero("division by zero in formula");
      return a / b;
    default:
      return 0.0;
  }
}

}  // namespace

Expr parse_formula(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Expr& expr) {
  std::string out;
  print(expr, out);
  return out;
}

std::set<std::string> referenced_columns(const Expr& expr) {
  std::set<std::string> out;
  collect(expr, out);
  return out;
}

double eval_formula(const Expr& expr, const ColumnLookup& lookup) {
  switch (expr.op) {
    case Expr::Op::kColumn: {
      auto v = lookup(expr.column);
      if (!v) throw DataError(fmt::format("missing value for column '{}'", expr.column));
      return *v;
    }
    case Expr::Op::kLiteral:
      return expr.literal;
    case Expr::Op::kNeg:
      return -eval_formula(expr.args[0], lookup);
    default:
      return apply(expr.op, eval_formula(expr.args[0], lookup),
                   eval_formula(expr.args[1], lookup));
  }
}

double eval_formula(const Expr& expr, const Table& table, std::size_t row) {
  return eval_formula(expr, [&](std::string_view name) -> std::optional<double> {
    const std::size_t c = table.column_index(name);
    if (table.is_missing(row, c)) return std::nullopt;
    return table.number(row, c);
  });
}

BoundFormula::BoundFormula(const Expr& expr, const Table& table) {
  root_ = bind(expr, table);
}

int BoundFormula::bind(const Expr& expr, const Table& table) {
  Node node{expr.op};
  if (expr.op == Expr::Op::kColumn) {
    node.column = table.column_index(expr.column);
    if (table.column(node.column).kind != ColumnKind::kNumeric) {
      throw DataError(fmt::format("formula column '{}' is not numeric", expr.column));
    }
  } else if (expr.op == Expr::Op::kLiteral) {
    node.literal = expr.literal;
  } else {
    node.lhs = bind(expr.args[0], table);
    if (expr.args.size() > 1) node.rhs = bind(expr.args[1], table);
  }
  nodes_.push_back(node);
  return static_cast<int>(nodes_.size() - 1);
}

double BoundFormula::eval_node(int index, const Table& table, std::size_t row) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  switch (n.op) {
    case Expr::Op::kColumn:
      if (table.is_missing(row, n.column)) {
        throw DataError(fmt::format("row {}: missing value for column '{}'", row,
                                    table.column(n.column).name));
      }
      return table.number(row, n.column);
    case Expr::Op::kLiteral:
      return n.literal;
    case Expr::Op::kNeg:
      return -eval_node(n.lhs, table, row);
    default:
      return apply(n.op, eval_node(n.lhs, table, row), eval_node(n.rhs, table, row));
  }
}

double BoundFormula::eval(const Table& table, std::size_t row) const {
  return eval_node(root_, table, row);
}

}  // namespace tabflow
