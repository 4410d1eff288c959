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

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tabflow/table.hpp"

namespace tabflow {

/// Arithmetic expression over column references and decimal literals.
struct Expr {
  enum class Op { kColumn, kLiteral, kAdd, kSub, kMul, kDiv, kNeg };

  Op op = Op::kLiteral;
  std::string column;      // kColumn
  double literal = 0.0;    // kLiteral
  std::vector<Expr> args;  // two operands for binary ops, one for kNeg

  static Expr col(std::string name);
  static Expr lit(double value);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr neg(Expr operand);

  bool operator==(const Expr& other) const;
};

/// Infix grammar, lowest precedence first:
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | primary
///   primary := number | identifier | '`' name '`' | '(' sum ')'
/// A '-' immediately followed by a number literal in unary position folds
/// into a negative literal. Throws ParseError with the byte offset.
Expr parse_formula(std::string_view text);

/// Canonical text with minimal parentheses; parse_formula(to_string(e)) == e.
std::string to_string(const Expr& expr);

/// Column names referenced anywhere in the expression.
std::set<std::string> referenced_columns(const Expr& expr);

/// Resolves a column name to its value, or nullopt for a missing cell.
using ColumnLookup = std::function<std::optional<double>(std::string_view)>;

/// IEEE-754 evaluation. Throws DivisionByZero on a zero denominator and
/// DataError when a referenced cell is missing.
double eval_formula(const Expr& expr, const ColumnLookup& lookup);
double eval_formula(const Expr& expr, const Table& table, std::size_t row);

/// Expression with column references resolved to table column indices, for
/// row loops.
class BoundFormula {
 public:
  BoundFormula(const Expr& expr, const Table& table);
  double eval(const Table& table, std::size_t row) const;

 private:
  struct Node {
    Expr::Op op;
    std::size_t column = 0;
    double literal = 0.0;
    int lhs = -1;
    int rhs = -1;
  };
  int bind(const Expr& expr, const Table& table);
  double eval_node(int node, const Table& table, std::size_t row) const;

  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace tabflow
