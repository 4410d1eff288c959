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
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabflow/formula.hpp"
#include "tabflow/table.hpp"

namespace tabflow {

/// A categorical hierarchy: the granular column determines every ancestor.
struct HierarchyGroup {
  std::string granular;
  std::vector<std::string> ancestors;
  bool operator==(const HierarchyGroup&) const = default;
};

struct DerivedColumn {
  std::string column;
  Expr formula;
  bool operator==(const DerivedColumn&) const = default;
};

/// Derived numeric columns computed from a set of independent columns.
struct MathGroup {
  std::vector<std::string> independents;
  std::vector<DerivedColumn> derived;
  bool operator==(const MathGroup&) const = default;
};

/// Datetime columns in chronological order.
struct TemporalChain {
  std::vector<std::string> columns;
  bool operator==(const TemporalChain&) const = default;
};

struct RelationshipSpec {
  std::vector<HierarchyGroup> hierarchies;
  std::vector<MathGroup> math_groups;
  std::vector<TemporalChain> temporal_chains;

  bool empty() const {
    return hierarchies.empty() && math_groups.empty() && temporal_chains.empty();
  }
  bool operator==(const RelationshipSpec&) const = default;
};

// Spec file I/O. Malformed documents raise UsageError.
nlohmann::json to_json(const RelationshipSpec& spec);
RelationshipSpec relationship_spec_from_json(const nlohmann::json& doc);
RelationshipSpec parse_relationship_spec(std::string_view json_text);
RelationshipSpec load_relationship_spec(const std::filesystem::path& path);
void save_relationship_spec(const std::filesystem::path& path,
                            const RelationshipSpec& spec);

// Structural checks against a schema: column existence, kinds, and the
// per-group invariants. Each returns a list of human-readable problems.
std::vector<std::string> check_group(const HierarchyGroup& group,
                                     const std::vector<ColumnSchema>& schema);
std::vector<std::string> check_group(const MathGroup& group,
                                     const std::vector<ColumnSchema>& schema);
std::vector<std::string> check_group(const TemporalChain& chain,
                                     const std::vector<ColumnSchema>& schema);

/// Accumulates groups while enforcing cross-group invariants: a column sits
/// in at most one hierarchy, at most one chain, and is derived in at most one
/// math group; a derived column is never an independent elsewhere.
class SpecAccumulator {
 public:
  explicit SpecAccumulator(std::vector<ColumnSchema> schema);

  /// Returns the problems that prevented insertion; empty on success.
  std::vector<std::string> add(const HierarchyGroup& group);
  std::vector<std::string> add(const MathGroup& group);
  std::vector<std::string> add(const TemporalChain& chain);

  const RelationshipSpec& spec() const { return spec_; }

 private:
  std::vector<ColumnSchema> schema_;
  RelationshipSpec spec_;
  std::set<std::string> hierarchy_cols_;
  std::set<std::string> temporal_cols_;
  std::set<std::string> derived_cols_;
  std::set<std::string> independent_cols_;
};

/// Throws DataError listing every structural problem of the relationship spec.
void check_spec(const RelationshipSpec& spec, const std::vector<ColumnSchema>& schema);

/// Largest allowed |actual - formula| for a derived cell. Covers relative
/// error and, when the column has a display precision, rounding to it.
double derived_tolerance(double actual, double rel_tol, std::optional<int> decimal_places);

enum class GroupType { kHierarchy, kMath, kTemporal };
std::string_view to_string(GroupType type);

struct GroupValidation {
  GroupType type = GroupType::kHierarchy;
  std::size_t index = 0;  // position within its list in the RelationshipSpec
  std::string label;
  std::size_t violations = 0;
  std::size_t total = 0;  // rows, or distinct granular values for hierarchies
  double violation_fraction = 0.0;
  bool passed = false;
};

struct ValidationReport {
  double rel_tol = 0.0;
  double max_violation_fraction = 0.0;
  std::vector<GroupValidation> groups;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

inline constexpr double kDefaultRelTol = 1e-6;
inline constexpr double kDefaultMaxViolationFraction = 0.01;

/// Measures how well each group holds on the table:
///  - math group: fraction of rows where some derived cell misses its formula
///  - temporal chain: fraction of rows not in nondecreasing order
///  - hierarchy: fraction of granular values with more than one ancestor tuple
/// A group passes when its violation fraction is <= max_violation_fraction.
/// Throws DataError for unknown columns or kind mismatches.
ValidationReport validate_spec(const RelationshipSpec& spec, const Table& table,
                               double rel_tol = kDefaultRelTol,
                               double max_violation_fraction = kDefaultMaxViolationFraction);

/// The subset of groups whose validation passed.
RelationshipSpec passing_groups(const RelationshipSpec& spec, const ValidationReport& report);

}  // namespace tabflow
