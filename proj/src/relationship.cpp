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

#include "tabflow/relationship.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tabflow/error.hpp"

namespace tabflow {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& value, std::string_view what) {
  if (!value.is_array()) throw UsageError(fmt::format("'{}' must be an array", what));
  std::vector<std::string> out;
  for (const auto& v : value) {
    if (!v.is_string()) throw UsageError(fmt::format("'{}' must hold strings", what));
    out.push_back(v.get<std::string>());
  }
  return out;
}

const ColumnSchema* find(const std::vector<ColumnSchema>& schema, const std::string& name) {
  for (const auto& c : schema) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void require_kind(const std::vector<ColumnSchema>& schema, const std::string& name,
                  ColumnKind kind, std::vector<std::string>& problems) {
  const ColumnSchema* col = find(schema, name);
  if (col == nullptr) {
    problems.push_back(fmt::format("unknown column '{}'", name));
  } else if (col->kind != kind) {
    problems.push_back(fmt::format("column '{}' is {}, expected {}", name,
                                   to_string(col->kind), to_string(kind)));
  }
}

bool has_duplicates(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  return std::adjacent_find(names.begin(), names.end()) != names.end();
}

std::string label(const HierarchyGroup& g) {
  return fmt::format("hierarchy {} -> [{}]", g.granular, fmt::join(g.ancestors, ", "));
}

std::string label(const MathGroup& g) {
  std::vector<std::string> parts;
  for (const auto& d : g.derived) parts.push_back(d.column + " = " + to_string(d.formula));
  return fmt::format("math {{{}}}", fmt::join(parts, "; "));
}

std::string label(const TemporalChain& c) {
  return fmt::format("temporal [{}]", fmt::join(c.columns, " < "));
}

}  // namespace

json to_json(const RelationshipSpec& spec) {
  json doc;
  doc["hierarchies"] = json::array();
  for (const auto& h : spec.hierarchies) {
    doc["hierarchies"].push_back({{"granular", h.granular}, {"ancestors", h.ancestors}});
  }
  doc["math_groups"] = json::array();
  for (const auto& m : spec.math_groups) {
    json derived = json::array();
    for (const auto& d : m.derived) {
      derived.push_back({{"column", d.column}, {"formula", to_string(d.formula)}});
    }
    doc["math_groups"].push_back({{"independents", m.independents}, {"derived", derived}});
  }
  doc["temporal_chains"] = json::array();
  for (const auto& t : spec.temporal_chains) doc["temporal_chains"].push_back(t.columns);
  return doc;
}

RelationshipSpec relationship_spec_from_json(const json& doc) {
  if (!doc.is_object()) throw UsageError("relationship spec must be a JSON object");
  RelationshipSpec spec;
  if (doc.contains("hierarchies")) {
    for (const auto& h : doc["hierarchies"]) {
      if (!h.is_object() || !h.contains("granular") || !h["granular"].is_string()) {
        throw UsageError("hierarchy entry needs a string 'granular'");
      }
      HierarchyGroup g;
      g.granular = h["granular"].get<std::string>();
      g.ancestors = string_list(h.value("ancestors", json::array()), "ancestors");
      spec.hierarchies.push_back(std::move(g));
    }
  }
  if (doc.contains("math_groups")) {
    for (const auto& m : doc["math_groups"]) {
      if (!m.is_object()) throw UsageError("math group entry must be an object");
      MathGroup g;
      g.independents = string_list(m.value("independents", json::array()), "independents");
      for (const auto& d : m.value("derived", json::array())) {
        if (!d.is_object() || !d.contains("column") || !d.contains("formula") ||
            !d["column"].is_string() || !d["formula"].is_string()) {
          throw UsageError("derived entry needs string 'column' and 'formula'");
        }
        g.derived.push_back({d["column"].get<std::string>(),
                             parse_formula(d["formula"].get<std::string>())});
      }
      spec.math_groups.push_back(std::move(g));
    }
  }
  if (doc.contains("temporal_chains")) {
    for (const auto& t : doc["temporal_chains"]) {
      spec.temporal_chains.push_back({string_list(t, "temporal_chains")});
    }
  }
  return spec;
}

RelationshipSpec parse_relationship_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("relationship spec is not valid JSON: {}", e.what()));
  }
  return relationship_spec_from_json(doc);
}

RelationshipSpec load_relationship_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open relationship spec '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_relationship_spec(buf.str());
}

void save_relationship_spec(const std::filesystem::path& path, const RelationshipSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(fmt::format("cannot write '{}'", path.string()));
  out << to_json(spec).dump(2) << '\n';
}

std::vector<std::string> check_group(const HierarchyGroup& group,
                                     const std::vector<ColumnSchema>& schema) {
  std::vector<std::string> problems;
  require_kind(schema, group.granular, ColumnKind::kCategorical, problems);
  if (group.ancestors.empty()) problems.push_back("hierarchy without ancestors");
  for (const auto& a : group.ancestors) {
    require_kind(schema, a, ColumnKind::kCategorical, problems);
    if (a == group.granular) {
      problems.push_back(fmt::format("granular column '{}' listed as its own ancestor", a));
    }
  }
  if (has_duplicates(group.ancestors)) problems.push_back("duplicate ancestor columns");
  return problems;
}

std::vector<std::string> check_group(const MathGroup& group,
                                     const std::vector<ColumnSchema>& schema) {
  std::vector<std::string> problems;
  if (group.derived.empty()) problems.push_back("math group without derived columns");
  for (const auto& c : group.independents) require_kind(schema, c, ColumnKind::kNumeric, problems);
  if (has_duplicates(group.independents)) problems.push_back("duplicate independent columns");
  const std::set<std::string> independents(group.independents.begin(), group.independents.end());
  std::vector<std::string> derived_names;
  for (const auto& d : group.derived) {
    derived_names.push_back(d.column);
    require_kind(schema, d.column, ColumnKind::kNumeric, problems);
    if (independents.contains(d.column)) {
      problems.push_back(fmt::format("column '{}' is both independent and derived", d.column));
    }
    for (const auto& ref : referenced_columns(d.formula)) {
      if (!independents.contains(ref)) {
        problems.push_back(fmt::format("formula for '{}' references '{}', which is not an independent",
                                       d.column, ref));
      }
    }
  }
  if (has_duplicates(derived_names)) problems.push_back("duplicate derived columns");
  return problems;
}

std::vector<std::string> check_group(const TemporalChain& chain,
                                     const std::vector<ColumnSchema>& schema) {
  std::vector<std::string> problems;
  if (chain.columns.size() < 2) problems.push_back("temporal chain shorter than two columns");
  for (const auto& c : chain.columns) require_kind(schema, c, ColumnKind::kDatetime, problems);
  if (has_duplicates(chain.columns)) problems.push_back("duplicate columns in temporal chain");
  return problems;
}

SpecAccumulator::SpecAccumulator(std::vector<ColumnSchema> schema) : schema_(std::move(schema)) {}

std::vector<std::string> SpecAccumulator::add(const HierarchyGroup& group) {
  auto problems = check_group(group, schema_);
  std::vector<std::string> cols = group.ancestors;
  cols.push_back(group.granular);
  for (const auto& c : cols) {
    if (hierarchy_cols_.contains(c)) {
      problems.push_back(fmt::format("column '{}' already belongs to a hierarchy", c));
    }
  }
  if (!problems.empty()) return problems;
  hierarchy_cols_.insert(cols.begin(), cols.end());
  spec_.hierarchies.push_back(group);
  return problems;
}

std::vector<std::string> SpecAccumulator::add(const MathGroup& group) {
  auto problems = check_group(group, schema_);
  for (const auto& c : group.independents) {
    if (derived_cols_.contains(c)) {
      problems.push_back(fmt::format("independent '{}' is derived in another group", c));
    }
  }
  for (const auto& d : group.derived) {
    if (derived_cols_.contains(d.column)) {
      problems.push_back(fmt::format("column '{}' is already derived in another group", d.column));
    }
    if (independent_cols_.contains(d.column)) {
      problems.push_back(fmt::format("derived '{}' is an independent in another group", d.column));
    }
  }
  if (!problems.empty()) return problems;
  independent_cols_.insert(group.independents.begin(), group.independents.end());
  for (const auto& d : group.derived) derived_cols_.insert(d.column);
  spec_.math_groups.push_back(group);
  return problems;
}

std::vector<std::string> SpecAccumulator::add(const TemporalChain& chain) {
  auto problems = check_group(chain, schema_);
  for (const auto& c : chain.columns) {
    if (temporal_cols_.contains(c)) {
      problems.push_back(fmt::format("column '{}' already belongs to a temporal chain", c));
    }
  }
  if (!problems.empty()) return problems;
  temporal_cols_.insert(chain.columns.begin(), chain.columns.end());
  spec_.temporal_chains.push_back(chain);
  return problems;
}

void check_spec(const RelationshipSpec& spec, const std::vector<ColumnSchema>& schema) {
  SpecAccumulator acc(schema);
  std::vector<std::string> problems;
  auto note = [&](const std::string& what, std::vector<std::string> p) {
    for (auto& msg : p) problems.push_back(what + ": " + msg);
  };
  for (const auto& g : spec.hierarchies) note(label(g), acc.add(g));
  for (const auto& g : spec.math_groups) note(label(g), acc.add(g));
  for (const auto& g : spec.temporal_chains) note(label(g), acc.add(g));
  if (!problems.empty()) {
    throw DataError(fmt::format("invalid relationship spec:\n  {}", fmt::join(problems, "\n  ")));
  }
}

double derived_tolerance(double actual, double rel_tol, std::optional<int> decimal_places) {
  double tol = rel_tol * std::max(1.0, std::abs(actual));
  if (decimal_places) {
    tol = std::max(tol, 0.5 * std::pow(10.0, -*decimal_places) * (1.0 + 1e-9));
  }
  return tol;
}

std::string_view to_string(GroupType type) {
  switch (type) {
    case GroupType::kHierarchy:
      return "hierarchy";
    case GroupType::kMath:
      return "math";
    case GroupType::kTemporal:
      return "temporal";
  }
  return "unknown";
}

bool ValidationReport::all_passed() const {
  return std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.passed; });
}

json ValidationReport::to_json() const {
  json doc;
  doc["rel_tol"] = rel_tol;
  doc["max_violation_fraction"] = max_violation_fraction;
  doc["groups"] = json::array();
  for (const auto& g : groups) {
    doc["groups"].push_back({{"type", std::string(tabflow::to_string(g.type))},
                             {"index", g.index},
                             {"label", g.label},
                             {"violations", g.violations},
                             {"total", g.total},
                             {"violation_fraction", g.violation_fraction},
                             {"status", g.passed ? "pass" : "fail"}});
  }
  return doc;
}

namespace {

GroupValidation finish(GroupType type, std::size_t index, std::string text,
                       std::size_t violations, std::size_t total, double max_fraction) {
  GroupValidation g;
  g.type = type;
  g.index = index;
  g.label = std::move(text);
  g.violations = violations;
  g.total = total;
  g.violation_fraction =
      total == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(total);
  g.passed = g.violation_fraction <= max_fraction;
  return g;
}

std::size_t count_math_violations(const MathGroup& group, const Table& table, double rel_tol) {
  struct Bound {
    std::size_t column;
    BoundFormula formula;
    std::optional<int> places;
  };
  std::vector<Bound> bound;
  for (const auto& d : group.derived) {
    const std::size_t c = table.column_index(d.column);
    bound.push_back({c, BoundFormula(d.formula, table), table.column(c).decimal_places});
  }
  std::size_t violations = 0;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    bool ok = true;
    for (const auto& b : bound) {
      if (table.is_missing(r, b.column)) {
        ok = false;
        break;
      }
      const double actual = table.number(r, b.column);
      try {
        const double expected = b.formula.eval(table, r);
        if (!(std::abs(actual - expected) <= derived_tolerance(actual, rel_tol, b.places))) {
          ok = false;
        }
      } catch (const DataError&) {
        ok = false;  // missing independent or zero denominator
      }
      if (!ok) break;
    }
    if (!ok) ++violations;
  }
  return violations;
}

std::size_t count_temporal_violations(const TemporalChain& chain, const Table& table) {
  std::vector<std::size_t> cols;
  for (const auto& c : chain.columns) cols.push_back(table.column_index(c));
  std::size_t violations = 0;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    bool ok = true;
    for (std::size_t k = 0; k < cols.size() && ok; ++k) {
      if (table.is_missing(r, cols[k])) ok = false;
      if (ok && k > 0 && table.timestamp(r, cols[k]) < table.timestamp(r, cols[k - 1])) ok = false;
    }
    if (!ok) ++violations;
  }
  return violations;
}

std::pair<std::size_t, std::size_t> count_hierarchy_violations(const HierarchyGroup& group,
                                                                const Table& table) {
  const std::size_t g = table.column_index(group.granular);
  std::vector<std::size_t> anc;
  for (const auto& a : group.ancestors) anc.push_back(table.column_index(a));
  std::map<std::string, std::set<std::vector<std::string>>> tuples;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    if (table.is_missing(r, g)) continue;
    std::vector<std::string> tuple;
    for (std::size_t c : anc) {
      tuple.push_back(table.is_missing(r, c) ? std::string("\x00missing", 8)
                                             : std::string(table.category(r, c)));
    }
    tuples[std::string(table.category(r, g))].insert(std::move(tuple));
  }
  std::size_t violations = 0;
  for (const auto& [value, set] : tuples) {
    if (set.size() > 1) ++violations;
  }
  return {violations, tuples.size()};
}

}  // namespace

ValidationReport validate_spec(const RelationshipSpec& spec, const Table& table, double rel_tol,
                               double max_violation_fraction) {
  check_spec(spec, table.schema());
  ValidationReport report;
  report.rel_tol = rel_tol;
  report.max_violation_fraction = max_violation_fraction;
  for (std::size_t i = 0; i < spec.hierarchies.size(); ++i) {
    const auto& h = spec.hierarchies[i];
    auto [violations, total] = count_hierarchy_violations(h, table);
    report.groups.push_back(finish(GroupType::kHierarchy, i, label(h), violations, total,
                                   max_violation_fraction));
  }
  for (std::size_t i = 0; i < spec.math_groups.size(); ++i) {
    const auto& m = spec.math_groups[i];
    report.groups.push_back(finish(GroupType::kMath, i, label(m),
                                   count_math_violations(m, table, rel_tol), table.num_rows(),
                                   max_violation_fraction));
  }
  for (std::size_t i = 0; i < spec.temporal_chains.size(); ++i) {
    const auto& t = spec.temporal_chains[i];
    report.groups.push_back(finish(GroupType::kTemporal, i, label(t),
                                   count_temporal_violations(t, table), table.num_rows(),
                                   max_violation_fraction));
  }
  return report;
}

RelationshipSpec passing_groups(const RelationshipSpec& spec, const ValidationReport& report) {
  RelationshipSpec out;
  for (const auto& g : report.groups) {
    if (!g.passed) continue;
    switch (g.type) {
      case GroupType::kHierarchy:
        out.hierarchies.push_back(spec.hierarchies.at(g.index));
        break;
      case GroupType::kMath:
        out.math_groups.push_back(spec.math_groups.at(g.index));
        break;
      case GroupType::kTemporal:
        out.temporal_chains.push_back(spec.temporal_chains.at(g.index));
        break;
    }
  }
  return out;
}

}  // namespace tabflow
