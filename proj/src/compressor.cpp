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

#include "tabflow/compressor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "tabflow/error.hpp"
#include "tabflow/json_io.hpp"

namespace tabflow {

using nlohmann::json;

const HierarchyMap::Entry* HierarchyMap::find(std::string_view granular) const {
  auto it = entries.find(granular);
  return it == entries.end() ? nullptr : &it->second;
}

HierarchyMap build_hierarchy_map(const Table& table, const HierarchyGroup& group) {
  const std::size_t g = table.column_index(group.granular);
  std::vector<std::size_t> anc;
  for (const auto& a : group.ancestors) anc.push_back(table.column_index(a));

  std::map<std::string, std::map<std::vector<std::string>, std::size_t>> votes;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    std::vector<std::string> tuple;
    tuple.reserve(anc.size());
    for (std::size_t c : anc) {
      if (table.is_missing(r, c)) {
        throw DataError(fmt::format("row {}: missing value in hierarchy column '{}'", r,
                                    table.column(c).name));
      }
      tuple.emplace_back(table.category(r, c));
    }
    if (table.is_missing(r, g)) {
      throw DataError(fmt::format("row {}: missing value in hierarchy column '{}'", r,
                                  group.granular));
    }
    ++votes[std::string(table.category(r, g))][std::move(tuple)];
  }

  HierarchyMap map;
  map.group = group;
  for (auto& [value, tally] : votes) {
    HierarchyMap::Entry entry;
    // std::map iterates tuples in lexicographic order, so the first maximum
    // wins ties.
    for (const auto& [tuple, n] : tally) {
      entry.count += n;
      if (n > entry.agreeing) {
        entry.agreeing = n;
        entry.ancestors = tuple;
      }
    }
    map.entries.emplace(value, std::move(entry));
  }
  return map;
}

std::int64_t TemporalLayout::clamp_floor(std::size_t j) const {
  const Diff& d = diffs.at(j);
  if (d.all_positive && d.min_positive) return *d.min_positive;
  return 0;
}

std::int64_t time_quantum(const std::vector<std::int64_t>& values) {
  for (std::int64_t q : {std::int64_t{86400}, std::int64_t{3600}, std::int64_t{60}}) {
    if (std::all_of(values.begin(), values.end(), [q](std::int64_t v) { return v % q == 0; })) {
      return q;
    }
  }
  return 1;
}

std::string diff_column_name(std::size_t chain, std::size_t k) {
  return fmt::format("dt__{}__{}", chain, k);
}

RelationshipSpec DecompressionContext::spec() const {
  RelationshipSpec out;
  for (const auto& m : hierarchy_maps) out.hierarchies.push_back(m.group);
  out.math_groups = math_groups;
  for (const auto& t : temporal_layouts) out.temporal_chains.push_back({t.columns});
  return out;
}

json DecompressionContext::to_json() const {
  json doc;
  doc["format"] = std::string(kFormat);
  doc["version"] = kVersion;
  doc["original_schema"] = tabflow::to_json(original_schema);
  doc["compressed_schema"] = tabflow::to_json(compressed_schema);
  doc["hierarchy_maps"] = json::array();
  for (const auto& m : hierarchy_maps) {
    json entries = json::array();
    for (const auto& [value, e] : m.entries) {
      entries.push_back({{"granular", value},
                         {"ancestors", e.ancestors},
                         {"count", e.count},
                         {"agreeing", e.agreeing}});
    }
    doc["hierarchy_maps"].push_back({{"granular", m.group.granular},
                                     {"ancestors", m.group.ancestors},
                                     {"entries", std::move(entries)}});
  }
  RelationshipSpec math_only;
  math_only.math_groups = math_groups;
  doc["math_groups"] = tabflow::to_json(math_only)["math_groups"];
  doc["temporal_layouts"] = json::array();
  for (const auto& t : temporal_layouts) {
    json diffs = json::array();
    for (const auto& d : t.diffs) {
      json item{{"column", d.column}, {"all_positive", d.all_positive}, {"quantum", d.quantum}};
      item["min_positive"] = d.min_positive ? json(*d.min_positive) : json(nullptr);
      diffs.push_back(std::move(item));
    }
    doc["temporal_layouts"].push_back(
        {{"columns", t.columns}, {"base_quantum", t.base_quantum}, {"diffs", std::move(diffs)}});
  }
  return doc;
}

DecompressionContext DecompressionContext::from_json(const json& doc) {
  require_format(doc, std::string(kFormat), kVersion);
  DecompressionContext ctx;
  try {
    ctx.original_schema = schema_from_json(doc.at("original_schema"));
    ctx.compressed_schema = schema_from_json(doc.at("compressed_schema"));
    for (const auto& m : doc.at("hierarchy_maps")) {
      HierarchyMap map;
      map.group.granular = m.at("granular").get<std::string>();
      map.group.ancestors = m.at("ancestors").get<std::vector<std::string>>();
      for (const auto& e : m.at("entries")) {
        map.entries.emplace(e.at("granular").get<std::string>(),
                            HierarchyMap::Entry{e.at("ancestors").get<std::vector<std::string>>(),
                                                e.at("count").get<std::size_t>(),
                                                e.at("agreeing").get<std::size_t>()});
      }
      ctx.hierarchy_maps.push_back(std::move(map));
    }
    ctx.math_groups =
        relationship_spec_from_json(json{{"math_groups", doc.at("math_groups")}}).math_groups;
    for (const auto& t : doc.at("temporal_layouts")) {
      TemporalLayout layout;
      layout.columns = t.at("columns").get<std::vector<std::string>>();
      layout.base_quantum = t.at("base_quantum").get<std::int64_t>();
      for (const auto& d : t.at("diffs")) {
        TemporalLayout::Diff diff;
        diff.column = d.at("column").get<std::string>();
        diff.all_positive = d.at("all_positive").get<bool>();
        diff.quantum = d.at("quantum").get<std::int64_t>();
        if (!d.at("min_positive").is_null()) diff.min_positive = d["min_positive"].get<std::int64_t>();
        layout.diffs.push_back(std::move(diff));
      }
      ctx.temporal_layouts.push_back(std::move(layout));
    }
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("malformed decompression context: {}", e.what()));
  }
  return ctx;
}

void DecompressionContext::save(const std::filesystem::path& path) const {
  write_json_file(path, to_json());
}

DecompressionContext DecompressionContext::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

namespace {

void require_complete(const Table& table, const std::string& column) {
  const std::size_t c = table.column_index(column);
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    if (table.is_missing(r, c)) {
      throw DataError(fmt::format("row {}: missing value in column '{}', which a relationship uses",
                                  r, column));
    }
  }
}

}  // namespace

CompressResult compress(const Table& table, const RelationshipSpec& spec) {
  check_spec(spec, table.schema());

  std::set<std::string> dropped;
  std::set<std::string> referenced;
  for (const auto& h : spec.hierarchies) {
    referenced.insert(h.granular);
    for (const auto& a : h.ancestors) {
      referenced.insert(a);
      dropped.insert(a);
    }
  }
  for (const auto& m : spec.math_groups) {
    referenced.insert(m.independents.begin(), m.independents.end());
    for (const auto& d : m.derived) {
      referenced.insert(d.column);
      dropped.insert(d.column);
    }
  }
  for (const auto& t : spec.temporal_chains) {
    referenced.insert(t.columns.begin(), t.columns.end());
    dropped.insert(t.columns.begin() + 1, t.columns.end());
  }
  for (const auto& c : referenced) require_complete(table, c);

  DecompressionContext ctx;
  ctx.original_schema = table.schema();
  ctx.math_groups = spec.math_groups;
  for (const auto& h : spec.hierarchies) {
    ctx.hierarchy_maps.push_back(build_hierarchy_map(table, h));
  }

  // Per-chain diffs, keyed by base column so they can be spliced in after it.
  std::unordered_map<std::string, std::size_t> chain_of_base;
  std::vector<std::vector<std::vector<std::int64_t>>> chain_diffs;
  for (std::size_t i = 0; i < spec.temporal_chains.size(); ++i) {
    const auto& cols = spec.temporal_chains[i].columns;
    TemporalLayout layout;
    layout.columns = cols;
    std::vector<std::size_t> idx;
    for (const auto& c : cols) idx.push_back(table.column_index(c));

    std::vector<std::int64_t> base_values;
    std::vector<std::vector<std::int64_t>> diffs(cols.size() - 1);
    for (std::size_t r = 0; r < table.num_rows(); ++r) {
      base_values.push_back(table.timestamp(r, idx[0]).seconds);
      for (std::size_t k = 1; k < idx.size(); ++k) {
        diffs[k - 1].push_back(table.timestamp(r, idx[k]).seconds -
                               table.timestamp(r, idx[k - 1]).seconds);
      }
    }
    layout.base_quantum = time_quantum(base_values);
    for (std::size_t k = 1; k < cols.size(); ++k) {
      TemporalLayout::Diff d;
      d.column = diff_column_name(i, k + 1);
      const auto& v = diffs[k - 1];
      d.all_positive = !v.empty() && std::all_of(v.begin(), v.end(), [](auto x) { return x > 0; });
      for (auto x : v) {
        if (x > 0 && (!d.min_positive || x < *d.min_positive)) d.min_positive = x;
      }
      d.quantum = time_quantum(v);
      layout.diffs.push_back(std::move(d));
    }
    chain_of_base.emplace(cols[0], i);
    chain_diffs.push_back(std::move(diffs));
    ctx.temporal_layouts.push_back(std::move(layout));
  }

  // Compressed schema and, per output column, where its values come from.
  struct Source {
    std::size_t column = 0;  // original column, or chain index for diffs
    std::size_t diff = 0;
    bool is_diff = false;
  };
  std::vector<Source> sources;
  for (std::size_t c = 0; c < table.num_columns(); ++c) {
    const auto& col = table.column(c);
    if (dropped.contains(col.name)) continue;
    ctx.compressed_schema.push_back(col);
    sources.push_back({c, 0, false});
    if (auto it = chain_of_base.find(col.name); it != chain_of_base.end()) {
      const auto& layout = ctx.temporal_layouts[it->second];
      for (std::size_t k = 0; k < layout.diffs.size(); ++k) {
        ColumnSchema dcol;
        dcol.name = layout.diffs[k].column;
        dcol.description = fmt::format("seconds from {} to {}", layout.columns[k], layout.columns[k + 1]);
        dcol.kind = ColumnKind::kNumeric;
        dcol.decimal_places = 0;
        ctx.compressed_schema.push_back(std::move(dcol));
        sources.push_back({it->second, k, true});
      }
    }
  }

  TableBuilder builder(ctx.compressed_schema);
  builder.reserve(table.num_rows());
  std::vector<Value> row(sources.size());
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const Source& s = sources[j];
      row[j] = s.is_diff ? Value(static_cast<double>(chain_diffs[s.column][s.diff][r]))
                         : table.value(r, s.column);
    }
    builder.add_row(row);
  }
  return {std::move(builder).build(), std::move(ctx)};
}

namespace {

std::int64_t snap(double value, std::int64_t quantum) {
  return static_cast<std::int64_t>(std::llround(value / static_cast<double>(quantum))) * quantum;
}

}  // namespace

Table decompress(const Table& compressed, const DecompressionContext& ctx, DecompressStats* stats) {
  const auto& cs = ctx.compressed_schema;
  if (compressed.num_columns() != cs.size()) {
    throw DataError(fmt::format("compressed table has {} columns, context expects {}",
                                compressed.num_columns(), cs.size()));
  }
  for (std::size_t c = 0; c < cs.size(); ++c) {
    if (compressed.column(c).name != cs[c].name || compressed.column(c).kind != cs[c].kind) {
      throw DataError(fmt::format("compressed column {} is '{}' ({}), context expects '{}' ({})", c,
                                  compressed.column(c).name, to_string(compressed.column(c).kind),
                                  cs[c].name, to_string(cs[c].kind)));
    }
  }
  if (compressed.has_missing()) throw DataError("compressed table contains missing cells");

  const auto& os = ctx.original_schema;
  std::unordered_map<std::string, std::size_t> out_index;
  for (std::size_t c = 0; c < os.size(); ++c) out_index.emplace(os[c].name, c);

  // Direct copies: every compressed column that is not a diff.
  std::set<std::string> diff_names;
  for (const auto& t : ctx.temporal_layouts) {
    for (const auto& d : t.diffs) diff_names.insert(d.column);
  }
  std::vector<std::pair<std::size_t, std::size_t>> copies;  // (compressed, original)
  for (std::size_t c = 0; c < cs.size(); ++c) {
    if (diff_names.contains(cs[c].name)) continue;
    auto it = out_index.find(cs[c].name);
    if (it == out_index.end()) {
      throw DataError(fmt::format("compressed column '{}' not in the original schema", cs[c].name));
    }
    copies.emplace_back(c, it->second);
  }

  struct BoundHierarchy {
    const HierarchyMap* map;
    std::size_t granular;
    std::vector<std::size_t> ancestors;
  };
  std::vector<BoundHierarchy> hierarchies;
  for (const auto& m : ctx.hierarchy_maps) {
    BoundHierarchy b{&m, out_index.at(m.group.granular), {}};
    for (const auto& a : m.group.ancestors) b.ancestors.push_back(out_index.at(a));
    hierarchies.push_back(std::move(b));
  }

  struct BoundChain {
    const TemporalLayout* layout;
    std::vector<std::size_t> out_cols;
    std::vector<std::size_t> diff_cols;  // in the compressed table
  };
  std::vector<BoundChain> chains;
  for (const auto& t : ctx.temporal_layouts) {
    BoundChain b{&t, {}, {}};
    for (const auto& c : t.columns) b.out_cols.push_back(out_index.at(c));
    for (const auto& d : t.diffs) b.diff_cols.push_back(compressed.column_index(d.column));
    chains.push_back(std::move(b));
  }

  struct BoundDerived {
    const Expr* formula;
    std::size_t out_col;
    std::optional<int> places;
  };
  std::vector<BoundDerived> derived;
  for (const auto& m : ctx.math_groups) {
    for (const auto& d : m.derived) {
      const std::size_t c = out_index.at(d.column);
      derived.push_back({&d.formula, c, os[c].decimal_places});
    }
  }

  std::size_t clamped = 0;
  std::vector<std::size_t> unknown_rows;
  TableBuilder builder(os);
  builder.reserve(compressed.num_rows());
  std::vector<Value> row(os.size());

  for (std::size_t r = 0; r < compressed.num_rows(); ++r) {
    std::fill(row.begin(), row.end(), Value{});
    for (auto [from, to] : copies) {
      Value v = compressed.value(r, from);
      if (auto* d = std::get_if<double>(&v); d && os[to].decimal_places) {
        *d = round_to_places(*d, *os[to].decimal_places);
      }
      row[to] = std::move(v);
    }

    bool row_ok = true;
    for (const auto& h : hierarchies) {
      const auto& granular = std::get<std::string>(row[h.granular]);
      const HierarchyMap::Entry* e = h.map->find(granular);
      if (e == nullptr) {
        row_ok = false;
        break;
      }
      for (std::size_t j = 0; j < h.ancestors.size(); ++j) row[h.ancestors[j]] = e->ancestors[j];
    }
    if (!row_ok) {
      unknown_rows.push_back(r);
      continue;
    }

    for (const auto& ch : chains) {
      const auto& layout = *ch.layout;
      std::int64_t t = snap(static_cast<double>(std::get<Timestamp>(row[ch.out_cols[0]]).seconds),
                            layout.base_quantum);
      row[ch.out_cols[0]] = Timestamp{t};
      for (std::size_t j = 0; j < layout.diffs.size(); ++j) {
        std::int64_t gap = snap(compressed.number(r, ch.diff_cols[j]), layout.diffs[j].quantum);
        const std::int64_t floor = layout.clamp_floor(j);
        if (gap < floor) {
          gap = floor;
          ++clamped;
        }
        t += gap;
        row[ch.out_cols[j + 1]] = Timestamp{t};
      }
      for (std::size_t c : ch.out_cols) {
        if (std::get<Timestamp>(row[c]).seconds < 0) {
          throw DataError(fmt::format("row {}: reconstructed timestamp for '{}' is negative", r,
                                      os[c].name));
        }
      }
    }

    for (const auto& d : derived) {
      double v = eval_formula(*d.formula, [&](std::string_view name) -> std::optional<double> {
        const Value& cell = row[out_index.at(std::string(name))];
        if (const auto* x = std::get_if<double>(&cell)) return *x;
        return std::nullopt;
      });
      if (d.places) v = round_to_places(v, *d.places);
      row[d.out_col] = v;
    }
    builder.add_row(row);
  }

  if (!unknown_rows.empty()) {
    std::vector<std::size_t> head(unknown_rows.begin(),
                                  unknown_rows.begin() + std::min<std::ptrdiff_t>(10, static_cast<std::ptrdiff_t>(unknown_rows.size())));
    throw DataError(fmt::format("{} rows carry granular values absent from the hierarchy map (rows {}{})",
                                unknown_rows.size(), fmt::join(head, ", "),
                                unknown_rows.size() > head.size() ? ", ..." : ""));
  }
  if (clamped > 0) spdlog::info("decompress: clamped {} temporal gaps", clamped);
  if (stats != nullptr) stats->clamped_diffs = clamped;
  return std::move(builder).build();
}

}  // namespace tabflow
