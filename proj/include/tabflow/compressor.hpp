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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabflow/relationship.hpp"
#include "tabflow/table.hpp"

namespace tabflow {

/// Granular value -> ancestor tuple, fixed by majority vote over training
/// rows (ties go to the lexicographically smallest tuple).
struct HierarchyMap {
  struct Entry {
    std::vector<std::string> ancestors;
    std::size_t count = 0;     // rows carrying this granular value
    std::size_t agreeing = 0;  // rows whose tuple equals `ancestors`
    bool operator==(const Entry&) const = default;
  };

  HierarchyGroup group;
  std::map<std::string, Entry, std::less<>> entries;

  const Entry* find(std::string_view granular) const;
  bool operator==(const HierarchyMap&) const = default;
};

/// Throws DataError on missing cells in the group's columns.
HierarchyMap build_hierarchy_map(const Table& table, const HierarchyGroup& group);

/// How one temporal chain is represented in the compressed table.
struct TemporalLayout {
  struct Diff {
    std::string column;  // "dt__<chain>__<k>"
    std::optional<std::int64_t> min_positive;
    bool all_positive = false;
    std::int64_t quantum = 1;  // every training diff is a multiple of this
    bool operator==(const Diff&) const = default;
  };

  std::vector<std::string> columns;  // columns[0] is kept as the base
  std::vector<Diff> diffs;           // diffs[k-1] = columns[k] - columns[k-1]
  std::int64_t base_quantum = 1;

  /// Smallest admissible generated gap for diff position j.
  std::int64_t clamp_floor(std::size_t j) const;
  bool operator==(const TemporalLayout&) const = default;
};

/// Everything needed to rebuild the original columns from a compressed table.
struct DecompressionContext {
  static constexpr std::string_view kFormat = "tabflow.decompression_context";
  static constexpr int kVersion = 1;

  std::vector<ColumnSchema> original_schema;
  std::vector<ColumnSchema> compressed_schema;
  std::vector<HierarchyMap> hierarchy_maps;
  std::vector<MathGroup> math_groups;
  std::vector<TemporalLayout> temporal_layouts;

  RelationshipSpec spec() const;

  nlohmann::json to_json() const;
  static DecompressionContext from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static DecompressionContext load(const std::filesystem::path& path);

  bool operator==(const DecompressionContext&) const = default;
};

struct CompressResult {
  Table compressed;
  DecompressionContext context;
};

std::string diff_column_name(std::size_t chain, std::size_t k);

/// Drops hierarchy ancestors and derived columns, and replaces each temporal
/// chain by its first column plus consecutive differences in seconds. Throws
/// DataError when a referenced column holds a missing cell.
CompressResult compress(const Table& table, const RelationshipSpec& spec);

struct DecompressStats {
  std::size_t clamped_diffs = 0;
};

/// Inverse of compress. Restores ancestors by lookup, recomputes derived
/// columns (rounded to their decimal places), and rebuilds chains as
/// base + cumulative clamped gaps. Output columns follow the original order.
Table decompress(const Table& compressed, const DecompressionContext& context,
                 DecompressStats* stats = nullptr);

/// Largest of {86400, 3600, 60, 1} seconds dividing every value.
std::int64_t time_quantum(const std::vector<std::int64_t>& values);

}  // namespace tabflow
