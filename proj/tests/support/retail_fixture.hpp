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

#include <cstdint>
#include <filesystem>

#include "tabflow/relationship.hpp"
#include "tabflow/table.hpp"

namespace tabflow::testing {

/// Order-level retail table with 41 columns: three categorical hierarchies
/// (order geography, customer geography, product catalogue), one math group
/// with two derived money columns, one order -> delivery date chain, and
/// eighteen other columns. "Late_delivery_risk" is the target.
Table make_retail_table(std::size_t rows, std::uint64_t seed);

/// The relationship spec the retail table satisfies by construction.
RelationshipSpec retail_spec();

/// Writes data.csv, schema.json, relationships.json and config.json into
/// `dir`. The config trains with the given epoch counts.
void write_retail_fixture(const std::filesystem::path& dir, std::size_t rows, std::uint64_t seed,
                          int vae_epochs = 300, int diffusion_epochs = 600);

}  // namespace tabflow::testing
