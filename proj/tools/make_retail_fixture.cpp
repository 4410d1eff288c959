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

// Writes the retail fixture (data, schema, rule file, config) to a directory.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "retail_fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the retail fixture"};
  std::string dir = "data/retail_fixture";
  std::size_t rows = 1000;
  std::uint64_t seed = 7;
  int vae_epochs = 300;
  int diffusion_epochs = 600;
  app.add_option("-o,--output-dir", dir, "Destination directory");
  app.add_option("-n,--rows", rows, "Row count")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--vae-epochs", vae_epochs, "VAE epochs written to config.json");
  app.add_option("--diffusion-epochs", diffusion_epochs, "Diffusion epochs written to config.json");
  CLI11_PARSE(app, argc, argv);
  tabflow::testing::write_retail_fixture(dir, rows, seed, vae_epochs, diffusion_epochs);
  std::cout << dir << "\n";
  return 0;
}
