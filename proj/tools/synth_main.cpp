/*
 * Copyright 2026 The CID Authors.
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

// Writes a synthetic CSV with independent N(0, 1) features.
//
//   cid_synth --rows 500 --weights 4,0,0,0,0,0 --seed 1 > data.csv

#include <iostream>

#include "CLI11.hpp"

#include "cid/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic logistic data"};
  cid::SyntheticOptions o;
  app.add_option("--rows", o.rows, "Number of rows")->check(CLI::PositiveNumber);
  app.add_option("--weights", o.weights, "Comma-separated weights")->delimiter(',');
  app.add_option("--bias", o.bias, "Intercept");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_flag("--hard", o.hard_labels, "Label by sign(w . x + b) instead of sampling");
  CLI11_PARSE(app, argc, argv);
  try {
    cid::write_csv(cid::make_synthetic(o), std::cout, "label");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
