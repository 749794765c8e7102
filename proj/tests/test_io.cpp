// Copyright 2026 The hyfermi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hyfermi/io.hpp"

using namespace hyfermi;
using io::Json;

namespace {

std::vector<std::string> keys(const Json& j) {
  std::vector<std::string> k;
  for (const auto& [key, v] : j.items()) k.push_back(key);
  return k;
}

std::vector<io::ConfigEntry> parse(const std::string& s) {
  std::istringstream in(s);
  return io::parse_config_text(in);
}

}  // namespace

TEST(Artifact, ProvenanceKeysInOrder) {
  const auto j = io::artifact("lattice magic", {{"max_n", 40}}, io::magic_json(magic_numbers(40)));
  EXPECT_EQ(keys(j), (std::vector<std::string>{"schema", "tool", "version", "command", "config", "result"}));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["tool"], "hyfermi");
  EXPECT_EQ(j["result"]["rows"].size(), 5u);
  EXPECT_EQ(j["result"]["rows"][4]["N"], 33);
  EXPECT_EQ(j["result"]["rows"][4]["kinetic_integer_sum"], 78);
}

TEST(Artifact, NumbersRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567}) EXPECT_EQ(std::stod(io::num(x)), x);
  EXPECT_EQ(io::num(i64(-7)), "-7");
}

TEST(Artifact, EnergyRecordShape) {
  EnergyBreakdown e;
  e.second = 0.5;
  const auto j = io::energy_json(e);
  EXPECT_EQ(keys(j), (std::vector<std::string>{"kinetic", "first_simple", "first_full", "second", "frak_e", "surface",
                                               "diagnostics"}));
  EXPECT_TRUE(j["first_full"].is_null());
  EXPECT_TRUE(j["diagnostics"]["probe_ratios"].is_null());
  e.first_full = 2.0;
  e.diagnostics.probe_ratios = ProbeRatios{};
  const auto k = io::energy_json(e);
  EXPECT_EQ(k["first_full"], 2.0);
  EXPECT_EQ(keys(k["diagnostics"]["probe_ratios"]),
            (std::vector<std::string>{"L1_W", "L1_eta", "xi_l2", "C_eta", "C_W", "C_v"}));
}

TEST(Artifact, ContinuumRecord) {
  ContinuumResult r{.value = 1.5, .error = 0.1, .method = ContinuumMethod::monte_carlo, .samples = 10, .seed = 3};
  const auto j = io::continuum_json(continuum_params(1, 1), r);
  EXPECT_EQ(j["method"], "mc");
  EXPECT_EQ(j["seed"], 3);
  r.method = ContinuumMethod::adaptive;
  const auto k = io::continuum_json(continuum_params(1, 1), r);
  EXPECT_EQ(k["method"], "adaptive");
  EXPECT_FALSE(k.contains("seed"));
}

TEST(Csv, HeaderAndRows) {
  io::CsvWriter w("thermo study", {{"alpha", 0.01}, {"n_list", {1, 7}}, {"potential", "well:height=2,radius=1"}},
                  {"x", "y"});
  w.row({"1", "2"});
  EXPECT_THROW(w.row({"1"}), ConfigError);
  const std::string want =
      "# schema=1\n# tool=hyfermi\n# version=" HYFERMI_VERSION
      "\n# command=thermo study\n# alpha=0.01\n# n_list=1,7\n# potential=well:height=2,radius=1\nx,y\n1,2\n";
  EXPECT_EQ(w.str(), want);
}

TEST(Csv, StudyCells) {
  StudyRow r{.N_sigma = 7, .N_total = 14, .E2_lattice = 0.25, .E2_continuum_prediction = 0.5, .ratio = 0.5};
  EXPECT_EQ(io::study_cells(r), (std::vector<std::string>{"7", "14", "0.25", "0.5", "0.5", "0"}));
  EXPECT_EQ(io::study_header().size(), io::study_cells(r).size());
}

TEST(Config, KeyValueLines) {
  const auto e = parse("# schema=1\n# command=energy\n--alpha = 0.02\n\nn=7,7\nnot a pair\npotential=well:height=2,radius=1\n");
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].key, "alpha");
  EXPECT_EQ(e[0].values, std::vector<std::string>{"0.02"});
  EXPECT_EQ(e[1].key, "n");
  EXPECT_EQ(e[1].values, std::vector<std::string>{"7,7"});
  EXPECT_EQ(e[2].values, std::vector<std::string>{"well:height=2,radius=1"});
}

TEST(Config, JsonArtifact) {
  const auto j = io::artifact("energy", {{"n", {7, 7}}, {"alpha", 0.02}, {"potential", "well:height=2,radius=1"}},
                              Json::object());
  const auto e = parse(j.dump(2));
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].values, (std::vector<std::string>{"7", "7"}));
  EXPECT_EQ(e[1].values, std::vector<std::string>{"0.02"});
  EXPECT_EQ(e[2].values, std::vector<std::string>{"well:height=2,radius=1"});
}

TEST(Config, BadJson) {
  EXPECT_THROW(parse("{ not json"), ConfigError);
  EXPECT_THROW(parse(R"({"config": 3})"), ConfigError);
}
