// Copyright 2026 The flexnr Authors
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

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "flexnr/json_io.hpp"

using namespace flexnr;
namespace fs = std::filesystem;

namespace {

const std::string kCli = FLEXNR_CLI_PATH;
const fs::path kTmp = FLEXNR_TEST_TMP;

int run(const std::string& args) {
  fs::create_directories(kTmp);
  const std::string cmd = kCli + " " + args + " >" + (kTmp / "stdout.txt").string() + " 2>" +
                          (kTmp / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string captured_stdout() { return read_text_file((kTmp / "stdout.txt").string()); }
std::string captured_stderr() { return read_text_file((kTmp / "stderr.txt").string()); }

std::string path(const std::string& name) { return (kTmp / name).string(); }

}  // namespace

TEST_CASE("generate is byte-deterministic and prints the instance summary") {
  REQUIRE(run("generate --seed 7 --out " + path("a.json")) == 0);
  CHECK(captured_stdout().find("|B|=549 |I|=176 |K_l|=5 |K_c|=5") != std::string::npos);
  REQUIRE(run("generate --seed 7 --out " + path("b.json")) == 0);
  CHECK(read_text_file(path("a.json")) == read_text_file(path("b.json")));
  REQUIRE(run("generate --seed 8 --out " + path("c.json")) == 0);
  CHECK(read_text_file(path("a.json")) != read_text_file(path("c.json")));
}

TEST_CASE("generate warns when every latency rate is masked") {
  const Json cfg{{"shapes", {"shape1"}}, {"tau_ms", 0.25}};
  write_text_file(path("cfg_masked.json"), cfg.dump());
  REQUIRE(run("generate --config " + path("cfg_masked.json") + " --seed 1 --out " +
              path("masked.json")) == 0);
  CHECK(captured_stderr().find("all rates masked") != std::string::npos);
}

TEST_CASE("malformed config exits with an error") {
  write_text_file(path("broken.json"), "{ not json");
  CHECK(run("generate --config " + path("broken.json") + " --seed 1 --out " +
            path("x.json")) == 1);
}

TEST_CASE("solve, result files and validation") {
  // Small instance so the whole pipeline stays fast.
  const Json cfg{{"total_time_ms", 1.0}, {"total_bw_khz", 1080.0},
                 {"n_latency", 2},       {"n_capacity", 2},
                 {"demand_kbps", 64.0},  {"tau_ms", 0.5}};
  write_text_file(path("cfg_small.json"), cfg.dump());
  REQUIRE(run("generate --config " + path("cfg_small.json") + " --seed 3 --out " +
              path("small.json")) == 0);

  SUBCASE("lp+ld solves, validates, and is deterministic") {
    REQUIRE(run("solve --instance " + path("small.json") + " --mode lp+ld --out " +
                path("r1.json")) == 0);
    REQUIRE(run("solve --instance " + path("small.json") + " --mode lp+ld --out " +
                path("r2.json")) == 0);
    CHECK(read_text_file(path("r1.json")) == read_text_file(path("r2.json")));
    CHECK(run("validate --instance " + path("small.json") + " --result " + path("r1.json")) == 0);
  }
  SUBCASE("every mode emits a result that validates") {
    for (const std::string mode : {"rate", "lp", "ld", "exact", "fixed:shape3"}) {
      const int code = run("solve --instance " + path("small.json") + " --mode " + mode +
                           " --out " + path("r_" + mode + ".json"));
      CHECK((code == 0 || code == 2));
      const int vcode =
          run("validate --instance " + path("small.json") + " --result " +
              path("r_" + mode + ".json"));
      CHECK((vcode == 0 || vcode == 2));
    }
  }
  SUBCASE("unknown mode errors out") {
    CHECK(run("solve --instance " + path("small.json") + " --mode bogus") == 1);
  }
  SUBCASE("subgradient trace and MPS dump are written") {
    REQUIRE(run("solve --instance " + path("small.json") + " --mode ld --trace " +
                path("trace.csv") + " --mps " + path("lp.mps")) <= 2);
    CHECK(read_text_file(path("trace.csv")).find("h,g,s_inf,assigned") == 0);
    CHECK(read_text_file(path("lp.mps")).find("ENDATA") != std::string::npos);
  }
}

TEST_CASE("fixed 0.5ms-15kHz reports demand-unmet under a 0.25 ms deadline") {
  const Json cfg{{"tau_ms", 0.25}, {"demand_kbps", 128.0}};
  write_text_file(path("cfg_tight.json"), cfg.dump());
  REQUIRE(run("generate --config " + path("cfg_tight.json") + " --seed 5 --out " +
              path("tight.json")) == 0);
  CHECK(run("solve --instance " + path("tight.json") + " --mode fixed:0.5ms-15kHz --out " +
            path("rfixed.json")) == 2);
}

TEST_CASE("exact on a partition instance without an equal split is demand-limited") {
  save_instance(partition_instance({2, 4, 10}), path("part.json"));
  // Feasible ({10} covers the demand) but the objective stays below 8; the
  // run itself succeeds.
  CHECK(run("solve --instance " + path("part.json") + " --mode exact --out " +
            path("rpart.json")) == 0);
  const ResultDoc doc = load_result(path("rpart.json"));
  CHECK(doc.assignment.objective < 8.0 - 1e-9);
}

TEST_CASE("print-defaults emits parseable JSON") {
  REQUIRE(run("print-defaults") == 0);
  const Json j = Json::parse(captured_stdout());
  CHECK(j.at("demand_kbps") == 128.0);
  CHECK(j.at("unit_bw_khz") == 180.0);
}

TEST_CASE("export-rates writes one row per block") {
  const Json cfg{{"total_time_ms", 0.5}, {"total_bw_khz", 720.0}};
  write_text_file(path("cfg_rates.json"), cfg.dump());
  REQUIRE(run("generate --config " + path("cfg_rates.json") + " --seed 2 --out " +
              path("tinyinst.json")) == 0);
  REQUIRE(run("export-rates --instance " + path("tinyinst.json") + " --out " +
              path("rates.csv")) == 0);
  const std::string csv = read_text_file(path("rates.csv"));
  CHECK(csv.find("block_id,shape,t0,f0,end_time_ms") == 0);
}

TEST_CASE("experiment CSV: schema, determinism, exit-code behavior") {
  const Json cfg{{"total_time_ms", 1.0}, {"total_bw_khz", 720.0}, {"n_latency", 1},
                 {"n_capacity", 2},      {"demand_kbps", 32.0}};
  write_text_file(path("cfg_exp.json"), cfg.dump());
  const std::string args = "experiment --config " + path("cfg_exp.json") +
                           " --sweep demand --values 16,32 --seeds 2 --modes rate,lp+ld,exact "
                           "--threads 2 --out ";
  REQUIRE(run(args + path("e1.csv")) == 0);
  REQUIRE(run(args + path("e2.csv")) == 0);
  const std::string csv = read_text_file(path("e1.csv"));
  CHECK(csv == read_text_file(path("e2.csv")));
  CHECK(csv.find("sweep,value,seed,mode,status,objective_bits,rate_kbps,gap,proven,nodes,note") ==
        0);
  CHECK(csv.find("demand,16,1,rate,") != std::string::npos);
  CHECK(csv.find(",mean,") != std::string::npos);  // aggregation rows present
}
