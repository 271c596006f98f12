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

#include "flexnr/json_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace flexnr {

namespace {

Json shape_to_json(const NumerologyShape& s) {
  return Json{{"id", s.id},           {"scs_khz", s.scs_khz},
              {"tti_ms", s.tti_ms},   {"symbol_us", s.symbol_us},
              {"cp_us", s.cp_us},     {"num_symbols", s.num_symbols}};
}

NumerologyShape shape_from_json(const Json& j) {
  if (j.is_string()) return catalog_shape(j.get<std::string>());
  NumerologyShape s;
  s.id = j.at("id").get<std::string>();
  s.scs_khz = j.at("scs_khz").get<double>();
  s.tti_ms = j.at("tti_ms").get<double>();
  s.symbol_us = j.at("symbol_us").get<double>();
  s.cp_us = j.at("cp_us").get<double>();
  s.num_symbols = j.at("num_symbols").get<int>();
  s.validate();
  return s;
}

Json profile_to_json(const MultipathProfile& p) {
  return Json{{"tap_delays_us", p.tap_delays_us}, {"tap_powers_db", p.tap_powers_db}};
}

MultipathProfile profile_from_json(const Json& j) {
  MultipathProfile p;
  p.tap_delays_us = j.at("tap_delays_us").get<std::vector<double>>();
  p.tap_powers_db = j.at("tap_powers_db").get<std::vector<double>>();
  p.validate();
  return p;
}

Json rate_config_to_json(const RateConfig& c) {
  return Json{{"overhead_symbols", c.overhead_symbols},
              {"guardband_fraction", c.guardband_fraction},
              {"ici_penalty", c.ici_penalty}};
}

RateConfig rate_config_from_json(const Json& j) {
  RateConfig c;
  c.overhead_symbols = j.value("overhead_symbols", c.overhead_symbols);
  c.guardband_fraction = j.value("guardband_fraction", c.guardband_fraction);
  c.ici_penalty = j.value("ici_penalty", c.ici_penalty);
  return c;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Json instance_to_json(const Instance& inst) {
  Json j;
  j["format"] = "flexnr-instance-v1";
  j["grid"] = Json{{"total_time_ms", inst.grid.total_time_ms},
                   {"total_bw_khz", inst.grid.total_bw_khz},
                   {"unit_time_ms", inst.grid.unit_time_ms},
                   {"unit_bw_khz", inst.grid.unit_bw_khz}};
  Json shapes = Json::array();
  for (const auto& s : inst.shapes) shapes.push_back(shape_to_json(s));
  j["shapes"] = shapes;
  j["subcarriers_per_block"] = inst.subcarriers_per_block;
  j["profile"] = profile_to_json(inst.profile);
  j["rate_config"] = rate_config_to_json(inst.rate_config);
  Json services = Json::array();
  for (const auto& s : inst.services) {
    Json js{{"id", s.id},
            {"class", s.cls == ServiceClass::LATENCY ? "latency" : "capacity"},
            {"snr_db", s.snr_db},
            {"channel_seed", s.channel.seed},
            {"freq_gains", s.channel.freq_gains}};
    if (s.cls == ServiceClass::LATENCY) {
      js["demand_bits"] = s.demand_bits;
      js["latency_ms"] = s.latency_ms;
    }
    services.push_back(std::move(js));
  }
  j["services"] = services;
  if (inst.has_rate_override) {
    j["rate_override"] = inst.rate_override;
  } else {
    j["rate_override"] = nullptr;
  }
  j["seed"] = inst.seed;
  j["meta"] = Json{{"demand_convention", "demand_bits = demand_kbps * horizon_ms"},
                   {"generator", "flexnr"}};
  return j;
}

Instance instance_from_json(const Json& j) {
  if (j.value("format", "") != "flexnr-instance-v1") {
    throw std::runtime_error("not a flexnr instance file");
  }
  const Json& jg = j.at("grid");
  const ResourceGrid grid =
      ResourceGrid::make(jg.at("total_time_ms").get<double>(), jg.at("total_bw_khz").get<double>(),
                         jg.at("unit_time_ms").get<double>(), jg.at("unit_bw_khz").get<double>());
  std::vector<NumerologyShape> shapes;
  for (const auto& js : j.at("shapes")) shapes.push_back(shape_from_json(js));
  const MultipathProfile profile = profile_from_json(j.at("profile"));
  const RateConfig cfg = rate_config_from_json(j.at("rate_config"));

  std::vector<Service> services;
  for (const auto& js : j.at("services")) {
    Service s;
    s.id = js.at("id").get<int>();
    const std::string cls = js.at("class").get<std::string>();
    if (cls == "latency") {
      s.cls = ServiceClass::LATENCY;
      s.demand_bits = js.at("demand_bits").get<double>();
      s.latency_ms = js.at("latency_ms").get<double>();
    } else if (cls == "capacity") {
      s.cls = ServiceClass::CAPACITY;
    } else {
      throw std::runtime_error("unknown service class '" + cls + "'");
    }
    s.snr_db = js.at("snr_db").get<double>();
    s.channel.seed = js.at("channel_seed").get<uint64_t>();
    s.channel.freq_gains = js.at("freq_gains").get<std::vector<double>>();
    s.channel.profile = profile;
    services.push_back(std::move(s));
  }

  const uint64_t seed = j.value("seed", uint64_t{0});
  if (!j.contains("rate_override") || j.at("rate_override").is_null()) {
    return build_instance(grid, shapes, j.at("subcarriers_per_block").get<int>(),
                          std::move(services), profile, cfg, seed);
  }
  // Overridden rates: assemble manually so the override survives round trips.
  Instance inst;
  inst.grid = grid;
  inst.shapes = shapes;
  inst.subcarriers_per_block = j.at("subcarriers_per_block").get<int>();
  inst.profile = profile;
  inst.rate_config = cfg;
  inst.seed = seed;
  inst.blocks = enumerate_blocks(grid, shapes, inst.subcarriers_per_block);
  inst.services = std::move(services);
  inst.has_rate_override = true;
  inst.rate_override = j.at("rate_override").get<std::vector<double>>();
  const size_t want = static_cast<size_t>(inst.num_blocks()) * inst.num_services();
  if (inst.rate_override.size() != want) {
    throw std::runtime_error("rate_override has wrong dimensions");
  }
  inst.rates = inst.rate_override;
  for (int k = 0; k < inst.num_services(); ++k) {
    if (inst.services[k].cls != ServiceClass::LATENCY) continue;
    for (int b = 0; b < inst.num_blocks(); ++b) {
      if (inst.blocks[b].end_time_ms > inst.services[k].latency_ms) {
        inst.rates[static_cast<size_t>(b) * inst.num_services() + k] = 0.0;
      }
    }
  }
  return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
  write_text_file(path, instance_to_json(inst).dump(2) + "\n");
}

Instance load_instance(const std::string& path) {
  return instance_from_json(Json::parse(read_text_file(path)));
}

Json result_to_json(const ResultDoc& doc) {
  Json j;
  j["format"] = "flexnr-result-v1";
  j["mode"] = doc.mode;
  Json pairs = Json::array();
  for (const auto& [b, k] : doc.assignment.pairs) pairs.push_back(Json::array({b, k}));
  j["assignment"] = Json{{"pairs", pairs},
                         {"objective_bits", doc.assignment.objective},
                         {"feasible", doc.assignment.feasible},
                         {"unmet", doc.assignment.unmet}};
  j["rate_kbps_per_user"] = doc.rate_kbps_per_user;
  Json diag;
  diag["rho_selected"] = doc.rho_selected;
  diag["subgradient_iterations"] = doc.subgradient_iterations;
  diag["lp_skipped"] = doc.lp_skipped;
  diag["winner"] = doc.winner;
  j["diagnostics"] = diag;
  if (doc.has_exact) {
    j["exact"] = Json{{"proven", doc.proven}, {"nodes", doc.nodes}, {"bound_gap", doc.bound_gap}};
  }
  return j;
}

ResultDoc result_from_json(const Json& j) {
  if (j.value("format", "") != "flexnr-result-v1") {
    throw std::runtime_error("not a flexnr result file");
  }
  ResultDoc doc;
  doc.mode = j.at("mode").get<std::string>();
  const Json& ja = j.at("assignment");
  for (const auto& p : ja.at("pairs")) {
    doc.assignment.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  }
  doc.assignment.objective = ja.at("objective_bits").get<double>();
  doc.assignment.feasible = ja.at("feasible").get<bool>();
  doc.assignment.unmet = ja.at("unmet").get<std::vector<int>>();
  doc.rate_kbps_per_user = j.value("rate_kbps_per_user", 0.0);
  const Json& jd = j.at("diagnostics");
  doc.rho_selected = jd.value("rho_selected", -1.0);
  doc.subgradient_iterations = jd.value("subgradient_iterations", 0);
  doc.lp_skipped = jd.value("lp_skipped", false);
  doc.winner = jd.value("winner", "");
  if (j.contains("exact")) {
    doc.has_exact = true;
    doc.proven = j.at("exact").value("proven", false);
    doc.nodes = j.at("exact").value("nodes", 0LL);
    doc.bound_gap = j.at("exact").value("bound_gap", 0.0);
  }
  return doc;
}

void save_result(const ResultDoc& doc, const std::string& path) {
  write_text_file(path, result_to_json(doc).dump(2) + "\n");
}

ResultDoc load_result(const std::string& path) {
  return result_from_json(Json::parse(read_text_file(path)));
}

SimParams sim_params_from_json(const Json& j) {
  SimParams p;
  p.total_time_ms = j.value("total_time_ms", p.total_time_ms);
  p.total_bw_khz = j.value("total_bw_khz", p.total_bw_khz);
  p.unit_time_ms = j.value("unit_time_ms", 0.0);
  p.unit_bw_khz = j.value("unit_bw_khz", 0.0);
  p.subcarriers_per_block = j.value("subcarriers_per_block", p.subcarriers_per_block);
  if (j.contains("shapes")) {
    p.shapes.clear();
    for (const auto& js : j.at("shapes")) p.shapes.push_back(shape_from_json(js));
  }
  if (j.contains("profile")) p.profile = profile_from_json(j.at("profile"));
  if (j.contains("rate_config")) p.rate_config = rate_config_from_json(j.at("rate_config"));
  p.n_latency = j.value("n_latency", p.n_latency);
  p.n_capacity = j.value("n_capacity", p.n_capacity);
  p.demand_kbps = j.value("demand_kbps", p.demand_kbps);
  p.tau_ms = j.value("tau_ms", p.tau_ms);
  p.snr_db_min = j.value("snr_db_min", p.snr_db_min);
  p.snr_db_max = j.value("snr_db_max", p.snr_db_max);
  p.derive_units();
  return p;
}

Json sim_params_to_json(const SimParams& params) {
  SimParams p = params;
  p.derive_units();
  Json j;
  j["total_time_ms"] = p.total_time_ms;
  j["total_bw_khz"] = p.total_bw_khz;
  j["unit_time_ms"] = p.unit_time_ms;
  j["unit_bw_khz"] = p.unit_bw_khz;
  j["subcarriers_per_block"] = p.subcarriers_per_block;
  Json shapes = Json::array();
  for (const auto& s : p.shapes) shapes.push_back(shape_to_json(s));
  j["shapes"] = shapes;
  j["profile"] = profile_to_json(p.profile);
  j["rate_config"] = rate_config_to_json(p.rate_config);
  j["n_latency"] = p.n_latency;
  j["n_capacity"] = p.n_capacity;
  j["demand_kbps"] = p.demand_kbps;
  j["tau_ms"] = p.tau_ms;
  j["snr_db_min"] = p.snr_db_min;
  j["snr_db_max"] = p.snr_db_max;
  return j;
}

SimParams load_sim_params(const std::string& path) {
  return sim_params_from_json(Json::parse(read_text_file(path)));
}

void write_rate_csv(const Instance& inst, std::ostream& os) {
  os << "block_id,shape,t0,f0,end_time_ms";
  for (const auto& s : inst.services) os << ",r_k" << s.id;
  os << "\n";
  for (int b = 0; b < inst.num_blocks(); ++b) {
    const Block& blk = inst.blocks[b];
    os << b << "," << blk.shape.id << "," << blk.t0 << "," << blk.f0 << "," << blk.end_time_ms;
    for (int k = 0; k < inst.num_services(); ++k) os << "," << inst.rate(b, k);
    os << "\n";
  }
}

}  // namespace flexnr
