#include <cstdio>
#include <string>

#include <json.hpp>

#include "dmlspss/csv.hpp"
#include "dmlspss/simulate.hpp"

namespace dmlspss {
namespace {

const std::vector<std::string> kColumns{
    "scenario", "p",        "n",           "method", "splitter",      "bias",        "se",
    "se_adjusted", "mse",   "coverage",    "mean_model_se", "wall_time_s", "reps", "master_seed"};

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string emit_report(const std::vector<SimulationRow>& rows, ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["scenario"] = r.scenario;
      j["p"] = r.p;
      j["n"] = r.n;
      j["method"] = r.method;
      j["splitter"] = r.splitter;
      j["bias"] = r.bias;
      j["se"] = r.se;
      j["se_adjusted"] = r.se_adjusted;
      j["mse"] = r.mse;
      j["coverage"] = r.coverage;
      j["mean_model_se"] = r.mean_model_se;
      j["wall_time_s"] = r.wall_time_s;
      j["reps"] = r.reps;
      j["master_seed"] = r.master_seed;
      out.push_back(std::move(j));
    }
    return out.dump(2) + "\n";
  }
  CsvTable table;
  table.header = kColumns;
  for (const auto& r : rows) {
    table.rows.push_back({r.scenario, std::to_string(r.p), std::to_string(r.n), r.method,
                          r.splitter, fixed4(r.bias), fixed4(r.se), fixed4(r.se_adjusted),
                          fixed4(r.mse), fixed4(r.coverage), fixed4(r.mean_model_se),
                          fixed4(r.wall_time_s), std::to_string(r.reps),
                          std::to_string(r.master_seed)});
  }
  return format_csv(table);
}

std::vector<SimulationRow> parse_report_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  std::vector<SimulationRow> rows;
  for (const auto& j : doc) {
    SimulationRow r;
    r.scenario = j.at("scenario").get<std::string>();
    r.p = j.at("p").get<int>();
    r.n = j.at("n").get<int>();
    r.method = j.at("method").get<std::string>();
    r.splitter = j.at("splitter").get<std::string>();
    r.bias = j.at("bias").get<double>();
    r.se = j.at("se").get<double>();
    r.se_adjusted = j.at("se_adjusted").get<double>();
    r.mse = j.at("mse").get<double>();
    r.coverage = j.at("coverage").get<double>();
    r.mean_model_se = j.at("mean_model_se").get<double>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.reps = j.at("reps").get<int>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace dmlspss
