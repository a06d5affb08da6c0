#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dmlspss/csv.hpp"
#include "dmlspss/dml.hpp"
#include "dmlspss/simulate.hpp"

namespace dmlspss::cli {

/// Flat view of a sectioned key=value file: "[split]\nk = 2" is stored as
/// "split.k". Keys outside any section keep their dotted name.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);

struct SplitSettings {
  std::string method = "spss";  // spss | random
  double test_fraction = 0.2;
  int k = 2;
  std::uint64_t seed = 0;
  int sp_max_iter = 200;
  double sp_tol = 1e-8;
  double sp_jitter = 1.0;
  bool include_outcome = true;
};

struct DmlSettings {
  DmlAlgorithm algorithm = DmlAlgorithm::DML2;
  ScoreKind score = ScoreKind::PartiallingOut;
  double alpha = 0.05;
};

struct SimulateSettings {
  std::vector<Scenario> scenarios{Scenario::S1};
  std::vector<int> p_list{20};
  std::vector<int> n_list{100};
  std::vector<Splitter> splitters{Splitter::Spss};
  int reps = 500;
  std::uint64_t master_seed = 0;
};

/// A learner section; `oracle` is only meaningful for simulate.
struct LearnerSetting {
  LearnerSpec spec{RidgeSpec{1.0}};
  bool oracle = false;
};

struct RunConfig {
  std::optional<std::filesystem::path> data_path;
  ColumnSchema schema;
  SplitSettings split;
  LearnerSetting learner_m;
  LearnerSetting learner_ell;
  DmlSettings dml;
  SimulateSettings simulate;
  int threads = 1;
};

/// Validates every key and enum; throws Error(InvalidConfig) on unknown keys
/// or bad values.
RunConfig parse_run_config(const KeyValues& kv);
RunConfig load_run_config(const std::filesystem::path& path);

SpConfig sp_config(const SplitSettings& split, std::uint64_t seed);

}  // namespace dmlspss::cli
