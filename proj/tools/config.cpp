#include "config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "dmlspss/error.hpp"

namespace dmlspss::cli {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key + ": not a number: " + v);
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key + ": not an integer: " + v);
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key + ": not a seed: " + v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string l = lower(v);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  bad(key + ": not a boolean: " + v);
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<int>(to_int(key, item)));
  return out;
}

// Learner sections accept these keys, optionally prefixed by a candidate
// kind (e.g. "mlp.hidden") to configure super learner candidates.
const std::set<std::string> kLearnerKeys{
    "kind",    "lambda",    "max_iter", "tol",      "bandwidth", "loss",  "epsilon",
    "c",       "hidden",    "activation", "step_size", "epochs",  "batch", "seed",
    "l2",      "standardize", "candidates", "v_blocks", "mode",   "blocks", "value"};

const std::set<std::string> kKinds{"ridge", "lasso", "kernel", "mlp", "super_learner", "constant",
                                   "oracle"};

std::optional<std::string> get(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) return std::nullopt;
  return it->second;
}

LearnerSpec base_learner(const std::string& kind, const KeyValues& kv, const std::string& prefix) {
  auto opt = [&](const std::string& k) { return get(kv, prefix + k); };
  auto key = [&](const std::string& k) { return prefix + k; };
  if (kind == "ridge") {
    RidgeSpec s;
    if (auto v = opt("lambda")) s.lambda = to_double(key("lambda"), *v);
    return {s};
  }
  if (kind == "lasso") {
    LassoSpec s;
    if (auto v = opt("lambda")) s.lambda = to_double(key("lambda"), *v);
    if (auto v = opt("max_iter")) s.max_iter = static_cast<int>(to_int(key("max_iter"), *v));
    if (auto v = opt("tol")) s.tol = to_double(key("tol"), *v);
    return {s};
  }
  if (kind == "kernel") {
    KernelMachineSpec s;
    if (auto v = opt("bandwidth")) s.bandwidth = to_double(key("bandwidth"), *v);
    if (auto v = opt("lambda")) s.lambda = to_double(key("lambda"), *v);
    if (auto v = opt("loss")) {
      const std::string l = lower(*v);
      if (l == "squared") s.loss = KernelLoss::Squared;
      else if (l == "epsilon_insensitive") s.loss = KernelLoss::EpsilonInsensitive;
      else bad(key("loss") + ": expected squared or epsilon_insensitive");
    }
    if (auto v = opt("epsilon")) s.epsilon = to_double(key("epsilon"), *v);
    if (auto v = opt("c")) s.c = to_double(key("c"), *v);
    if (auto v = opt("max_iter")) s.max_iter = static_cast<int>(to_int(key("max_iter"), *v));
    return {s};
  }
  if (kind == "mlp") {
    MlpSpec s;
    if (auto v = opt("hidden")) s.hidden = to_int_list(key("hidden"), *v);
    if (auto v = opt("activation")) {
      const std::string a = lower(*v);
      if (a == "relu") s.activation = Activation::ReLU;
      else if (a == "tanh") s.activation = Activation::Tanh;
      else bad(key("activation") + ": expected relu or tanh");
    }
    if (auto v = opt("step_size")) s.step_size = to_double(key("step_size"), *v);
    if (auto v = opt("epochs")) s.epochs = static_cast<int>(to_int(key("epochs"), *v));
    if (auto v = opt("batch")) s.batch = static_cast<int>(to_int(key("batch"), *v));
    if (auto v = opt("seed")) s.seed = to_u64(key("seed"), *v);
    if (auto v = opt("l2")) s.l2 = to_double(key("l2"), *v);
    if (auto v = opt("standardize")) s.standardize = to_bool(key("standardize"), *v);
    return {s};
  }
  if (kind == "constant") {
    ConstantSpec s;
    if (auto v = opt("value")) s.value = to_double(key("value"), *v);
    return {s};
  }
  bad("unknown learner kind \"" + kind + "\"");
}

LearnerSetting parse_learner(const KeyValues& kv, const std::string& section) {
  const std::string prefix = section + ".";
  for (const auto& [k, v] : kv) {
    if (k.rfind(prefix, 0) != 0) continue;
    const std::string rest = k.substr(prefix.size());
    const auto dot = rest.find('.');
    const std::string head = dot == std::string::npos ? rest : rest.substr(0, dot);
    const std::string tail = dot == std::string::npos ? "" : rest.substr(dot + 1);
    const bool ok = dot == std::string::npos ? kLearnerKeys.count(rest) > 0
                                             : kKinds.count(head) > 0 && kLearnerKeys.count(tail) > 0;
    if (!ok) bad("unknown key \"" + k + "\"");
  }

  LearnerSetting out;
  const std::string kind = lower(get(kv, prefix + "kind").value_or("ridge"));
  if (!kKinds.count(kind)) bad(prefix + "kind: unknown learner kind \"" + kind + "\"");
  if (kind == "oracle") {
    out.oracle = true;
    return out;
  }
  if (kind != "super_learner") {
    out.spec = base_learner(kind, kv, prefix);
    validate_spec(out.spec);
    return out;
  }
  SuperLearnerSpec sl;
  const auto cands = split_list(get(kv, prefix + "candidates").value_or("ridge,lasso,mlp"));
  for (const auto& c : cands) {
    const std::string ck = lower(c);
    if (ck == "super_learner" || ck == "oracle") bad(prefix + "candidates: \"" + c + "\" not allowed");
    sl.candidates.push_back(base_learner(ck, kv, prefix + ck + "."));
  }
  if (auto v = get(kv, prefix + "v_blocks")) sl.v_blocks = static_cast<int>(to_int(prefix + "v_blocks", *v));
  if (auto v = get(kv, prefix + "seed")) sl.seed = to_u64(prefix + "seed", *v);
  if (auto v = get(kv, prefix + "mode")) {
    const std::string m = lower(*v);
    if (m == "selector") sl.mode = EnsembleMode::Selector;
    else if (m == "convex_weights") sl.mode = EnsembleMode::ConvexWeights;
    else bad(prefix + "mode: expected selector or convex_weights");
  }
  if (auto v = get(kv, prefix + "blocks")) {
    const std::string b = lower(*v);
    if (b == "random") sl.blocks = BlockScheme::Random;
    else if (b == "support_points") sl.blocks = BlockScheme::SupportPoints;
    else bad(prefix + "blocks: expected random or support_points");
  }
  out.spec = LearnerSpec{std::move(sl)};
  validate_spec(out.spec);
  return out;
}

const std::set<std::string> kPlainKeys{
    "data.path",          "data.outcome",    "data.treatment",   "data.covariates",
    "split.method",       "split.test_fraction", "split.k",      "split.seed",
    "split.sp.max_iter",  "split.sp.tol",    "split.sp.jitter",  "split.include_outcome",
    "dml.algorithm",      "dml.score",       "dml.alpha",
    "simulate.scenario",  "simulate.p_list", "simulate.n_list",  "simulate.reps",
    "simulate.master_seed", "simulate.splitters", "runtime.threads"};

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::string section;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) bad("line " + std::to_string(line_no) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (kv.count(full)) bad("line " + std::to_string(line_no) + ": duplicate key " + full);
    kv[full] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

RunConfig parse_run_config(const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    if (k.rfind("learner_m.", 0) == 0 || k.rfind("learner_ell.", 0) == 0) continue;
    if (!kPlainKeys.count(k)) bad("unknown key \"" + k + "\"");
  }
  RunConfig cfg;
  if (auto v = get(kv, "data.path")) cfg.data_path = *v;
  cfg.schema.outcome = get(kv, "data.outcome").value_or("y");
  cfg.schema.treatment = get(kv, "data.treatment").value_or("t");
  if (auto v = get(kv, "data.covariates")) cfg.schema.covariates = split_list(*v);

  auto& sp = cfg.split;
  if (auto v = get(kv, "split.method")) {
    sp.method = lower(*v);
    if (sp.method != "spss" && sp.method != "random") bad("split.method: expected spss or random");
  }
  if (auto v = get(kv, "split.test_fraction")) sp.test_fraction = to_double("split.test_fraction", *v);
  if (auto v = get(kv, "split.k")) sp.k = static_cast<int>(to_int("split.k", *v));
  if (auto v = get(kv, "split.seed")) sp.seed = to_u64("split.seed", *v);
  if (auto v = get(kv, "split.sp.max_iter")) sp.sp_max_iter = static_cast<int>(to_int("split.sp.max_iter", *v));
  if (auto v = get(kv, "split.sp.tol")) sp.sp_tol = to_double("split.sp.tol", *v);
  if (auto v = get(kv, "split.sp.jitter")) sp.sp_jitter = to_double("split.sp.jitter", *v);
  if (auto v = get(kv, "split.include_outcome")) sp.include_outcome = to_bool("split.include_outcome", *v);
  if (sp.k < 2) bad("split.k must be >= 2");
  if (sp.sp_max_iter < 1) bad("split.sp.max_iter must be >= 1");
  if (!(sp.sp_tol > 0.0)) bad("split.sp.tol must be > 0");
  if (!(sp.sp_jitter >= 0.0)) bad("split.sp.jitter must be >= 0");

  cfg.learner_m = parse_learner(kv, "learner_m");
  cfg.learner_ell = parse_learner(kv, "learner_ell");

  if (auto v = get(kv, "dml.algorithm")) {
    const std::string a = lower(*v);
    if (a == "dml1") cfg.dml.algorithm = DmlAlgorithm::DML1;
    else if (a == "dml2") cfg.dml.algorithm = DmlAlgorithm::DML2;
    else bad("dml.algorithm: expected dml1 or dml2");
  }
  if (auto v = get(kv, "dml.score")) {
    const std::string s = lower(*v);
    if (s == "partialling_out") cfg.dml.score = ScoreKind::PartiallingOut;
    else if (s == "iv_type") cfg.dml.score = ScoreKind::IvType;
    else bad("dml.score: expected partialling_out or iv_type");
  }
  if (auto v = get(kv, "dml.alpha")) cfg.dml.alpha = to_double("dml.alpha", *v);
  if (!(cfg.dml.alpha > 0.0 && cfg.dml.alpha < 1.0)) bad("dml.alpha must lie in (0, 1)");

  auto& sim = cfg.simulate;
  if (auto v = get(kv, "simulate.scenario")) {
    sim.scenarios.clear();
    for (const auto& s : split_list(*v)) {
      const std::string u = lower(s);
      if (u == "s1" || u == "1") sim.scenarios.push_back(Scenario::S1);
      else if (u == "s2" || u == "2") sim.scenarios.push_back(Scenario::S2);
      else bad("simulate.scenario: unknown scenario \"" + s + "\"");
    }
  }
  if (auto v = get(kv, "simulate.p_list")) sim.p_list = to_int_list("simulate.p_list", *v);
  if (auto v = get(kv, "simulate.n_list")) sim.n_list = to_int_list("simulate.n_list", *v);
  if (auto v = get(kv, "simulate.splitters")) {
    sim.splitters.clear();
    for (const auto& s : split_list(*v)) {
      const std::string u = lower(s);
      if (u == "spss") sim.splitters.push_back(Splitter::Spss);
      else if (u == "random") sim.splitters.push_back(Splitter::RandomKFold);
      else bad("simulate.splitters: unknown splitter \"" + s + "\"");
    }
  }
  if (auto v = get(kv, "simulate.reps")) sim.reps = static_cast<int>(to_int("simulate.reps", *v));
  if (auto v = get(kv, "simulate.master_seed")) sim.master_seed = to_u64("simulate.master_seed", *v);
  if (sim.scenarios.empty() || sim.p_list.empty() || sim.n_list.empty() || sim.splitters.empty()) {
    bad("simulate grid lists must be non-empty");
  }
  if (sim.reps < 2) bad("simulate.reps must be >= 2");

  if (auto v = get(kv, "runtime.threads")) cfg.threads = static_cast<int>(to_int("runtime.threads", *v));
  if (cfg.threads < 1) bad("runtime.threads must be >= 1");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_key_values(path));
}

SpConfig sp_config(const SplitSettings& split, std::uint64_t seed) {
  SpConfig sp;
  sp.max_iter = split.sp_max_iter;
  sp.tol = split.sp_tol;
  sp.seed = seed;
  sp.init_jitter = split.sp_jitter;
  sp.include_outcome = split.include_outcome;
  return sp;
}

}  // namespace dmlspss::cli
