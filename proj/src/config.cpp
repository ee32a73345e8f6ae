#include "smiso/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace smiso {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
  return out;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t pos;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + v);
  }
}

long to_long(const std::string& v, const std::string& key) {
  try {
    size_t pos;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': " + v);
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean value for '" + key + "': " + v);
}

DataSource parse_data_source(const std::string& v) {
  DataSource ds;
  auto colon = v.find(':');
  std::string kind = colon == std::string::npos ? v : v.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : v.substr(colon + 1);
  if (kind == "libsvm") {
    ds.kind = DataSourceKind::Libsvm;
    ds.path = rest;
    if (ds.path.empty()) throw ConfigError("data = libsvm:<path> needs a path");
  } else if (kind == "csv") {
    ds.kind = DataSourceKind::DenseCsv;
    ds.path = rest;
    if (ds.path.empty()) throw ConfigError("data = csv:<path> needs a path");
  } else if (kind == "synth_gaussian" || kind == "synth_heterogeneous") {
    auto parts = split(rest, ',');
    bool het = kind == "synth_heterogeneous";
    ds.kind = het ? DataSourceKind::SynthHeterogeneous : DataSourceKind::SynthGaussian;
    if (parts.size() != (het ? 4u : 3u))
      throw ConfigError("data = " + kind + ":<n>,<d>,<seed>" + (het ? ",<spread>" : ""));
    ds.n = static_cast<int>(to_long(parts[0], "data.n"));
    ds.dim = static_cast<int>(to_long(parts[1], "data.d"));
    ds.seed = static_cast<uint64_t>(to_long(parts[2], "data.seed"));
    if (het) ds.spread = to_double(parts[3], "data.spread");
  } else {
    throw ConfigError("unknown data source kind '" + kind + "'");
  }
  return ds;
}

PerturbationSpec parse_perturb(const std::string& v) {
  PerturbationSpec p;
  auto colon = v.find(':');
  std::string kind = colon == std::string::npos ? v : v.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : v.substr(colon + 1);
  if (kind == "none") {
    p.kind = PerturbKind::None;
    return p;
  }
  if (rest.empty()) throw ConfigError("perturb = " + kind + ":<param> needs a parameter");
  double param = to_double(rest, "perturb");
  if (kind == "dropout")
    p.kind = PerturbKind::Dropout;
  else if (kind == "gaussian")
    p.kind = PerturbKind::GaussianAdditive;
  else if (kind == "rescale")
    p.kind = PerturbKind::UniformRescale;
  else
    throw ConfigError("unknown perturbation kind '" + kind + "'");
  p.param = param;
  p.validate();
  return p;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (mu <= 0) throw ConfigError("mu must be positive");
  if (l1_weight < 0) throw ConfigError("l1_weight must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (pool_size < 0) throw ConfigError("pool must be >= 0");
  if (estimate_k < 1) throw ConfigError("estimate_k must be >= 1");
  if (seeds.empty()) throw ConfigError("at least one seed required");
  if (methods.empty()) throw ConfigError("at least one [method] block required");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (lyapunov && pool_size == 0)
    throw ConfigError("lyapunov diagnostics require FinitePool mode (pool > 0)");
  for (const auto& m : methods) {
    if (m.eta <= 0) throw ConfigError("eta must be positive");
    if (m.warmup_epochs < 0) throw ConfigError("warmup_epochs must be >= 0");
    if (m.method == Method::Smiso && l1_weight > 0)
      throw ConfigError("composite objectives (l1_weight > 0) need smiso_nu, prox_sgd, or sgd");
  }
  perturb.validate();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.methods.clear();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  MethodEntry* cur = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[method]") {
      cfg.methods.emplace_back();
      cur = &cfg.methods.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (cur) {
      if (key == "name") {
        try {
          cur->method = method_from_name(val);
        } catch (const std::exception& e) {
          throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
      } else if (key == "eta")
        cur->eta = to_double(val, key);
      else if (key == "mode") {
        if (val == "theory")
          cur->mode = ScheduleMode::Theory;
        else if (val == "tuned")
          cur->mode = ScheduleMode::Tuned;
        else
          throw ConfigError("mode must be theory or tuned");
      } else if (key == "warmup_epochs")
        cur->warmup_epochs = static_cast<int>(to_long(val, key));
      else
        throw ConfigError("line " + std::to_string(line_no) + ": unknown [method] key '" + key + "'");
      continue;
    }
    if (key == "data")
      cfg.data = parse_data_source(val);
    else if (key == "normalize")
      cfg.normalize = to_bool(val, key);
    else if (key == "loss") {
      if (val == "logistic")
        cfg.loss = LossKind::Logistic;
      else if (val == "squared_hinge")
        cfg.loss = LossKind::SquaredHinge;
      else
        throw ConfigError("loss must be logistic or squared_hinge");
    } else if (key == "mu")
      cfg.mu = to_double(val, key);
    else if (key == "l1_weight")
      cfg.l1_weight = to_double(val, key);
    else if (key == "perturb")
      cfg.perturb = parse_perturb(val);
    else if (key == "perturb_seed")
      cfg.perturb.master_seed = static_cast<uint64_t>(to_long(val, key));
    else if (key == "pool")
      cfg.pool_size = static_cast<int>(to_long(val, key));
    else if (key == "epochs")
      cfg.epochs = static_cast<int>(to_long(val, key));
    else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : split(val, ','))
        cfg.seeds.push_back(static_cast<uint64_t>(to_long(s, key)));
    } else if (key == "averaging")
      cfg.averaging = to_bool(val, key);
    else if (key == "estimate_k")
      cfg.estimate_k = static_cast<int>(to_long(val, key));
    else if (key == "estimate_seed")
      cfg.estimate_seed = static_cast<uint64_t>(to_long(val, key));
    else if (key == "lyapunov")
      cfg.lyapunov = to_bool(val, key);
    else if (key == "output")
      cfg.output = val;
    else if (key == "workers")
      cfg.workers = static_cast<int>(to_long(val, key));
    else
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Dataset materialize_dataset(const ExperimentConfig& cfg) {
  Dataset d;
  switch (cfg.data.kind) {
    case DataSourceKind::Libsvm:
      d = load_dataset_file(cfg.data.path, false);
      break;
    case DataSourceKind::DenseCsv:
      d = load_dataset_file(cfg.data.path, true);
      break;
    case DataSourceKind::SynthGaussian:
      d = synth_gaussian(cfg.data.n, cfg.data.dim, cfg.data.seed);
      break;
    case DataSourceKind::SynthHeterogeneous:
      d = synth_heterogeneous(cfg.data.n, cfg.data.dim, cfg.data.seed, cfg.data.spread);
      break;
  }
  if (cfg.normalize) d = normalize_l2(d);
  return d;
}

}  // namespace smiso
