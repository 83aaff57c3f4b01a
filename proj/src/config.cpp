#include "fdie/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fdie/csvio.hpp"

namespace fdie {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<int> to_int_list(const std::vector<double>& v) {
  std::vector<int> out;
  for (double x : v) out.push_back(static_cast<int>(std::llround(x)));
  return out;
}

FilterKind parse_kind(const std::string& s) {
  if (s == "detection") return FilterKind::detection;
  if (s == "actuator_isolation") return FilterKind::actuator_isolation;
  if (s == "sensor_isolation") return FilterKind::sensor_isolation;
  if (s == "sensor_estimation") return FilterKind::sensor_estimation;
  if (s == "actuator_estimation") return FilterKind::actuator_estimation;
  throw std::invalid_argument("unknown filter kind '" + s + "'");
}

// "step ONSET SEVERITY" | "sine ONSET AMPLITUDE OMEGA" | "none"
FaultSignal parse_fault(const std::string& text) {
  std::stringstream ss(text);
  std::string shape;
  ss >> shape;
  if (shape == "none" || shape.empty()) return FaultSignal::none();
  if (shape == "step") {
    int onset;
    double sev;
    if (!(ss >> onset >> sev))
      throw std::invalid_argument("fault 'step' needs: step ONSET SEVERITY");
    return FaultSignal::step(onset, sev);
  }
  if (shape == "sine") {
    int onset;
    double amp, omega;
    if (!(ss >> onset >> amp >> omega))
      throw std::invalid_argument(
          "fault 'sine' needs: sine ONSET AMPLITUDE OMEGA");
    return FaultSignal::sine(onset, amp, omega);
  }
  throw std::invalid_argument("unknown fault shape '" + shape + "'");
}

}  // namespace

ConfigMap ConfigMap::parse_text(const std::string& text,
                                const std::string& origin) {
  ConfigMap map;
  map.text_ = text;
  map.origin_ = origin;
  std::stringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    if (val.empty())
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": empty value for " + key);
    ConfigValue parsed;
    if (val.front() == '"' && val.back() == '"' && val.size() >= 2) {
      parsed = val.substr(1, val.size() - 2);
    } else if (val == "true" || val == "false") {
      parsed = (val == "true");
    } else if (val.front() == '[' || val.front() == '{') {
      if (val.back() != (val.front() == '[' ? ']' : '}'))
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                    ": unterminated array for " + key);
      std::vector<double> arr;
      std::stringstream as(val.substr(1, val.size() - 2));
      std::string tok;
      while (std::getline(as, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) arr.push_back(std::stod(tok));
      }
      parsed = arr;
    } else {
      try {
        size_t used = 0;
        const double num = std::stod(val, &used);
        if (used != val.size()) throw std::invalid_argument("");
        parsed = num;
      } catch (...) {
        parsed = val;  // bare word, treated as a string
      }
    }
    map.values_[key] = parsed;
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path.string());
}

void ConfigMap::fail(const std::string& key, const std::string& why) const {
  throw std::invalid_argument(origin_ + ": key '" + key + "' " + why);
}

bool ConfigMap::has(const std::string& key) const { return values_.count(key); }

std::string ConfigMap::get_string(const std::string& key,
                                  std::optional<std::string> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    fail(key, "is required (string)");
  }
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  fail(key, "must be a string");
  return {};
}

double ConfigMap::get_number(const std::string& key,
                             std::optional<double> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    fail(key, "is required (number)");
  }
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  fail(key, "must be a number");
  return 0;
}

bool ConfigMap::get_bool(const std::string& key,
                         std::optional<bool> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    fail(key, "is required (bool)");
  }
  if (const auto* b = std::get_if<bool>(&it->second)) return *b;
  fail(key, "must be true or false");
  return false;
}

std::vector<double> ConfigMap::get_array(const std::string& key,
                                         std::vector<double> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* a = std::get_if<std::vector<double>>(&it->second)) return *a;
  if (const auto* d = std::get_if<double>(&it->second)) return {*d};
  fail(key, "must be an array of numbers");
  return {};
}

std::vector<std::string> ConfigMap::keys_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_map(ConfigMap::parse_file(path));
}

RunConfig RunConfig::from_map(const ConfigMap& map) {
  RunConfig cfg;
  cfg.raw_text = map.text();

  cfg.model_name = map.get_string("model.name", std::string("min_phase"));
  cfg.noise_var = map.get_number("model.noise_var", 0.1);
  if (cfg.model_name == "min_phase") {
    cfg.model = benchmark::min_phase(cfg.noise_var);
  } else if (cfg.model_name == "nonmin_phase") {
    cfg.model = benchmark::nonmin_phase(cfg.noise_var);
  } else if (cfg.model_name == "vtol") {
    cfg.model = benchmark::vtol_discrete();
    cfg.feedback_gain = benchmark::vtol().Ky;
  } else if (cfg.model_name == "files") {
    StateSpaceModel s;
    s.A = read_matrix_csv(map.get_string("model.a_csv"));
    s.B = read_matrix_csv(map.get_string("model.b_csv"));
    s.C = read_matrix_csv(map.get_string("model.c_csv"));
    if (map.get_bool("model.continuous", false)) {
      const double dt = map.get_number("model.dt");
      auto [A, B] = zoh_discretize(s.A, s.B, dt);
      s.A = A;
      s.B = B;
    }
    const int n = s.n(), l = s.l();
    s.Q = cfg.noise_var * Mat::Identity(n, n);
    s.R = cfg.noise_var * Mat::Identity(l, l);
    s.S = Mat::Zero(n, l);
    cfg.model = s;
  } else {
    throw std::invalid_argument("model.name must be one of min_phase, "
                                "nonmin_phase, vtol, files; got '" +
                                cfg.model_name + "'");
  }
  cfg.model->validate();
  const int l = cfg.model->l(), m = cfg.model->m();

  cfg.T = static_cast<int>(map.get_number("identification.T", 1000));
  cfg.fir_order = static_cast<int>(map.get_number("identification.L", -1));
  cfg.amplitude = map.get_number("identification.amplitude", 1.0);
  cfg.seed = static_cast<std::uint64_t>(map.get_number("identification.seed", 1));
  if (cfg.T < 8) throw std::invalid_argument("identification.T too small");

  // [filter:<id>] sections
  std::vector<std::string> filter_sections;
  for (const auto& key : map.keys_with_prefix("filter:")) {
    const std::string section = key.substr(0, key.find('.'));
    if (std::find(filter_sections.begin(), filter_sections.end(), section) ==
        filter_sections.end())
      filter_sections.push_back(section);
  }
  for (const auto& section : filter_sections) {
    FilterConfig fc;
    fc.id = section.substr(7);
    fc.i = static_cast<int>(map.get_number(section + ".i", 2));
    fc.p = to_int_list(map.get_array(section + ".p"));
    fc.q = to_int_list(map.get_array(section + ".q"));
    fc.kind = parse_kind(map.get_string(section + ".kind"));
    fc.poles = map.get_array(section + ".poles", {0.3});
    // channel-range and kind-consistency checks happen here so a bad config
    // fails before any work starts
    FilterSpec spec;
    spec.i = fc.i;
    spec.sel = IndexSelection(fc.p, fc.q, l, m);
    spec.kind = fc.kind;
    spec.ar_poles = fc.poles;
    spec.validate();
    cfg.filters.push_back(fc);
  }

  for (int c = 1; c <= m; ++c) {
    const std::string key = "faults.actuator" + std::to_string(c);
    if (map.has(key)) {
      cfg.scenario.actuator.resize(m);
      cfg.scenario.actuator[c - 1] = parse_fault(map.get_string(key));
    }
  }
  for (int c = 1; c <= l; ++c) {
    const std::string key = "faults.sensor" + std::to_string(c);
    if (map.has(key)) {
      cfg.scenario.sensor.resize(l);
      cfg.scenario.sensor[c - 1] = parse_fault(map.get_string(key));
    }
  }
  for (const auto& key : map.keys_with_prefix("faults.")) {
    const std::string name = key.substr(7);
    const bool known =
        (name.rfind("actuator", 0) == 0 &&
         std::stoi(name.substr(8)) >= 1 && std::stoi(name.substr(8)) <= m) ||
        (name.rfind("sensor", 0) == 0 && std::stoi(name.substr(6)) >= 1 &&
         std::stoi(name.substr(6)) <= l);
    if (!known)
      throw std::invalid_argument("faults." + name +
                                  ": channel outside the model dimensions");
  }

  cfg.split_ratio = map.get_number("tuning.ratio", 0.7);
  cfg.lambda_tol = map.get_number("tuning.lambda_tol", 1e-6);
  cfg.ridge = map.get_number("tuning.ridge", 1e-2);
  if (cfg.split_ratio <= 0.0 || cfg.split_ratio >= 1.0)
    throw std::invalid_argument("tuning.ratio must lie strictly in (0,1)");

  cfg.n_runs = static_cast<int>(map.get_number("evaluation.runs", 100));
  cfg.lo_quantile = map.get_number("evaluation.lo_quantile", 0.005);
  cfg.hi_quantile = map.get_number("evaluation.hi_quantile", 0.995);
  cfg.jobs = static_cast<int>(map.get_number("evaluation.jobs", 1));
  cfg.out_dir = map.get_string("output.dir", std::string("out"));
  return cfg;
}

}  // namespace fdie
