#ifndef FDIE_CONFIG_HPP
#define FDIE_CONFIG_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fdie/eval.hpp"

namespace fdie {

/// One parsed config value: string, bool, number, or numeric array.
using ConfigValue =
    std::variant<std::string, bool, double, std::vector<double>>;

/// Flat key/value view of the config file: `[section]` headers prefix the
/// keys that follow (`section.key`). Grammar documented in the README.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::filesystem::path& path);
  static ConfigMap parse_text(const std::string& text,
                              const std::string& origin = "<text>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key,
                         std::optional<std::string> fallback = {}) const;
  double get_number(const std::string& key,
                    std::optional<double> fallback = {}) const;
  bool get_bool(const std::string& key, std::optional<bool> fallback = {}) const;
  std::vector<double> get_array(const std::string& key,
                                std::vector<double> fallback = {}) const;
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  const std::string& text() const { return text_; }

 private:
  std::map<std::string, ConfigValue> values_;
  std::string text_;
  std::string origin_;

  [[noreturn]] void fail(const std::string& key, const std::string& why) const;
};

struct FilterConfig {
  std::string id;
  int i = 2;
  std::vector<int> p, q;
  FilterKind kind = FilterKind::detection;
  std::vector<double> poles = {0.3};
};

/// Fully validated run configuration with defaults filled.
struct RunConfig {
  // model
  std::string model_name;            // nonmin_phase | min_phase | vtol | files
  std::optional<StateSpaceModel> model;  // resolved discrete model
  std::optional<Mat> feedback_gain;      // closed-loop runs
  double noise_var = 0.1;

  // identification
  int T = 1000;
  int fir_order = -1;                // -1: default 4i+4 of the largest i
  double amplitude = 1.0;
  std::uint64_t seed = 1;

  // filters
  std::vector<FilterConfig> filters;

  // faults
  FaultScenario scenario;

  // tuning
  double split_ratio = 0.7;
  double lambda_tol = 1e-6;
  double ridge = 1e-2;

  // evaluation
  int n_runs = 100;
  double lo_quantile = 0.005;
  double hi_quantile = 0.995;
  int jobs = 1;

  std::filesystem::path out_dir = "out";
  std::string raw_text;

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig from_map(const ConfigMap& map);
};

/// Executes one CLI subcommand. Returns the process exit status:
/// 0 ok, 1 domain failure, 2 usage error.
int dispatch(const std::string& command, RunConfig config, bool quiet);

}  // namespace fdie

#endif
