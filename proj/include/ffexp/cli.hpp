#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ffexp {

constexpr const char* kToolVersion = "0.1.0";

/// Schema violation or unreadable config.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat `section.key = value` settings read from an INI file.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Rejects unknown sections and keys, and values of the wrong type, for
  /// the given command.
  void validate(const std::string& command) const;

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) const;
  std::uint64_t get_uint(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) const;
  double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  /// Comma-separated list.
  std::vector<std::uint64_t> get_uint_list(const std::string& key,
                                           const std::optional<std::vector<std::uint64_t>>& fallback = std::nullopt) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }
  /// FNV-1a over the sorted key=value lines.
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
};

struct RunOptions {
  std::filesystem::path cache_dir = ".ffexp-cache";
  unsigned threads = 1;
  bool exact = false;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> plot_data;
};

/// One (x, y, series) triple for external plotting.
struct PlotPoint {
  double x = 0, y = 0;
  std::string series;
};

struct ResultEnvelope {
  std::string tool = "ffexp";
  std::string version = kToolVersion;
  std::string command;
  std::string config_hash;
  std::vector<std::string> cache_hashes;
  bool exact = false;
  unsigned threads = 1;
  /// Wall-clock data; everything outside `timing` is reproducible.
  nlohmann::json timing = nlohmann::json::object();
  std::map<std::string, bool> assertions;
  nlohmann::json payload;
  /// CSV side table (scan, escape), empty otherwise.
  std::string table;
  /// Where the table goes when set (output.table); not serialized.
  std::optional<std::filesystem::path> table_path;
  std::vector<PlotPoint> plot;

  bool passed() const;
};

void to_json(nlohmann::json& j, const ResultEnvelope& r);

const std::vector<std::string>& command_names();

ResultEnvelope cmd_admissible(const ExperimentConfig& cfg, const RunOptions& opts);
ResultEnvelope cmd_generate(const ExperimentConfig& cfg, const RunOptions& opts);
ResultEnvelope cmd_lambda(const ExperimentConfig& cfg, const RunOptions& opts);
ResultEnvelope cmd_scan(const ExperimentConfig& cfg, const RunOptions& opts);
ResultEnvelope cmd_escape(const ExperimentConfig& cfg, const RunOptions& opts);
ResultEnvelope cmd_dichotomy(const ExperimentConfig& cfg, const RunOptions& opts);
ResultEnvelope cmd_multiscale(const ExperimentConfig& cfg, const RunOptions& opts);
ResultEnvelope cmd_entropy(const ExperimentConfig& cfg, const RunOptions& opts);

/// Validates the config and dispatches. Throws ConfigError for unknown commands.
ResultEnvelope run_command(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opts);

/// Writes the envelope JSON to opts.out (or `out`), the side table next to it
/// with a .csv extension, and plot triples to opts.plot_data.
void write_outputs(const ResultEnvelope& r, const RunOptions& opts, std::ostream& out);

/// 0 when every assertion passed, 2 otherwise.
int exit_code(const ResultEnvelope& r);

/// Full pipeline with the exit-code contract: 0 passed, 2 assertion failed,
/// 1 operational error (message on `err`).
int run_cli(const std::string& command, const std::filesystem::path& config_path, const RunOptions& opts,
            std::ostream& out, std::ostream& err);

}  // namespace ffexp
