#pragma once

// Declarative experiments: a JSON config names a model, a grid with an eps
// ladder, a functional and the checks to run. The CLI and the presets go
// through run_config.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "oddvar/registry.hpp"
#include "oddvar/theory.hpp"
#include "oddvar/variation.hpp"
#include "oddvar/verdict.hpp"

namespace oddvar {

struct ExperimentConfig {
  std::string name;
  nlohmann::json model;  // registry descriptor; null for audit-only configs
  double horizon = 1.0;
  std::size_t steps = 0;
  std::vector<double> ladder;
  nlohmann::json functional;  // kind, m, g, f, t
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  bool quadrature = false;
  std::size_t quadrature_resolution = 1024;
  std::optional<double> quadrature_horizon;
  bool chaos = false;
  nlohmann::json conditions = nlohmann::json::array();
  nlohmann::json expect = nlohmann::json::object();
  nlohmann::json audit;  // null unless present
  bool include_estimates = false;
  /// Full config with every default filled in, echoed into each report.
  nlohmann::json resolved;
};

/// Validates a config document. Errors are ValidationErrors naming the
/// offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& file);

/// Resolves the functional section against the registry selectors.
Functional make_functional(const nlohmann::json& functional);

enum class RunMode { full, conditions, theory };

struct RunOptions {
  RunMode mode = RunMode::full;
  int workers = 0;
  bool dump_binary = false;
  bool dump_csv = false;
  bool write_files = true;
};

struct RunResult {
  std::string name;
  std::optional<LadderReport> ladder;
  std::string ladder_csv;
  nlohmann::json ladder_json;
  std::vector<MomentQuadrature> quadrature;
  std::string theory_csv;
  nlohmann::json theory_json;
  std::vector<ConditionVerdict> verdicts;
  nlohmann::json conditions_json;
  nlohmann::json audit_json;
  std::vector<Annotation> expectations;
  nlohmann::json manifest;
  std::vector<std::filesystem::path> files;

  /// False when any expectation or condition verdict failed.
  bool all_passed() const;
};

RunResult run_config(const ExperimentConfig& config, const RunOptions& opts = {});

/// Runs one condition entry ({"check": name, ...}) against a resolved model.
ConditionVerdict run_condition(const ModelSpec& spec, const nlohmann::json& entry, double default_m,
                               std::uint64_t default_seed);

/// Conditions applied when a config lists none.
nlohmann::json default_conditions(const ModelSpec& spec);

std::vector<std::string> preset_names();
/// The configs a preset consists of; UsageError listing the presets when
/// the name is unknown.
std::vector<ExperimentConfig> preset_configs(const std::string& name, const std::filesystem::path& output_dir);

struct PresetResult {
  std::vector<RunResult> runs;
  nlohmann::json summary;
  std::string summary_csv;
  bool all_passed() const;
};

PresetResult run_preset(const std::string& name, const std::filesystem::path& output_dir, const RunOptions& opts = {});

/// Process x condition table: {"processes": [...], "conditions": [...], "matrix": [[status]]}.
nlohmann::json condition_matrix(const std::vector<RunResult>& runs);
std::string render_condition_matrix(const nlohmann::json& matrix);

/// Library, compiler and dependency versions for run manifests.
nlohmann::json build_versions();

}  // namespace oddvar
