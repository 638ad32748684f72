// Command-line front end: presets, config runs, condition checks and quadratures.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <iostream>

#include "oddvar/errors.hpp"
#include "oddvar/experiment.hpp"

namespace {

using namespace oddvar;

void print_run(const RunResult& r) {
  if (r.ladder) {
    fmt::print("{}: {} paths, seed {}\n", r.name, r.ladder->n_paths, r.ladder->seed);
    fmt::print("  {:>12}  {:>14}  {:>12}  {:>14}  {:>12}\n", "eps", "mean", "mean_se", "mean_square", "ms_se");
    for (const auto& rec : r.ladder->records) {
      fmt::print("  {:>12.6g}  {:>14.6g}  {:>12.3g}  {:>14.6g}  {:>12.3g}\n", rec.eps, rec.mean, rec.mean_se,
                 rec.mean_square, rec.mean_square_se);
    }
    if (r.ladder->fit) {
      fmt::print("  slope {:.4f} +- {:.4f}\n", r.ladder->fit->slope, r.ladder->fit->half_width);
    }
  }
  if (!r.quadrature.empty()) {
    fmt::print("{}: quadrature\n", r.name);
    for (const auto& q : r.quadrature) {
      fmt::print("  eps {:<12.6g} total {:<14.8g} diagonal {:<14.8g} off {:.8g}\n", q.eps, q.total, q.diagonal(),
                 q.off_diagonal());
    }
    if (!r.theory_json["slope"].is_null()) {
      fmt::print("  slope {:.4f}, max/min {:.4f}\n", r.theory_json["slope"]["value"].get<double>(),
                 r.theory_json["max_over_min"].get<double>());
    }
  }
  for (const auto& a : r.expectations) fmt::print("  [{}] {}: {}\n", a.status, a.name, a.detail);
}

int run(int argc, char** argv) {
  CLI::App app{"Odd variations of Gaussian and Volterra processes"};
  app.require_subcommand(1);
  int workers = 0;
  std::string dump;
  std::string out_dir;
  app.add_option("--workers", workers, "Cap on worker threads (0 = OpenMP default); results do not depend on it")
      ->check(CLI::NonNegativeNumber);

  auto* preset = app.add_subcommand("preset", "Run a named preset");
  std::string preset_name;
  preset->add_option("name", preset_name, "Preset name")->required();
  preset->add_option("-o,--output", out_dir, "Output directory (default out/<preset>)");
  preset->add_option("--dump-ensemble", dump, "Also write path ensembles: binary, csv or both")
      ->check(CLI::IsMember({"binary", "csv", "both"}));

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  auto* check_cmd = app.add_subcommand("check", "Evaluate the condition checks of a config");
  auto* theory_cmd = app.add_subcommand("theory", "Quadrature of the second moment only");
  auto* list_cmd = app.add_subcommand("list", "List presets and models");
  std::string config_path;
  for (auto* sub : {run_cmd, check_cmd, theory_cmd}) {
    sub->add_option("config", config_path, "Config file (JSON)")->required();
    sub->add_option("-o,--output", out_dir, "Override the config's output_dir");
  }
  run_cmd->add_option("--dump-ensemble", dump, "Also write the path ensemble: binary, csv or both")
      ->check(CLI::IsMember({"binary", "csv", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  RunOptions opts;
  opts.workers = workers;
  opts.dump_binary = dump == "binary" || dump == "both";
  opts.dump_csv = dump == "csv" || dump == "both";

  if (list_cmd->parsed()) {
    fmt::print("presets:");
    for (const auto& n : preset_names()) fmt::print(" {}", n);
    fmt::print("\nmodels:");
    for (const auto& n : model_names()) fmt::print(" {}", n);
    fmt::print("\n");
    return 0;
  }
  if (preset->parsed()) {
    const auto dir = out_dir.empty() ? std::filesystem::path("out") / preset_name : std::filesystem::path(out_dir);
    const auto result = run_preset(preset_name, dir, opts);
    for (const auto& r : result.runs) print_run(r);
    const auto matrix = condition_matrix(result.runs);
    if (!matrix["processes"].empty()) fmt::print("\n{}", render_condition_matrix(matrix));
    fmt::print("\n{}", result.summary_csv);
    fmt::print("wrote {}\n", dir.string());
    return 0;
  }

  auto config = load_config(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  opts.mode = check_cmd->parsed() ? RunMode::conditions : theory_cmd->parsed() ? RunMode::theory : RunMode::full;
  const auto r = run_config(config, opts);
  print_run(r);
  if (opts.mode == RunMode::conditions) {
    for (const auto& v : r.verdicts) fmt::print("  {:<18} {:<13} {}\n", v.id, to_string(v.status), v.detail);
    fmt::print("\n{}", render_condition_matrix(condition_matrix({r})));
  }
  fmt::print("wrote {}\n", config.output_dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const oddvar::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const oddvar::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const oddvar::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
