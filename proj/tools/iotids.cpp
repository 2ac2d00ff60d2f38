// Command-line front end: run, grid-search, train, evaluate, report,
// default-config.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "iotids/error.hpp"
#include "iotids/model_io.hpp"
#include "iotids/parallel.hpp"
#include "iotids/pipeline.hpp"

namespace {

using namespace iotids;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitAllFailed = 4;

struct Options {
  std::string config_path;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> models;
  bool no_grid = false;
  std::size_t threads = 0;
  std::string label_column;
  std::string model_path;
  std::string report_path;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "Pipeline config (JSON); defaults to the built-in five-model setup");
  cmd->add_option("--data", o.data, "CSV dataset; overrides the config");
  cmd->add_option("--out", o.out, "Output directory; overrides the config");
  cmd->add_option("--seed", o.seed, "Master seed; overrides the config");
  cmd->add_option("--models", o.models, "Comma-separated model names to keep")->delimiter(',');
  cmd->add_flag("--no-grid", o.no_grid, "Skip grid search and use the fixed hyperparameters");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--label-column", o.label_column, "Label column name, or 'last'");
}

PipelineConfig resolve_config(const Options& o) {
  PipelineConfig c = o.config_path.empty() ? default_pipeline_config() : load_pipeline_config(o.config_path);
  if (!o.data.empty()) c.dataset = o.data;
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.no_grid) c.use_grid = false;
  if (!o.label_column.empty()) c.label_column = o.label_column;
  select_models(c, o.models);
  if (c.use_grid && c.folds < 2) throw ConfigError("cv.folds must be at least 2 when a grid is present");
  return c;
}

std::size_t workers(const Options& o) { return o.threads == 0 ? default_workers() : o.threads; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

int cmd_run(const Options& o) {
  const PipelineConfig config = resolve_config(o);
  const RunReport report = run_pipeline(config, workers(o));
  write_run_outputs(report, config.output_dir);
  std::cout << report.comparison().to_text();
  for (const auto& m : report.models) {
    if (!m.ok) std::cerr << fmt::format("model '{}' failed: {}\n", m.name, m.error);
  }
  std::cout << fmt::format("report written to {}\n", (std::filesystem::path(config.output_dir) / "report.json").string());
  return report.all_failed() ? kExitAllFailed : 0;
}

int cmd_grid_search(const Options& o) {
  const PipelineConfig config = resolve_config(o);
  const Json result = run_grid_search(config, workers(o));
  std::filesystem::create_directories(config.output_dir);
  const Json doc = {{"schema_version", kReportSchemaVersion}, {"config", to_json(config)}, {"models", result}};
  write_file(std::filesystem::path(config.output_dir) / "grid_search.json", doc.dump(2) + "\n");
  bool any_ok = false;
  for (const auto& rec : result) {
    if (rec["status"] == "ok") {
      any_ok = true;
      const Json& g = rec["grid_search"];
      std::cout << fmt::format("{}: best {} = {:.4f} with {}\n", rec["name"].get<std::string>(),
                               g["metric"].get<std::string>(), g["best_mean"].get<double>(), g["best_params"].dump());
    } else {
      std::cerr << fmt::format("{}: failed: {}\n", rec["name"].get<std::string>(), rec["error"].get<std::string>());
    }
  }
  if (result.empty()) std::cout << "no model entry has a grid\n";
  return result.empty() || any_ok ? 0 : kExitAllFailed;
}

int cmd_train(const Options& o) {
  const PipelineConfig config = resolve_config(o);
  if (config.dataset.empty()) throw ConfigError("no dataset given (set 'dataset' or pass --data)");
  const DataTable table = load_csv(config.dataset, config.label_column);
  std::filesystem::create_directories(config.output_dir);
  const auto trained = train_models(config, table, workers(o));
  for (const auto& [name, model] : trained) {
    const auto path = std::filesystem::path(config.output_dir) / (safe_file_stem(name) + ".model.json");
    save_model(model, path);
    std::cout << fmt::format("{} -> {}\n", name, path.string());
  }
  return 0;
}

int cmd_evaluate(const Options& o) {
  const TrainedModel model = load_model(o.model_path);
  const DataTable table = load_csv(o.data, o.label_column.empty() ? "last" : o.label_column);
  if (table.feature_names() != model.feature_names()) {
    throw DataError(fmt::format("'{}' does not have the {} feature columns the model was trained on", o.data,
                                model.n_features()));
  }
  const std::string name = std::filesystem::path(o.model_path).stem().stem().string();
  const ModelRun run = evaluate_model(model, table, name, workers(o));
  std::cout << model_run_to_json(run).dump(2) << "\n";
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    const std::filesystem::path dir = o.out;
    const std::string stem = safe_file_stem(name);
    write_file(dir / (stem + "_evaluation.json"), model_run_to_json(run).dump(2) + "\n");
    write_file(dir / (stem + "_confusion.csv"), confusion_to_csv(run.confusion));
    if (run.roc) {
      write_file(dir / (stem + "_roc.csv"), roc_to_csv(*run.roc));
      write_file(dir / (stem + "_roc.svg"), render_roc_svg(*run.roc, "ROC curve: " + name));
    }
  }
  return 0;
}

int cmd_report(const Options& o) {
  std::ifstream in(o.report_path);
  if (!in) throw ConfigError(fmt::format("cannot open report '{}'", o.report_path));
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("report '{}' is not valid JSON: {}", o.report_path, e.what()));
  }
  const RunReport report = run_report_from_json(doc);
  std::cout << report.comparison().to_text();
  if (!o.out.empty()) write_run_outputs(report, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary intrusion-detection model study: tuning, training and evaluation of tree, ensemble and KNN "
               "classifiers on tabular traffic features"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "Split, tune, fit and evaluate every configured model");
  add_common(run, o);
  auto* grid = app.add_subcommand("grid-search", "Cross-validated grid search on the training partition only");
  add_common(grid, o);
  auto* train = app.add_subcommand("train", "Fit every configured model on the whole dataset and save it");
  add_common(train, o);
  auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on a labelled CSV");
  evaluate->add_option("--model", o.model_path, "Saved model (JSON)")->required();
  evaluate->add_option("--data", o.data, "Labelled CSV")->required();
  evaluate->add_option("--out", o.out, "Directory for confusion/ROC files");
  evaluate->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  evaluate->add_option("--label-column", o.label_column, "Label column name, or 'last'");
  auto* report = app.add_subcommand("report", "Re-render the comparison table and plots from a saved report");
  report->add_option("--report", o.report_path, "report.json from a previous run")->required();
  report->add_option("--out", o.out, "Directory to write the re-rendered files");
  auto* defaults = app.add_subcommand("default-config", "Print the built-in pipeline config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (grid->parsed()) return cmd_grid_search(o);
    if (train->parsed()) return cmd_train(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (report->parsed()) return cmd_report(o);
    if (defaults->parsed()) {
      std::cout << to_json(default_pipeline_config()).dump(2) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return kExitAllFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
