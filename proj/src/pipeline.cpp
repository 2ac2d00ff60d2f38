#include "iotids/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "iotids/error.hpp"
#include "iotids/random.hpp"

namespace iotids {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// FNV-1a; keeps model seeds stable when entries are filtered or reordered.
std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <typename T>
T read(const Json& obj, const char* key, T fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(fmt::format("{}: '{}' has the wrong type ({})", where, key, it->dump()));
  }
}

std::uint64_t read_seed(const Json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw ConfigError(fmt::format("{}: seed must be a non-negative integer", where));
}

Json grid_to_json(const std::vector<GridAxis>& grid) {
  Json g = Json::object();
  for (const auto& axis : grid) g[axis.name] = axis.values;
  return g;
}

Json class_counts_json(const std::array<std::size_t, 2>& c) { return Json::array({c[0], c[1]}); }

std::array<std::size_t, 2> class_counts_from(const Json& j) { return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()}; }

ModelSpec seeded_spec(const PipelineConfig& config, const ModelEntry& entry) {
  ModelSpec spec = entry.spec;
  if (uses_seed(spec.kind) && !spec.params.contains("seed")) spec.params["seed"] = config.model_seed(entry.name);
  return spec;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

}  // namespace

std::uint64_t PipelineConfig::fold_seed() const { return derive_seed(seed, 1); }

std::uint64_t PipelineConfig::model_seed(const std::string& name) const { return derive_seed(seed, name_hash(name)); }

std::vector<GridAxis> default_grid(ModelKind kind) {
  switch (kind) {
    case ModelKind::random_forest:
      return {{"n_estimators", {100, 200, 300}}, {"max_depth", {4, 8, 16}}};
    case ModelKind::decision_tree:
      return {{"criterion", {"gini", "entropy"}},
              {"max_depth", {10, 30, nullptr}},
              {"min_samples_leaf", {1, 5}},
              {"min_samples_split", {2, 10}}};
    case ModelKind::knn:
      return {{"n_neighbors", {3, 5, 7}}, {"weights", {"uniform", "distance"}}};
    case ModelKind::gradient_boosting:
      return {{"learning_rate", {0.01, 0.1}}, {"max_depth", {3, 4}}, {"subsample", {0.8, 1.0}}};
    case ModelKind::adaboost:
      return {{"learning_rate", {0.1, 1.0}}, {"n_estimators", {50, 100}}};
    case ModelKind::majority:
      return {};
  }
  return {};
}

PipelineConfig default_pipeline_config() {
  PipelineConfig config;
  for (ModelKind kind : {ModelKind::random_forest, ModelKind::decision_tree, ModelKind::gradient_boosting,
                         ModelKind::adaboost, ModelKind::knn}) {
    ModelEntry entry;
    entry.name = to_string(kind);
    entry.spec.kind = kind;
    entry.spec.params = Json::object();
    entry.spec.scaling = kind == ModelKind::knn ? ScalerKind::min_max : ScalerKind::none;
    entry.grid = default_grid(kind);
    config.models.push_back(std::move(entry));
  }
  return config;
}

PipelineConfig pipeline_config_from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("pipeline config must be a JSON object");
  reject_unknown_keys(doc,
                      {"schema_version", "dataset", "label_column", "seed", "split", "scaling", "cv", "output_dir",
                       "use_grid", "models"},
                      "config");
  const int version = read<int>(doc, "schema_version", kConfigSchemaVersion, "config");
  if (version != kConfigSchemaVersion) {
    throw ConfigError(fmt::format("unsupported config schema_version {} (expected {})", version, kConfigSchemaVersion));
  }

  PipelineConfig c;
  c.dataset = read<std::string>(doc, "dataset", "", "config");
  c.label_column = read<std::string>(doc, "label_column", c.label_column, "config");
  if (doc.contains("seed")) c.seed = read_seed(doc["seed"], "config");
  c.scaling = scaler_kind_from_string(read<std::string>(doc, "scaling", "none", "config"));
  c.output_dir = read<std::string>(doc, "output_dir", c.output_dir, "config");
  c.use_grid = read<bool>(doc, "use_grid", true, "config");

  if (doc.contains("split")) {
    const Json& s = doc["split"];
    if (!s.is_object()) throw ConfigError("config: 'split' must be an object");
    reject_unknown_keys(s, {"test_fraction", "stratified", "seed"}, "split");
    c.test_fraction = read<double>(s, "test_fraction", c.test_fraction, "split");
    c.split_stratified = read<bool>(s, "stratified", c.split_stratified, "split");
    if (s.contains("seed")) c.split_seed = read_seed(s["seed"], "split");
  }
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("split.test_fraction must lie in (0, 1)");

  if (doc.contains("cv")) {
    const Json& cv = doc["cv"];
    if (!cv.is_object()) throw ConfigError("config: 'cv' must be an object");
    reject_unknown_keys(cv, {"folds", "stratified", "metric"}, "cv");
    c.folds = read<std::size_t>(cv, "folds", c.folds, "cv");
    c.cv_stratified = read<bool>(cv, "stratified", c.cv_stratified, "cv");
    c.metric = selection_metric_from_string(read<std::string>(cv, "metric", "accuracy", "cv"));
  }

  if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty()) {
    throw ConfigError("config: 'models' must be a non-empty array");
  }
  std::set<std::string> names;
  for (const Json& m : doc["models"]) {
    if (!m.is_object()) throw ConfigError("config: each model entry must be an object");
    reject_unknown_keys(m, {"name", "kind", "params", "grid", "scaling", "eval_subsample"}, "model entry");
    if (!m.contains("kind")) throw ConfigError("config: model entry without 'kind'");
    ModelEntry e;
    e.spec.kind = model_kind_from_string(read<std::string>(m, "kind", "", "model entry"));
    e.name = read<std::string>(m, "name", to_string(e.spec.kind), "model entry");
    if (e.name.empty()) throw ConfigError("config: model name must not be empty");
    if (!names.insert(e.name).second) throw ConfigError(fmt::format("config: duplicate model name '{}'", e.name));
    const std::string where = fmt::format("model '{}'", e.name);
    e.spec.params = m.contains("params") ? m["params"] : Json::object();
    e.spec.scaling = m.contains("scaling") ? scaler_kind_from_string(read<std::string>(m, "scaling", "", where))
                                           : c.scaling;
    if (m.contains("eval_subsample")) {
      const double f = read<double>(m, "eval_subsample", 1.0, where);
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError(fmt::format("{}: eval_subsample must lie in (0, 1]", where));
      if (f < 1.0) e.eval_subsample = f;
    }
    resolve_params(e.spec.kind, e.spec.params);

    if (m.contains("grid")) {
      const Json& g = m["grid"];
      if (!g.is_object()) throw ConfigError(fmt::format("{}: 'grid' must be an object of value lists", where));
      const Json defaults = default_params(e.spec.kind);
      for (const auto& [axis, values] : g.items()) {
        if (!defaults.contains(axis)) {
          throw ConfigError(fmt::format("{}: grid axis '{}' is not a parameter of '{}'", where, axis,
                                        to_string(e.spec.kind)));
        }
        if (!values.is_array() || values.empty()) {
          throw ConfigError(fmt::format("{}: grid axis '{}' must be a non-empty array", where, axis));
        }
        e.grid.push_back({axis, std::vector<Json>(values.begin(), values.end())});
      }
      const ParamGrid pg{e.spec, e.grid};
      for (std::size_t i = 0; i < pg.size(); ++i) resolve_params(e.spec.kind, pg.combination(i));
    }
    c.models.push_back(std::move(e));
  }
  const bool any_grid = std::any_of(c.models.begin(), c.models.end(), [](const ModelEntry& e) { return !e.grid.empty(); });
  if (any_grid && c.folds < 2) throw ConfigError("cv.folds must be at least 2 when a grid is present");
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("config file '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return pipeline_config_from_json(doc);
}

Json to_json(const PipelineConfig& c) {
  Json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["dataset"] = c.dataset;
  doc["label_column"] = c.label_column;
  doc["seed"] = c.seed;
  Json split = {{"test_fraction", c.test_fraction}, {"stratified", c.split_stratified}};
  if (c.split_seed) split["seed"] = *c.split_seed;
  doc["split"] = split;
  doc["scaling"] = to_string(c.scaling);
  doc["cv"] = {{"folds", c.folds}, {"stratified", c.cv_stratified}, {"metric", to_string(c.metric)}};
  doc["output_dir"] = c.output_dir;
  doc["use_grid"] = c.use_grid;
  Json models = Json::array();
  for (const auto& e : c.models) {
    Json m = {{"name", e.name}, {"kind", to_string(e.spec.kind)}, {"params", e.spec.params},
              {"scaling", to_string(e.spec.scaling)}};
    if (!e.grid.empty()) m["grid"] = grid_to_json(e.grid);
    if (e.eval_subsample) m["eval_subsample"] = *e.eval_subsample;
    models.push_back(std::move(m));
  }
  doc["models"] = models;
  return doc;
}

void select_models(PipelineConfig& config, const std::vector<std::string>& names) {
  if (names.empty()) return;
  std::vector<ModelEntry> kept;
  for (const auto& n : names) {
    auto it = std::find_if(config.models.begin(), config.models.end(), [&](const ModelEntry& e) { return e.name == n; });
    if (it == config.models.end()) {
      it = std::find_if(config.models.begin(), config.models.end(),
                        [&](const ModelEntry& e) { return to_string(e.spec.kind) == n; });
    }
    if (it == config.models.end()) throw ConfigError(fmt::format("--models: no model named '{}'", n));
    if (std::none_of(kept.begin(), kept.end(), [&](const ModelEntry& e) { return e.name == it->name; })) {
      kept.push_back(*it);
    }
  }
  config.models = std::move(kept);
}

// ---------------------------------------------------------------------------
// Reports

bool RunReport::all_failed() const {
  return std::none_of(models.begin(), models.end(), [](const ModelRun& m) { return m.ok; });
}

ComparisonTable RunReport::comparison() const {
  std::vector<ComparisonInput> inputs;
  for (const auto& m : models) {
    if (!m.ok) continue;
    inputs.push_back({m.name, m.metrics, m.roc ? std::optional<double>(m.roc->auc) : std::nullopt});
  }
  return summarize_comparison(inputs);
}

Json model_run_to_json(const ModelRun& m) {
  Json j;
  j["name"] = m.name;
  j["kind"] = to_string(m.kind);
  j["scaling"] = to_string(m.scaling);
  j["status"] = m.ok ? "ok" : "failed";
  j["error"] = m.ok ? Json(nullptr) : Json(m.error);
  j["params"] = m.params;
  j["grid_search"] = m.grid_search;
  if (m.ok) {
    j["evaluated_rows"] = m.evaluated_rows;
    j["confusion"] = {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}};
    j["metrics"] = {{"precision", m.metrics.precision},
                    {"recall", m.metrics.recall},
                    {"f1", m.metrics.f1},
                    {"accuracy", m.metrics.accuracy},
                    {"precision_defined", m.metrics.precision_defined},
                    {"recall_defined", m.metrics.recall_defined},
                    {"f1_defined", m.metrics.f1_defined}};
    j["metrics_rounded"] = {{"precision", round_to(m.metrics.precision, 3)},
                            {"recall", round_to(m.metrics.recall, 3)},
                            {"f1", round_to(m.metrics.f1, 3)},
                            {"accuracy_percent", round_to(m.metrics.accuracy * 100.0, 2)}};
    if (m.roc) {
      Json points = Json::array();
      for (const auto& p : m.roc->points) points.push_back({p.fpr, p.tpr});
      j["roc"] = {{"auc", m.roc->auc}, {"points", points}};
    } else {
      j["roc"] = nullptr;
    }
  }
  j["timings_ms"] = {{"tune", m.timings.tune_ms}, {"fit", m.timings.fit_ms}, {"predict", m.timings.predict_ms}};
  return j;
}

Json to_json(const RunReport& r) {
  Json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["artifact_version"] = kArtifactVersion;
  doc["config"] = r.config;
  const auto& d = r.dataset;
  doc["dataset"] = {{"path", d.path},
                    {"rows", d.rows},
                    {"features", d.features},
                    {"class_counts", class_counts_json(d.class_counts)},
                    {"train_rows", d.train_rows},
                    {"test_rows", d.test_rows},
                    {"train_class_counts", class_counts_json(d.train_class_counts)},
                    {"test_class_counts", class_counts_json(d.test_class_counts)},
                    {"cv_scope", "train_partition"}};
  doc["timings_ms"] = {{"load", r.load_ms}};
  Json models = Json::array();
  for (const auto& m : r.models) models.push_back(model_run_to_json(m));
  doc["models"] = models;
  doc["comparison"] = r.comparison().to_json();
  return doc;
}

RunReport run_report_from_json(const Json& doc) {
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kReportSchemaVersion) {
      throw ConfigError(fmt::format("unsupported report schema_version {} (expected {})", version,
                                    kReportSchemaVersion));
    }
    RunReport r;
    r.config = doc.at("config");
    const Json& d = doc.at("dataset");
    r.dataset.path = d.at("path").get<std::string>();
    r.dataset.rows = d.at("rows").get<std::size_t>();
    r.dataset.features = d.at("features").get<std::size_t>();
    r.dataset.class_counts = class_counts_from(d.at("class_counts"));
    r.dataset.train_rows = d.at("train_rows").get<std::size_t>();
    r.dataset.test_rows = d.at("test_rows").get<std::size_t>();
    r.dataset.train_class_counts = class_counts_from(d.at("train_class_counts"));
    r.dataset.test_class_counts = class_counts_from(d.at("test_class_counts"));
    if (doc.contains("timings_ms")) r.load_ms = doc["timings_ms"].value("load", 0.0);
    for (const Json& j : doc.at("models")) {
      ModelRun m;
      m.name = j.at("name").get<std::string>();
      m.kind = model_kind_from_string(j.at("kind").get<std::string>());
      m.scaling = scaler_kind_from_string(j.at("scaling").get<std::string>());
      m.ok = j.at("status").get<std::string>() == "ok";
      if (!m.ok) m.error = j.at("error").is_string() ? j.at("error").get<std::string>() : "";
      m.params = j.at("params");
      m.grid_search = j.at("grid_search");
      if (m.ok) {
        m.evaluated_rows = j.at("evaluated_rows").get<std::size_t>();
        const Json& cm = j.at("confusion");
        m.confusion = {cm.at("tp").get<std::uint64_t>(), cm.at("fp").get<std::uint64_t>(),
                       cm.at("tn").get<std::uint64_t>(), cm.at("fn").get<std::uint64_t>()};
        // Metrics are recomputed from the stored counts.
        m.metrics = metrics(m.confusion);
        if (!j.at("roc").is_null()) {
          RocCurve roc;
          for (const Json& p : j["roc"].at("points")) roc.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
          roc.auc = j["roc"].at("auc").get<double>();
          m.roc = std::move(roc);
        }
      }
      if (j.contains("timings_ms")) {
        const Json& t = j["timings_ms"];
        m.timings = {t.value("tune", 0.0), t.value("fit", 0.0), t.value("predict", 0.0)};
      }
      r.models.push_back(std::move(m));
    }
    return r;
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("malformed report document: {}", e.what()));
  }
}

Json strip_timings(Json doc) {
  if (doc.is_object()) {
    doc.erase("timings_ms");
    for (auto& [key, value] : doc.items()) value = strip_timings(std::move(value));
  } else if (doc.is_array()) {
    for (auto& value : doc) value = strip_timings(std::move(value));
  }
  return doc;
}

std::string safe_file_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                    c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "model" : out;
}

// ---------------------------------------------------------------------------
// Running

ModelRun evaluate_model(const TrainedModel& model, const DataTable& table, const std::string& name,
                        std::size_t workers) {
  ModelRun run;
  run.name = name;
  run.kind = model.kind();
  run.scaling = model.scaler().kind;
  run.params = model.params();
  run.grid_search = nullptr;
  const auto start = Clock::now();
  const Predictions pred = model.predict_table(table, workers);
  run.timings.predict_ms = elapsed_ms(start);
  run.evaluated_rows = table.rows();
  run.confusion = confusion(table.labels(), pred.labels);
  run.metrics = metrics(run.confusion);
  const auto counts = table.class_counts();
  if (counts[0] > 0 && counts[1] > 0) run.roc = roc_curve(table.labels(), pred.scores);
  run.ok = true;
  return run;
}

namespace {

Json grid_result_to_json(const GridSearchResult& g, const PipelineConfig& config) {
  Json cells = Json::array();
  for (const auto& c : g.cells) {
    cells.push_back({{"params", c.params},
                     {"fold_scores", c.fold_scores},
                     {"mean", c.error ? Json(nullptr) : Json(c.mean)},
                     {"error", c.error ? Json(*c.error) : Json(nullptr)}});
  }
  return {{"metric", to_string(config.metric)},
          {"folds", config.folds},
          {"stratified", config.cv_stratified},
          {"best_index", g.best_index},
          {"best_mean", g.best_mean},
          {"best_params", g.best_params},
          {"cells", cells}};
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, std::size_t workers) {
  if (config.dataset.empty()) throw ConfigError("no dataset given (set 'dataset' or pass --data)");
  const auto start = Clock::now();
  const DataTable table = load_csv(config.dataset, config.label_column);
  const double load_ms = elapsed_ms(start);
  RunReport report = run_pipeline(config, table, workers);
  report.load_ms = load_ms;
  return report;
}

RunReport run_pipeline(const PipelineConfig& config, const DataTable& table, std::size_t workers) {
  if (config.models.empty()) throw ConfigError("no models configured");
  RunReport report;
  report.config = to_json(config);
  // Where the files land is not part of the result.
  report.config.erase("output_dir");

  const SplitIndices split = split_indices(table, config.split_spec());
  const DataTable train = table.subset(split.train);
  const DataTable test = table.subset(split.test);
  if (train.empty() || test.empty()) {
    throw DataError(fmt::format("split left {} training and {} test rows", train.rows(), test.rows()));
  }
  report.dataset = {config.dataset,      table.rows(),         table.cols(), table.class_counts(), train.rows(),
                    test.rows(),         train.class_counts(), test.class_counts()};

  const bool any_grid = config.use_grid && std::any_of(config.models.begin(), config.models.end(),
                                                       [](const ModelEntry& e) { return !e.grid.empty(); });
  std::optional<FoldPlan> plan;
  if (any_grid) plan = make_folds(train, config.folds, config.fold_seed(), config.cv_stratified);

  for (const ModelEntry& entry : config.models) {
    ModelRun run;
    run.name = entry.name;
    run.kind = entry.spec.kind;
    run.scaling = entry.spec.scaling;
    run.grid_search = nullptr;
    const ModelSpec spec = seeded_spec(config, entry);
    try {
      run.params = resolve_params(spec.kind, spec.params);
      std::optional<TrainedModel> model;
      if (config.use_grid && !entry.grid.empty()) {
        const auto t0 = Clock::now();
        GridSearchResult g = grid_search(train, ParamGrid{spec, entry.grid}, *plan, config.metric, workers);
        run.timings.tune_ms = elapsed_ms(t0);
        run.grid_search = grid_result_to_json(g, config);
        run.params = g.best_params;
        model = std::move(g.best_model);
      } else {
        const auto t0 = Clock::now();
        model = fit_model(spec, train, workers);
        run.timings.fit_ms = elapsed_ms(t0);
      }
      const DataTable* eval_table = &test;
      DataTable subsample;
      if (entry.eval_subsample) {
        const SplitSpec sub{*entry.eval_subsample, derive_seed(config.seed, 2), true};
        subsample = test.subset(split_indices(test, sub).test);
        eval_table = &subsample;
      }
      ModelRun scored = evaluate_model(*model, *eval_table, entry.name, workers);
      run.evaluated_rows = scored.evaluated_rows;
      run.confusion = scored.confusion;
      run.metrics = scored.metrics;
      run.roc = std::move(scored.roc);
      run.timings.predict_ms = scored.timings.predict_ms;
      run.ok = true;
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
    }
    report.models.push_back(std::move(run));
  }
  return report;
}

void write_run_outputs(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", to_json(report).dump(2) + "\n");
  write_text(dir / "comparison.txt", report.comparison().to_text());
  for (const auto& m : report.models) {
    if (!m.ok) continue;
    const std::string stem = safe_file_stem(m.name);
    write_text(dir / (stem + "_confusion.csv"), confusion_to_csv(m.confusion));
    if (m.roc) {
      write_text(dir / (stem + "_roc.csv"), roc_to_csv(*m.roc));
      write_text(dir / (stem + "_roc.svg"), render_roc_svg(*m.roc, "ROC curve: " + m.name));
    }
  }
}

Json run_grid_search(const PipelineConfig& config, std::size_t workers) {
  if (config.dataset.empty()) throw ConfigError("no dataset given (set 'dataset' or pass --data)");
  const DataTable table = load_csv(config.dataset, config.label_column);
  const SplitIndices split = split_indices(table, config.split_spec());
  const DataTable train = table.subset(split.train);
  const FoldPlan plan = make_folds(train, config.folds, config.fold_seed(), config.cv_stratified);
  Json out = Json::array();
  for (const ModelEntry& entry : config.models) {
    if (entry.grid.empty()) continue;
    const ModelSpec spec = seeded_spec(config, entry);
    Json rec = {{"name", entry.name}, {"kind", to_string(entry.spec.kind)}};
    try {
      const auto t0 = Clock::now();
      const GridSearchResult g = grid_search(train, ParamGrid{spec, entry.grid}, plan, config.metric, workers);
      rec["status"] = "ok";
      rec["grid_search"] = grid_result_to_json(g, config);
      rec["timings_ms"] = {{"tune", elapsed_ms(t0)}};
    } catch (const std::exception& e) {
      rec["status"] = "failed";
      rec["error"] = e.what();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::pair<std::string, TrainedModel>> train_models(const PipelineConfig& config, const DataTable& table,
                                                               std::size_t workers) {
  std::vector<std::pair<std::string, TrainedModel>> out;
  std::optional<FoldPlan> plan;
  for (const ModelEntry& entry : config.models) {
    const ModelSpec spec = seeded_spec(config, entry);
    if (config.use_grid && !entry.grid.empty()) {
      if (!plan) plan = make_folds(table, config.folds, config.fold_seed(), config.cv_stratified);
      GridSearchResult g = grid_search(table, ParamGrid{spec, entry.grid}, *plan, config.metric, workers);
      out.emplace_back(entry.name, std::move(*g.best_model));
    } else {
      out.emplace_back(entry.name, fit_model(spec, table, workers));
    }
  }
  return out;
}

}  // namespace iotids
