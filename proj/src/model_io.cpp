#include "iotids/model_io.hpp"

#include <deque>
#include <fstream>

#include <fmt/format.h>

#include "iotids/error.hpp"

namespace iotids {

namespace {

Json node_to_json(const std::vector<TreeNode>& nodes, std::size_t i) {
  const TreeNode& n = nodes[i];
  Json j;
  if (n.is_leaf()) {
    j["leaf"] = true;
  } else {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
  }
  j["class_weight"] = {n.class_weight[0], n.class_weight[1]};
  j["samples"] = n.samples;
  j["value"] = n.value;
  if (!n.is_leaf()) {
    j["left"] = node_to_json(nodes, static_cast<std::size_t>(n.left));
    j["right"] = node_to_json(nodes, static_cast<std::size_t>(n.right));
  }
  return j;
}

Json trees_to_json(const std::vector<DecisionTreeModel>& trees) {
  Json arr = Json::array();
  for (const auto& t : trees) arr.push_back(tree_to_json(t));
  return arr;
}

Json table_to_json(const DataTable& t) {
  return {{"feature_names", t.feature_names()}, {"values", t.values()}, {"labels", t.labels()}};
}

DataTable table_from_json(const Json& j) {
  return DataTable(j.at("feature_names").get<std::vector<std::string>>(), j.at("values").get<std::vector<double>>(),
                   j.at("labels").get<std::vector<Label>>());
}

}  // namespace

Json tree_to_json(const DecisionTreeModel& tree) { return node_to_json(tree.nodes(), 0); }

DecisionTreeModel tree_from_json(const Json& root, const TreeConfig& config, std::size_t n_features) {
  // Breadth-first rebuild reproduces the node numbering of a grown tree.
  std::vector<TreeNode> nodes(1);
  std::deque<std::pair<const Json*, std::size_t>> queue{{&root, 0}};
  while (!queue.empty()) {
    auto [j, idx] = queue.front();
    queue.pop_front();
    TreeNode node;
    const auto w = j->at("class_weight").get<std::vector<double>>();
    if (w.size() != 2) throw ConfigError("tree node class_weight must have two entries");
    node.class_weight = {w[0], w[1]};
    node.samples = j->at("samples").get<std::uint64_t>();
    node.value = j->at("value").get<double>();
    if (!j->value("leaf", false)) {
      node.feature = j->at("feature").get<std::int32_t>();
      node.threshold = j->at("threshold").get<double>();
      if (node.feature < 0) throw ConfigError("tree node has a negative feature index");
      node.left = static_cast<std::int32_t>(nodes.size());
      node.right = node.left + 1;
      nodes.emplace_back();
      nodes.emplace_back();
      queue.emplace_back(&j->at("left"), static_cast<std::size_t>(node.left));
      queue.emplace_back(&j->at("right"), static_cast<std::size_t>(node.right));
    }
    nodes[idx] = node;
  }
  return DecisionTreeModel(std::move(nodes), config, n_features);
}

Json model_to_json(const TrainedModel& model) {
  Json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["format"] = "iotids-model";
  doc["kind"] = to_string(model.kind());
  doc["params"] = model.params();
  doc["feature_names"] = model.feature_names();
  Json scaler;
  scaler["kind"] = to_string(model.scaler().kind);
  scaler["columns"] = Json::array();
  for (const auto& c : model.scaler().columns) scaler["columns"].push_back({c.offset, c.scale});
  doc["scaler"] = scaler;

  Json body;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DecisionTreeModel>) {
          body["tree"] = tree_to_json(m);
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          body["members"] = trees_to_json(m.members());
        } else if constexpr (std::is_same_v<M, GradientBoostModel>) {
          body["base_score"] = m.base_score();
          body["learning_rate"] = m.learning_rate();
          body["trees"] = trees_to_json(m.trees());
        } else if constexpr (std::is_same_v<M, AdaBoostModel>) {
          body["members"] = trees_to_json(m.members());
        } else if constexpr (std::is_same_v<M, KnnModel>) {
          body["training"] = table_to_json(m.training());
        } else if constexpr (std::is_same_v<M, MajorityModel>) {
          body["prior"] = {m.prior()[0], m.prior()[1]};
        }
      },
      model.classifier());
  doc["model"] = body;
  return doc;
}

TrainedModel model_from_json(const Json& doc) {
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw ConfigError(fmt::format("unsupported model schema_version {} (expected {})", version,
                                    kModelSchemaVersion));
    }
    const ModelKind kind = model_kind_from_string(doc.at("kind").get<std::string>());
    const Json params = resolve_params(kind, doc.at("params"));
    auto names = doc.at("feature_names").get<std::vector<std::string>>();
    const std::size_t d = names.size();

    ScalerParams scaler;
    scaler.kind = scaler_kind_from_string(doc.at("scaler").at("kind").get<std::string>());
    for (const auto& c : doc.at("scaler").at("columns")) {
      scaler.columns.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    }

    const Json& body = doc.at("model");
    auto read_trees = [&](const Json& arr, const TreeConfig& config) {
      std::vector<DecisionTreeModel> trees;
      for (const auto& t : arr) trees.push_back(tree_from_json(t, config, d));
      return trees;
    };
    Classifier classifier = [&]() -> Classifier {
      switch (kind) {
        case ModelKind::decision_tree: return tree_from_json(body.at("tree"), tree_config_from_params(params), d);
        case ModelKind::random_forest:
          return ForestModel(read_trees(body.at("members"), tree_config_from_params(params)));
        case ModelKind::gradient_boosting: {
          TreeConfig config;
          config.max_depth = params.at("max_depth").get<std::size_t>();
          return GradientBoostModel(body.at("base_score").get<double>(), body.at("learning_rate").get<double>(),
                                    read_trees(body.at("trees"), config), d);
        }
        case ModelKind::adaboost: {
          TreeConfig config;
          config.max_depth = params.at("base_depth").get<std::size_t>();
          return AdaBoostModel(read_trees(body.at("members"), config), d);
        }
        case ModelKind::knn: return KnnModel(table_from_json(body.at("training")), knn_config_from_params(params));
        case ModelKind::majority: {
          const auto prior = body.at("prior").get<std::vector<double>>();
          if (prior.size() != 2) throw ConfigError("majority prior must have two entries");
          return MajorityModel({prior[0], prior[1]}, d);
        }
      }
      throw ConfigError("unknown model kind");
    }();
    return TrainedModel(kind, params, std::move(scaler), std::move(classifier), std::move(names));
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("malformed model document: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("malformed model document: {}", e.what()));
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write model file '{}'", path.string()));
  out << model_to_json(model).dump() << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open model file '{}'", path.string()));
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("model file '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return model_from_json(doc);
}

}  // namespace iotids
