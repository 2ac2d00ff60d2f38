#include "iotids/report.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace iotids {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Plot geometry: a 400x400 unit square offset by the margins.
constexpr double kLeft = 60.0;
constexpr double kTop = 40.0;
constexpr double kSize = 400.0;

double px(double fpr) { return kLeft + fpr * kSize; }
double py(double tpr) { return kTop + (1.0 - tpr) * kSize; }

}  // namespace

std::string render_roc_svg(const RocCurve& curve, const std::string& title) {
  std::string svg;
  auto out = std::back_inserter(svg);
  fmt::format_to(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:g}\" height=\"{:g}\" "
                 "viewBox=\"0 0 {:g} {:g}\">\n",
                 kLeft + kSize + 30.0, kTop + kSize + 60.0, kLeft + kSize + 30.0, kTop + kSize + 60.0);
  fmt::format_to(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::format_to(out, "<text x=\"{:g}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                      "font-size=\"16\">{}</text>\n",
                 kLeft + kSize / 2.0, xml_escape(title));
  fmt::format_to(out, "<rect x=\"{:g}\" y=\"{:g}\" width=\"{:g}\" height=\"{:g}\" fill=\"none\" stroke=\"black\"/>\n",
                 kLeft, kTop, kSize, kSize);
  for (int i = 0; i <= 10; i += 2) {
    const double v = i / 10.0;
    fmt::format_to(out, "<text x=\"{:g}\" y=\"{:g}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                        "font-size=\"11\">{:.1f}</text>\n",
                   px(v), kTop + kSize + 16.0, v);
    fmt::format_to(out, "<text x=\"{:g}\" y=\"{:g}\" text-anchor=\"end\" font-family=\"sans-serif\" "
                        "font-size=\"11\">{:.1f}</text>\n",
                   kLeft - 6.0, py(v) + 4.0, v);
  }
  fmt::format_to(out, "<text x=\"{:g}\" y=\"{:g}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                      "font-size=\"13\">False positive rate</text>\n",
                 kLeft + kSize / 2.0, kTop + kSize + 36.0);
  fmt::format_to(out, "<text x=\"16\" y=\"{:g}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
                      "transform=\"rotate(-90 16 {:g})\">True positive rate</text>\n",
                 kTop + kSize / 2.0, kTop + kSize / 2.0);
  fmt::format_to(out, "<line class=\"chance\" x1=\"{:g}\" y1=\"{:g}\" x2=\"{:g}\" y2=\"{:g}\" stroke=\"gray\" "
                      "stroke-dasharray=\"6,4\"/>\n",
                 px(0.0), py(0.0), px(1.0), py(1.0));
  std::string points;
  for (const auto& p : curve.points) {
    if (!points.empty()) points += ' ';
    points += fmt::format("{:g},{:g}", px(p.fpr), py(p.tpr));
  }
  fmt::format_to(out, "<polyline class=\"roc\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"{}\"/>\n",
                 points);
  fmt::format_to(out, "<text class=\"auc\" x=\"{:g}\" y=\"{:g}\" text-anchor=\"end\" font-family=\"sans-serif\" "
                      "font-size=\"14\">AUC = {:.2f}</text>\n",
                 kLeft + kSize - 10.0, kTop + kSize - 12.0, curve.auc);
  svg += "</svg>\n";
  return svg;
}

std::string roc_to_csv(const RocCurve& curve) {
  std::string csv = "fpr,tpr\n";
  for (const auto& p : curve.points) csv += fmt::format("{},{}\n", p.fpr, p.tpr);
  return csv;
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
  return fmt::format("actual,predicted_0,predicted_1\n0,{},{}\n1,{},{}\n", cm.tn, cm.fp, cm.fn, cm.tp);
}

ComparisonTable summarize_comparison(std::span<const ComparisonInput> inputs) {
  ComparisonTable table;
  std::vector<const ComparisonInput*> order;
  for (const auto& in : inputs) order.push_back(&in);
  std::stable_sort(order.begin(), order.end(), [](const ComparisonInput* a, const ComparisonInput* b) {
    return a->metrics.accuracy > b->metrics.accuracy;
  });
  for (const ComparisonInput* in : order) {
    ComparisonRow row;
    row.model = in->model;
    row.accuracy_percent = round_to(in->metrics.accuracy * 100.0, 2);
    if (in->auc) row.auc = round_to(*in->auc, 3);
    row.precision = round_to(in->metrics.precision, 3);
    row.recall = round_to(in->metrics.recall, 3);
    row.f1 = round_to(in->metrics.f1, 3);
    table.rows.push_back(row);
  }
  return table;
}

std::string ComparisonTable::to_text() const {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.model.size());
  std::string text = fmt::format("{:<{}}  {:>10}  {:>6}  {:>9}  {:>6}  {:>6}\n", "model", width, "accuracy %",
                                 "AUC", "precision", "recall", "F1");
  for (const auto& r : rows) {
    const std::string auc = r.auc ? fmt::format("{:.3f}", *r.auc) : "n/a";
    text += fmt::format("{:<{}}  {:>10.2f}  {:>6}  {:>9.3f}  {:>6.3f}  {:>6.3f}\n", r.model, width,
                        r.accuracy_percent, auc, r.precision, r.recall, r.f1);
  }
  return text;
}

Json ComparisonTable::to_json() const {
  Json arr = Json::array();
  for (const auto& r : rows) {
    arr.push_back({{"model", r.model},
                   {"accuracy_percent", r.accuracy_percent},
                   {"auc", r.auc ? Json(*r.auc) : Json(nullptr)},
                   {"precision", r.precision},
                   {"recall", r.recall},
                   {"f1", r.f1}});
  }
  return arr;
}

}  // namespace iotids
