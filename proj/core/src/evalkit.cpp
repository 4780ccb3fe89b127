#include "pragex/evalkit.hpp"

#include <map>
#include <sstream>

#include "pragex/error.hpp"

namespace pragex {

Confusion confusion(std::span<const double> scores, std::span<const ALLabel> labels, double threshold) {
  if (scores.size() != labels.size()) throw Error(Errc::InvalidConfig, "scores/labels length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == ALLabel::Discard) {
      ++c.discarded;
      continue;
    }
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == ALLabel::True;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

MetricsRow metrics(const Confusion& c, std::string checkpoint, std::string language) {
  MetricsRow row;
  row.checkpoint = std::move(checkpoint);
  row.language = std::move(language);
  row.n_test = c.total();
  row.n_discarded = c.discarded;
  row.accuracy = ratio(c.tp + c.tn, c.total());
  row.precision = ratio(c.tp, c.tp + c.fp);
  row.recall = ratio(c.tp, c.tp + c.fn);
  const double pr = row.precision + row.recall;
  row.f1 = pr == 0.0 ? 0.0 : 2.0 * row.precision * row.recall / pr;
  return row;
}

std::vector<MetricsRow> cross_lingual_eval(const BinaryClassifier& model, const std::string& checkpoint,
                                           std::span<const TestSet> tests, double threshold) {
  std::vector<MetricsRow> rows;
  for (const auto& t : tests) {
    if (t.inputs.empty()) throw Error(Errc::EmptyTestSet, "test set for '" + t.language + "' is empty");
    if (t.inputs.size() != t.labels.size()) throw Error(Errc::InvalidConfig, "test set '" + t.language + "' label count mismatch");
    std::vector<double> p;
    for (const auto& s : model.predict(t.inputs)) p.push_back(s.p_positive);
    rows.push_back(metrics(confusion(p, t.labels, threshold), checkpoint, t.language));
  }
  return rows;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "checkpoint,language,accuracy,precision,recall,f1,n_test,n_discarded\n";
  for (const auto& r : rows)
    out << r.checkpoint << ',' << r.language << ',' << r.accuracy << ',' << r.precision << ',' << r.recall << ','
        << r.f1 << ',' << r.n_test << ',' << r.n_discarded << '\n';
  return out.str();
}

nlohmann::ordered_json metrics_to_json(const MetricsRow& r) {
  return {{"checkpoint", r.checkpoint}, {"language", r.language}, {"accuracy", r.accuracy},
          {"precision", r.precision},   {"recall", r.recall},     {"f1", r.f1},
          {"n_test", r.n_test},         {"n_discarded", r.n_discarded}};
}

MetricsRow metrics_from_json(const nlohmann::ordered_json& j) {
  MetricsRow r;
  r.checkpoint = j.at("checkpoint").get<std::string>();
  r.language = j.at("language").get<std::string>();
  r.accuracy = j.at("accuracy").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.n_test = j.at("n_test").get<std::size_t>();
  r.n_discarded = j.at("n_discarded").get<std::size_t>();
  return r;
}

nlohmann::ordered_json metrics_json(std::span<const MetricsRow> rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows) out.push_back(metrics_to_json(r));
  return out;
}

std::vector<CurvePoint> learning_curve(std::span<const MetricsRow> rows) {
  std::vector<CurvePoint> out;
  std::map<std::string, const MetricsRow*> previous;
  for (const auto& r : rows) {
    CurvePoint p{r};
    if (auto it = previous.find(r.language); it != previous.end()) {
      p.d_accuracy = r.accuracy - it->second->accuracy;
      p.d_precision = r.precision - it->second->precision;
      p.d_recall = r.recall - it->second->recall;
      p.d_f1 = r.f1 - it->second->f1;
    }
    previous[r.language] = &r;
    out.push_back(std::move(p));
  }
  return out;
}

std::string learning_curve_csv(std::span<const CurvePoint> curve) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "checkpoint,language,accuracy,precision,recall,f1,n_test,d_accuracy,d_precision,d_recall,d_f1\n";
  for (const auto& p : curve)
    out << p.row.checkpoint << ',' << p.row.language << ',' << p.row.accuracy << ',' << p.row.precision << ','
        << p.row.recall << ',' << p.row.f1 << ',' << p.row.n_test << ',' << p.d_accuracy << ',' << p.d_precision
        << ',' << p.d_recall << ',' << p.d_f1 << '\n';
  return out.str();
}

}  // namespace pragex
