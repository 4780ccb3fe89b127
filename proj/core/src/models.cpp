#include "pragex/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "pragex/error.hpp"
#include "pragex/extraction.hpp"
#include "pragex/rng.hpp"

namespace pragex {

PackedInstance pack_texts(std::string_view pair_id, std::string_view source, std::string_view target,
                          std::string_view separator) {
  if (separator.empty()) throw Error(Errc::InvalidConfig, "empty separator");
  if (source.empty()) throw Error(Errc::EmptyText, std::string(pair_id) + ": empty source");
  if (target.empty()) throw Error(Errc::EmptyText, std::string(pair_id) + ": empty target");
  if (source.find(separator) != std::string_view::npos || target.find(separator) != std::string_view::npos)
    throw Error(Errc::SeparatorCollision, std::string(pair_id) + ": text contains the separator");
  std::string text;
  text.reserve(source.size() + separator.size() + target.size() + 2);
  text.append(source).append(" ").append(separator).append(" ").append(target);
  return {std::string(pair_id), std::move(text)};
}

PackedInstance pack(const SentencePair& pair, std::string_view separator) {
  return pack_texts(pair.id, pair.src_text, pair.tgt_text, separator);
}

const std::array<std::string_view, kFeatureCount>& FeatureVector::names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "n_null_tokens",      "frac_null",          "n_null_nouns",
      "n_null_propns",      "n_null_prons",       "has_allowed_ne_src",
      "has_allowed_ne_tgt", "length_ratio",       "has_parenthesis_in_target",
      "has_bracket_addition", "digit_token_count_delta", "unit_lexicon_hits",
  };
  return names;
}

nlohmann::ordered_json features_to_json(const FeatureVector& f) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) j[std::string(FeatureVector::names()[i])] = f.values[i];
  return j;
}

FeatureVector features_from_json(const nlohmann::ordered_json& j) {
  FeatureVector f;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const std::string name(FeatureVector::names()[i]);
    if (!j.contains(name)) throw Error(Errc::SchemaViolation, "missing feature " + name);
    f.values[i] = j.at(name).get<double>();
  }
  return f;
}

bool is_unit_token(std::string_view token) {
  std::string t;
  for (unsigned char c : token) t.push_back(static_cast<char>(std::tolower(c)));
  std::size_t i = 0;
  while (i < t.size() && (std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.' || t[i] == ',')) ++i;
  std::string_view core = std::string_view(t).substr(i);
  if (core.ends_with(".")) core.remove_suffix(1);
  static const std::array<std::string_view, 9> units = {"mile", "feet", "lb", "pound", "degree", "knot", "km", "kg", "m"};
  auto known = [](std::string_view w) { return std::find(units.begin(), units.end(), w) != units.end(); };
  if (core.empty()) return false;
  if (known(core)) return true;
  return core.size() > 1 && core.back() == 's' && known(core.substr(0, core.size() - 1));
}

namespace {

bool has_digit(std::string_view t) {
  return std::any_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool is_bracket(std::string_view t) { return t == "(" || t == ")" || t == "[" || t == "]"; }

}  // namespace

FeatureVector featurize(const SentencePair& pair, const AlignmentSet& alignment, const Tagger& tagger) {
  check_alignment_bounds(pair, alignment);
  std::vector<std::string> tgt_pos;
  std::vector<NamedEntity> src_ents, tgt_ents;
  try {
    tgt_pos = tagger.pos(pair.tgt_tokens, pair.tgt_lang);
    src_ents = tagger.ner(pair.src_tokens, pair.src_lang);
    tgt_ents = tagger.ner(pair.tgt_tokens, pair.tgt_lang);
  } catch (const std::exception& e) {
    throw Error(Errc::TaggerFailure, pair.id + ": " + e.what());
  }
  if (tgt_pos.size() != pair.tgt_tokens.size()) throw Error(Errc::TaggerFailure, pair.id + ": POS length mismatch");

  FeatureVector f;
  const auto nulls = null_target_indices(pair, alignment);
  const double n_tgt = static_cast<double>(pair.tgt_tokens.size());
  const double n_src = static_cast<double>(pair.src_tokens.size());
  f[Feature::NullTokens] = static_cast<double>(nulls.size());
  f[Feature::FracNull] = n_tgt > 0 ? nulls.size() / n_tgt : 0.0;
  for (auto i : nulls) {
    const auto& tok = pair.tgt_tokens[i];
    if (has_alnum(tok)) {
      if (tgt_pos[i] == "NOUN") f[Feature::NullNouns] += 1;
      else if (tgt_pos[i] == "PROPN") f[Feature::NullPropns] += 1;
      else if (tgt_pos[i] == "PRON") f[Feature::NullProns] += 1;
    }
    if (is_bracket(tok)) f[Feature::BracketAddition] = 1;
    if (is_unit_token(tok)) f[Feature::UnitLexiconHits] += 1;
  }
  auto any_allowed = [](const std::vector<NamedEntity>& ents) {
    return std::any_of(ents.begin(), ents.end(), [](const NamedEntity& e) { return is_allowed_ne_label(e.label); });
  };
  f[Feature::HasNeSrc] = any_allowed(src_ents) ? 1 : 0;
  f[Feature::HasNeTgt] = any_allowed(tgt_ents) ? 1 : 0;
  f[Feature::LengthRatio] = n_src > 0 ? n_tgt / n_src : n_tgt;
  f[Feature::ParenthesisInTarget] =
      std::any_of(pair.tgt_tokens.begin(), pair.tgt_tokens.end(), [](const std::string& t) { return t == "(" || t == ")"; })
          ? 1
          : 0;
  const auto digits = [](const std::vector<std::string>& toks) {
    return static_cast<double>(std::count_if(toks.begin(), toks.end(), [](const std::string& t) { return has_digit(t); }));
  };
  f[Feature::DigitTokenDelta] = digits(pair.tgt_tokens) - digits(pair.src_tokens);
  return f;
}

nlohmann::ordered_json LogisticModel::to_json() const {
  return {
      {"weights", weights},     {"bias", bias},
      {"mean", mean},           {"scale", scale},
      {"positive_weight", positive_weight}, {"learning_rate", learning_rate},
      {"smoothness", smoothness}, {"epoch_loss", epoch_loss},
  };
}

LogisticModel LogisticModel::from_json(const nlohmann::ordered_json& j) {
  LogisticModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.mean = j.at("mean").get<std::vector<double>>();
  m.scale = j.at("scale").get<std::vector<double>>();
  m.positive_weight = j.at("positive_weight").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.smoothness = j.at("smoothness").get<double>();
  m.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
  return m;
}

namespace {

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// log(1 + exp(-m))
double softplus_neg(double m) { return std::log1p(std::exp(-std::abs(m))) + std::max(-m, 0.0); }

}  // namespace

LogisticModel baseline_fit(const DenseMatrix& features, std::span<const ALLabel> labels, const BaselineConfig& config) {
  if (labels.size() != features.rows()) throw Error(Errc::InvalidConfig, "features/labels row mismatch");
  if (config.epochs < 0 || config.steps_per_epoch < 1) throw Error(Errc::InvalidConfig, "bad epoch settings");

  std::vector<std::size_t> rows;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == ALLabel::Discard) continue;
    rows.push_back(i);
    (labels[i] == ALLabel::True ? n_pos : n_neg) += 1;
  }
  if (n_pos == 0 || n_neg == 0)
    throw Error(Errc::DegenerateLabels, std::to_string(n_pos) + " positives, " + std::to_string(n_neg) + " negatives");

  const std::size_t d = features.cols();
  const double n = static_cast<double>(rows.size());
  LogisticModel m;
  m.mean.assign(d, 0.0);
  m.scale.assign(d, 1.0);
  for (auto r : rows)
    for (std::size_t c = 0; c < d; ++c) m.mean[c] += features(r, c) / n;
  for (std::size_t c = 0; c < d; ++c) {
    double var = 0.0;
    for (auto r : rows) var += (features(r, c) - m.mean[c]) * (features(r, c) - m.mean[c]) / n;
    m.scale[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  DenseMatrix z(rows.size(), d);
  std::vector<double> y(rows.size()), w(rows.size());
  m.positive_weight = std::min(static_cast<double>(n_neg) / n_pos, config.max_positive_weight);
  double total_w = 0.0, curvature = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t c = 0; c < d; ++c) z(k, c) = (features(rows[k], c) - m.mean[c]) / m.scale[c];
    const bool pos = labels[rows[k]] == ALLabel::True;
    y[k] = pos ? 1.0 : -1.0;
    w[k] = pos ? m.positive_weight : 1.0;
    total_w += w[k];
    curvature += w[k] * (dot(z.row(k), z.row(k)) + 1.0);
  }
  m.smoothness = 0.25 * curvature / total_w + config.l2;
  m.learning_rate = config.lr > 0 ? config.lr : 1.0 / m.smoothness;

  Rng rng(config.seed);
  m.weights.resize(d);
  for (auto& v : m.weights) v = 0.01 * rng.normal();
  m.bias = 0.0;

  auto objective = [&] {
    double loss = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) loss += w[k] * softplus_neg(y[k] * (dot(m.weights, z.row(k)) + m.bias));
    return loss / total_w + 0.5 * config.l2 * dot(m.weights, m.weights);
  };

  std::vector<double> grad(d);
  m.epoch_loss.push_back(objective());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int step = 0; step < config.steps_per_epoch; ++step) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const double margin = y[k] * (dot(m.weights, z.row(k)) + m.bias);
        // d/ds log(1 + exp(-y s)) = -y * sigmoid(-y s)
        const double g = -y[k] * w[k] * sigmoid(-margin);
        auto zk = z.row(k);
        for (std::size_t c = 0; c < d; ++c) grad[c] += g * zk[c];
        grad_b += g;
      }
      for (std::size_t c = 0; c < d; ++c) m.weights[c] -= m.learning_rate * (grad[c] / total_w + config.l2 * m.weights[c]);
      m.bias -= m.learning_rate * grad_b / total_w;
    }
    m.epoch_loss.push_back(objective());
  }
  return m;
}

std::vector<double> baseline_predict(const LogisticModel& model, const DenseMatrix& features) {
  if (features.rows() > 0 && features.cols() != model.weights.size())
    throw Error(Errc::InvalidConfig, "feature width does not match model");
  std::vector<double> out(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    double s = model.bias;
    for (std::size_t c = 0; c < model.weights.size(); ++c)
      s += model.weights[c] * (features(r, c) - model.mean[c]) / model.scale[c];
    out[r] = std::clamp(sigmoid(s), 1e-15, 1.0 - 1e-15);
  }
  return out;
}

namespace {

DenseMatrix feature_matrix(std::span<const ModelInput> inputs) {
  DenseMatrix x(inputs.size(), kFeatureCount);
  for (std::size_t i = 0; i < inputs.size(); ++i)
    std::copy(inputs[i].features.values.begin(), inputs[i].features.values.end(), x.row(i).begin());
  return x;
}

}  // namespace

void BaselineClassifier::fit(std::span<const LabeledInput> data, int epochs, std::uint64_t seed) {
  DenseMatrix x(data.size(), kFeatureCount);
  std::vector<ALLabel> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::copy(data[i].input.features.values.begin(), data[i].input.features.values.end(), x.row(i).begin());
    labels[i] = data[i].label;
  }
  BaselineConfig cfg = config_;
  cfg.epochs = epochs;
  cfg.seed = seed;
  model_ = baseline_fit(x, labels, cfg);
}

std::vector<ClassifierScore> BaselineClassifier::predict(std::span<const ModelInput> inputs) const {
  if (!trained()) throw Error(Errc::InvalidState, "baseline classifier used before fit");
  std::vector<ClassifierScore> out;
  for (double p : baseline_predict(model_, feature_matrix(inputs))) out.push_back({p});
  return out;
}

nlohmann::ordered_json BaselineClassifier::snapshot() const {
  return {{"kind", kind()}, {"model", model_.to_json()}};
}

void BaselineClassifier::restore(const nlohmann::ordered_json& snapshot) {
  if (snapshot.at("kind").get<std::string>() != kind())
    throw Error(Errc::InvalidState, "snapshot is not a baseline model");
  model_ = LogisticModel::from_json(snapshot.at("model"));
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t salt) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (salt * 0x100000001b3ULL);
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> HashingEmbedder::embed(const PackedInstance& instance) const {
  std::vector<double> v(dimension_, 0.0);
  const auto cut = instance.text.find(separator_);
  std::string_view text = instance.text;
  std::array<std::string_view, 2> sides = {text, std::string_view()};
  if (cut != std::string::npos) sides = {text.substr(0, cut), text.substr(cut + separator_.size())};

  auto add = [&](std::string_view key, std::uint64_t salt, double weight) {
    const auto h = fnv1a(key, salt);
    v[h % dimension_] += (h >> 63) ? -weight : weight;
  };
  for (std::uint64_t side = 0; side < 2; ++side) {
    for (auto& tok : split_tokens(sides[side])) {
      std::string lower;
      for (unsigned char c : tok) lower.push_back(static_cast<char>(std::tolower(c)));
      add(lower, 1 + side, 1.0);
      const std::string padded = "#" + lower + "#";
      for (std::size_t i = 0; i + 3 <= padded.size(); ++i) add(std::string_view(padded).substr(i, 3), 11 + side, 0.5);
    }
  }
  const double norm = std::sqrt(dot(v, v));
  if (norm > 0)
    for (auto& x : v) x /= norm;
  return v;
}

DenseMatrix embed_all(const SentenceEmbedder& embedder, std::span<const PackedInstance> instances) {
  DenseMatrix out(instances.size(), embedder.dimension());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto e = embedder.embed(instances[i]);
    std::copy(e.begin(), e.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace pragex
