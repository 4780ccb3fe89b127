#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pragex/corpus.hpp"
#include "pragex/models.hpp"
#include "pragex/rng.hpp"
#include "test_support.hpp"

namespace pragex {
namespace {

using testing::errc_of;

TEST(Pack, JoinsWithSeparator) {
  const auto p = pack_texts("id", "a b", "c");
  EXPECT_EQ(p.text, "a b ⟐SEP⟐ c");
  EXPECT_EQ(p.pair_id, "id");
  EXPECT_EQ(pack_texts("id", "x", "y", "||").text, "x || y");
}

TEST(Pack, RejectsCollisionsAndEmptySides) {
  EXPECT_EQ(errc_of([] { pack_texts("id", "a ⟐SEP⟐ b", "c"); }), Errc::SeparatorCollision);
  EXPECT_EQ(errc_of([] { pack_texts("id", "a", "c⟐SEP⟐"); }), Errc::SeparatorCollision);
  EXPECT_EQ(errc_of([] { pack_texts("id", "a", ""); }), Errc::EmptyText);
  EXPECT_EQ(errc_of([] { pack_texts("id", "", "b"); }), Errc::EmptyText);
}

TEST(UnitTokens, RecognizesUnitsWithNumbersAndPlurals) {
  for (const char* t : {"mile", "miles", "Feet", "1.6km", "km", "lbs", "lb.", "degrees", "m", "10kg", "knots"})
    EXPECT_TRUE(is_unit_token(t)) << t;
  for (const char* t : {"1,6", "", "mm", "Meile", "s", "(", "pounding"}) EXPECT_FALSE(is_unit_token(t)) << t;
}

SentencePair pair_of(const std::string& src, const std::string& tgt) {
  SentencePair p;
  p.id = "ted-en2de-000001";
  p.src_lang = "en";
  p.tgt_lang = "de";
  p.src_text = src;
  p.tgt_text = tgt;
  p.src_tokens = tokenize(src);
  p.tgt_tokens = tokenize(tgt);
  return p;
}

// Every value below is counted by hand from the sentence pair.
TEST(Featurize, MeasurementConversionExample) {
  LexiconTagger tagger;
  tagger.add("en", "mile", "NOUN");
  tagger.add("de", "km", "NOUN");
  tagger.add("de", "Meile", "NOUN");
  // src: It is 1 mile long .           (6 tokens)
  // tgt: Es ist 1 Meile ( 1,6 km ) lang .  (10 tokens)
  const auto p = pair_of("It is 1 mile long.", "Es ist 1 Meile (1,6 km) lang.");
  ASSERT_EQ(p.tgt_tokens.size(), 10u);
  const AlignmentSet al{p.id, {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 8}, {5, 9}}, AlignerTool::A};
  const auto f = featurize(p, al, tagger);
  EXPECT_EQ(f[Feature::NullTokens], 4);  // ( 1,6 km )
  EXPECT_DOUBLE_EQ(f[Feature::FracNull], 0.4);
  EXPECT_EQ(f[Feature::NullNouns], 1);  // km
  EXPECT_EQ(f[Feature::NullPropns], 0);
  EXPECT_EQ(f[Feature::NullProns], 0);
  EXPECT_EQ(f[Feature::HasNeSrc], 0);
  EXPECT_EQ(f[Feature::HasNeTgt], 0);
  EXPECT_DOUBLE_EQ(f[Feature::LengthRatio], 10.0 / 6.0);
  EXPECT_EQ(f[Feature::ParenthesisInTarget], 1);
  EXPECT_EQ(f[Feature::BracketAddition], 1);
  EXPECT_EQ(f[Feature::DigitTokenDelta], 1);  // {1, 1,6} vs {1}
  EXPECT_EQ(f[Feature::UnitLexiconHits], 1);
}

TEST(Featurize, EntityDescriptionExample) {
  LexiconTagger tagger;
  tagger.add("en", "Merkel", "PROPN", "PERSON");
  tagger.add("de", "Merkel", "PROPN", "PERSON");
  tagger.add("de", "Bundeskanzlerin", "NOUN");
  tagger.add("de", "sie", "PRON");
  // 10 target tokens, two unaligned: Bundeskanzlerin and sie.
  const auto p = pair_of("Merkel said it was a good day for all", "Bundeskanzlerin Merkel sagte sie sei ein guter Tag für alle");
  std::set<Link> links{{0, 1}, {1, 2}};
  for (std::size_t s = 3; s < 9; ++s) links.insert({s, s + 1});
  const auto f = featurize(p, {p.id, links, AlignerTool::A}, tagger);
  EXPECT_EQ(f[Feature::NullTokens], 2);
  EXPECT_DOUBLE_EQ(f[Feature::FracNull], 0.2);
  EXPECT_EQ(f[Feature::NullNouns], 1);
  EXPECT_EQ(f[Feature::NullProns], 1);
  EXPECT_EQ(f[Feature::HasNeSrc], 1);
  EXPECT_EQ(f[Feature::HasNeTgt], 1);
  EXPECT_DOUBLE_EQ(f[Feature::LengthRatio], 10.0 / 9.0);
  EXPECT_EQ(f[Feature::ParenthesisInTarget], 0);
  EXPECT_EQ(f[Feature::DigitTokenDelta], 0);
}

TEST(Featurize, JsonRoundTripKeepsNames) {
  FeatureVector f;
  for (std::size_t i = 0; i < kFeatureCount; ++i) f.values[i] = 0.5 * i;
  const auto j = features_to_json(f);
  EXPECT_EQ(j.begin().key(), "n_null_tokens");
  EXPECT_EQ(features_from_json(j), f);
}

// Independent evaluation of the training objective.
double oracle_loss(const LogisticModel& m, const DenseMatrix& x, const std::vector<ALLabel>& y, double l2) {
  double loss = 0.0, total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (y[r] == ALLabel::Discard) continue;
    double s = m.bias;
    for (std::size_t c = 0; c < x.cols(); ++c) s += m.weights[c] * (x(r, c) - m.mean[c]) / m.scale[c];
    const bool pos = y[r] == ALLabel::True;
    const double w = pos ? m.positive_weight : 1.0;
    loss += w * std::log1p(std::exp(pos ? -s : s));
    total += w;
  }
  double reg = 0.0;
  for (double v : m.weights) reg += v * v;
  return loss / total + 0.5 * l2 * reg;
}

struct Toy {
  DenseMatrix x;
  std::vector<ALLabel> y;
};

// Ten points separable on the first coordinate, 3 positives.
Toy separable_toy() {
  Toy t{DenseMatrix(0, 2), {}};
  const double pts[10][2] = {{2.0, 0.3}, {2.5, -1.0}, {3.0, 0.1}, {-1.0, 0.2}, {-1.5, 0.9},
                             {-0.5, -0.4}, {-2.0, 0.0}, {-1.2, 1.1}, {-0.8, -0.7}, {-2.2, 0.5}};
  for (int i = 0; i < 10; ++i) {
    t.x.append_row(pts[i]);
    t.y.push_back(i < 3 ? ALLabel::True : ALLabel::False);
  }
  return t;
}

TEST(BaselineFit, SeparableToyReachesPerfectAccuracy) {
  const auto t = separable_toy();
  const auto m = baseline_fit(t.x, t.y, {});
  const auto p = baseline_predict(m, t.x);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i] >= 0.5, t.y[i] == ALLabel::True) << i;
  EXPECT_GT(m.raw_weight(0), 0.0);
  EXPECT_DOUBLE_EQ(m.positive_weight, 7.0 / 3.0);
  EXPECT_NEAR(m.epoch_loss.back(), oracle_loss(m, t.x, t.y, BaselineConfig{}.l2), 1e-12);
}

TEST(BaselineFit, LossIsNonIncreasingPerEpoch) {
  std::mt19937 gen(3);
  std::normal_distribution<double> nd;
  DenseMatrix x(0, 5);
  std::vector<ALLabel> y;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> row(5);
    for (auto& v : row) v = nd(gen);
    x.append_row(row);
    y.push_back(row[0] + 0.5 * row[1] + nd(gen) > 0.8 ? ALLabel::True : ALLabel::False);
  }
  BaselineConfig cfg;
  cfg.epochs = 20;
  const auto m = baseline_fit(x, y, cfg);
  ASSERT_EQ(m.epoch_loss.size(), 21u);
  for (std::size_t e = 1; e < m.epoch_loss.size(); ++e) EXPECT_LE(m.epoch_loss[e], m.epoch_loss[e - 1] + 1e-15) << e;
  EXPECT_LT(m.epoch_loss.back(), m.epoch_loss.front());
}

TEST(BaselineFit, ConstantFeaturesGiveEqualScores) {
  DenseMatrix x(6, 3);
  const std::vector<ALLabel> y = {ALLabel::True, ALLabel::False, ALLabel::False,
                                  ALLabel::True, ALLabel::False, ALLabel::Discard};
  const auto p = baseline_predict(baseline_fit(x, y, {}), x);
  for (double v : p) EXPECT_DOUBLE_EQ(v, p[0]);
}

TEST(BaselineFit, DuplicatingTheDataLeavesTheModelUnchanged) {
  const auto t = separable_toy();
  Toy twice{DenseMatrix(0, 2), {}};
  for (int rep = 0; rep < 2; ++rep)
    for (std::size_t r = 0; r < t.x.rows(); ++r) {
      twice.x.append_row(t.x.row(r));
      twice.y.push_back(t.y[r]);
    }
  const auto a = baseline_fit(t.x, t.y, {});
  const auto b = baseline_fit(twice.x, twice.y, {});
  ASSERT_EQ(a.weights.size(), b.weights.size());
  for (std::size_t c = 0; c < a.weights.size(); ++c) EXPECT_NEAR(a.weights[c], b.weights[c], 1e-9);
  EXPECT_NEAR(a.bias, b.bias, 1e-9);
}

TEST(BaselineFit, DiscardRowsAreIgnored) {
  auto t = separable_toy();
  const auto clean = baseline_fit(t.x, t.y, {});
  const double junk[2] = {100.0, -100.0};
  t.x.append_row(junk);
  t.y.push_back(ALLabel::Discard);
  EXPECT_EQ(baseline_fit(t.x, t.y, {}), clean);
}

TEST(BaselineFit, SingleClassIsDegenerate) {
  DenseMatrix x(3, 2);
  const std::vector<ALLabel> y(3, ALLabel::True);
  EXPECT_EQ(errc_of([&] { baseline_fit(x, y, {}); }), Errc::DegenerateLabels);
  const std::vector<ALLabel> d = {ALLabel::True, ALLabel::Discard, ALLabel::Discard};
  EXPECT_EQ(errc_of([&] { baseline_fit(x, d, {}); }), Errc::DegenerateLabels);
}

TEST(BaselineFit, PositiveWeightIsCapped) {
  DenseMatrix x(0, 1);
  std::vector<ALLabel> y;
  for (int i = 0; i < 50; ++i) {
    const double v = i;
    x.append_row(std::span<const double>(&v, 1));
    y.push_back(i == 49 ? ALLabel::True : ALLabel::False);
  }
  EXPECT_DOUBLE_EQ(baseline_fit(x, y, {}).positive_weight, 10.0);
}

std::vector<LabeledInput> labeled_toy() {
  const auto t = separable_toy();
  std::vector<LabeledInput> out;
  for (std::size_t r = 0; r < t.x.rows(); ++r) {
    LabeledInput li;
    li.input.packed = pack_texts("id" + std::to_string(r), "s", "t");
    li.input.features[Feature::NullTokens] = t.x(r, 0);
    li.input.features[Feature::FracNull] = t.x(r, 1);
    li.label = t.y[r];
    out.push_back(li);
  }
  return out;
}

TEST(BaselineClassifier, SnapshotRestoreGivesIdenticalPredictions) {
  const auto data = labeled_toy();
  BaselineClassifier a;
  EXPECT_FALSE(a.trained());
  a.fit(data, 5, 17);
  std::vector<ModelInput> inputs;
  for (const auto& d : data) inputs.push_back(d.input);
  BaselineClassifier b;
  b.restore(nlohmann::ordered_json::parse(a.snapshot().dump()));
  ASSERT_TRUE(b.trained());
  const auto pa = a.predict(inputs), pb = b.predict(inputs);
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].p_positive, pb[i].p_positive);
}

TEST(BaselineClassifier, SeedControlsInitialWeights) {
  const auto data = labeled_toy();
  BaselineClassifier a, b, c;
  a.fit(data, 0, 1);
  b.fit(data, 0, 1);
  c.fit(data, 0, 2);
  EXPECT_EQ(a.model(), b.model());
  EXPECT_NE(a.model().weights, c.model().weights);
  EXPECT_EQ(errc_of([] {
              BaselineClassifier u;
              u.predict({});
            }),
            Errc::InvalidState);
}

TEST(HashingEmbedder, UnitNormAndDeterministic) {
  const HashingEmbedder e(64);
  const auto a = e.embed(pack_texts("a", "the house", "das Haus"));
  ASSERT_EQ(a.size(), 64u);
  EXPECT_NEAR(dot(a, a), 1.0, 1e-12);
  EXPECT_EQ(a, HashingEmbedder(64).embed(pack_texts("other-id", "the house", "das Haus")));
}

TEST(HashingEmbedder, SidesHashIntoDifferentSpaces) {
  const HashingEmbedder e(128);
  const auto ab = e.embed(pack_texts("x", "alpha", "beta"));
  const auto ba = e.embed(pack_texts("x", "beta", "alpha"));
  EXPECT_LT(cosine_similarity(ab, ba), 0.999);
  const auto near = e.embed(pack_texts("x", "alpha", "beta gamma"));
  EXPECT_GT(cosine_similarity(ab, near), cosine_similarity(ab, ba));
}

TEST(EmbedAll, OneRowPerInstance) {
  const HashingEmbedder e(16);
  const std::vector<PackedInstance> in = {pack_texts("a", "x", "y"), pack_texts("b", "z", "w")};
  const auto m = embed_all(e, in);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 16u);
  EXPECT_EQ(std::vector<double>(m.row(1).begin(), m.row(1).end()), e.embed(in[1]));
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(fnv1a("a", 1), fnv1a("a"));
}

}  // namespace
}  // namespace pragex
