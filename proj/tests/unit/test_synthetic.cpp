#include <gtest/gtest.h>

#include "pragex/extraction.hpp"
#include "pragex/synthetic.hpp"
#include "test_support.hpp"

namespace pragex {
namespace {

using testing::errc_of;

SyntheticConfig small(std::uint64_t seed) {
  SyntheticConfig c;
  c.seed = seed;
  c.pool_size = 600;
  c.annotated_size = 400;
  return c;
}

// Independent statement of the hidden rule: walk the target left to right,
// cut maximal runs of unaligned tokens, and look for a bracket next to a
// unit or an allowed entity inside one run.
bool rule_by_scan(const Instance& inst) {
  const auto& toks = inst.pair.tgt_tokens;
  std::vector<bool> aligned(toks.size(), false);
  for (const auto& l : inst.alignment.links) aligned[l.tgt] = true;
  const auto ents = synthetic_tagger().ner(toks, inst.pair.tgt_lang);
  std::size_t i = 0;
  while (i < toks.size()) {
    if (aligned[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < toks.size() && !aligned[j]) ++j;
    bool bracket = false, unit = false, entity = false;
    for (std::size_t k = i; k < j; ++k) {
      bracket |= toks[k] == "(" || toks[k] == ")";
      unit |= is_unit_token(toks[k]);
    }
    for (const auto& e : ents) entity |= is_allowed_ne_label(e.label) && e.start >= i && e.end <= j;
    if (bracket && (unit || entity)) return true;
    i = j;
  }
  return false;
}

TEST(Synthetic, ShapeAndIds) {
  const auto d = generate_synthetic(small(1));
  EXPECT_EQ(d.instances.size(), 1000u);
  EXPECT_EQ(d.annotated.size(), 400u);
  EXPECT_EQ(d.pool_ids.size(), 600u);
  EXPECT_EQ(d.annotated.front().id, d.instances.front().pair.id);
  EXPECT_EQ(d.pool_ids.front(), d.instances[400].pair.id);
  EXPECT_EQ(corpus_key(d.pool_ids.front()).lang_pair, "en-de");
}

TEST(Synthetic, DeterministicPerSeed) {
  const auto a = generate_synthetic(small(3));
  const auto b = generate_synthetic(small(3));
  EXPECT_EQ(a.instances, b.instances);
  EXPECT_EQ(a.annotated, b.annotated);
  EXPECT_NE(generate_synthetic(small(4)).instances, a.instances);
}

TEST(Synthetic, GoldRecordsAreValidAndAgreeWithTheRule) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto d = generate_synthetic(small(seed));
    for (std::size_t i = 0; i < d.annotated.size(); ++i) {
      const auto& gold = d.annotated[i];
      ASSERT_TRUE(validate(gold).empty()) << gold.id << ": " << format_violations(validate(gold));
      EXPECT_EQ(gold.dataset, Dataset::EXTR);
      EXPECT_EQ(gold.al_label == ALLabel::True, rule_by_scan(d.instances[i])) << gold.id;
    }
    for (std::size_t i = 400; i < d.instances.size(); ++i)
      EXPECT_EQ(synthetic_rule(d.instances[i]), rule_by_scan(d.instances[i])) << d.instances[i].pair.id;
  }
}

// Aligner noise can flip a planted label, so the realized positive share is
// checked against the planted rate with a tolerance.
TEST(Synthetic, PositiveShareTracksTheConfiguredRate) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticConfig c;
    c.seed = seed;
    const auto d = generate_synthetic(c);
    const auto pos = std::count_if(d.annotated.begin(), d.annotated.end(), [](auto& r) { return r.al_label == ALLabel::True; });
    EXPECT_GE(pos, 33) << "seed " << seed;
    EXPECT_NEAR(pos / 400.0, c.annotated_positive_rate, 0.03) << "seed " << seed;
    std::size_t pool_pos = 0;
    for (std::size_t i = 400; i < d.instances.size(); ++i) pool_pos += synthetic_rule(d.instances[i]);
    EXPECT_NEAR(pool_pos / 5000.0, c.pool_positive_rate, 0.01) << "seed " << seed;
  }
}

TEST(Synthetic, OracleMarksQualifyingSpans) {
  const auto d = generate_synthetic(small(2));
  for (const auto& inst : d.instances) {
    const auto r = synthetic_oracle(inst);
    if (r.al_label != ALLabel::True) {
      EXPECT_TRUE(r.spans.empty());
      continue;
    }
    for (const auto& s : r.spans) {
      bool bracket = false;
      for (auto k = s.target.start; k < s.target.end; ++k)
        bracket |= inst.pair.tgt_tokens[k] == "(" || inst.pair.tgt_tokens[k] == ")";
      EXPECT_TRUE(bracket) << inst.pair.id;
      EXPECT_FALSE(s.types.empty());
    }
  }
}

TEST(Synthetic, RejectsBadRates) {
  auto c = small(1);
  c.pool_positive_rate = 1.5;
  EXPECT_EQ(errc_of([&] { generate_synthetic(c); }), Errc::InvalidConfig);
}

}  // namespace
}  // namespace pragex
