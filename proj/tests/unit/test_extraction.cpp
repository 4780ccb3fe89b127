#include <gtest/gtest.h>

#include <map>
#include <random>

#include "pragex/corpus.hpp"
#include "pragex/error.hpp"
#include "pragex/extraction.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace pragex {
namespace {

using testing::brute_force_nulls;

using testing::fixture;

SentencePair make_pair(const std::string& id, const std::string& src, const std::string& tgt) {
  SentencePair p;
  p.id = id;
  p.src_lang = "en";
  p.tgt_lang = "de";
  p.src_text = src;
  p.tgt_text = tgt;
  p.src_tokens = tokenize(src);
  p.tgt_tokens = tokenize(tgt);
  return p;
}

AlignmentSet links(const std::string& id, std::set<Link> l) { return {id, std::move(l), AlignerTool::A}; }

TEST(NullTargetIndices, Examples) {
  auto p = make_pair("p", "a b", "x y z");
  EXPECT_EQ(null_target_indices(p, links("p", {{0, 0}, {1, 2}})), (std::vector<std::size_t>{1}));
  EXPECT_EQ(null_target_indices(p, links("p", {})), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(NullTargetIndices, MatchesBruteForceScan) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t ns = 1 + gen() % 15, nt = 1 + gen() % 15;
    SentencePair p;
    p.id = "p";
    p.src_tokens.assign(ns, "s");
    p.tgt_tokens.assign(nt, "t");
    std::set<Link> l;
    const std::size_t n_links = gen() % (ns * nt + 1);
    for (std::size_t k = 0; k < n_links; ++k) l.insert({gen() % ns, gen() % nt});
    ASSERT_EQ(null_target_indices(p, links("p", l)), brute_force_nulls(nt, l)) << "trial " << trial;
  }
}

TEST(AdditionSpans, GroupsRuns) {
  auto p = make_pair("p", "a", "t0 t1 t2 t3 t4 t5");
  const std::vector<std::size_t> idx = {1, 2, 5};
  const auto spans = addition_spans(idx, p);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[0].start, 1u);
  EXPECT_EQ(spans[0].end, 3u);
  EXPECT_EQ(spans[0].tokens, (std::vector<std::string>{"t1", "t2"}));
  EXPECT_EQ(spans[1].start, 5u);
  EXPECT_EQ(spans[1].end, 6u);
  EXPECT_TRUE(addition_spans({}, p).empty());
}

// Property: flattening the spans gives back the index list, and spans are
// maximal (never adjacent).
TEST(AdditionSpans, FlattenEqualsInput) {
  std::mt19937 gen(5);
  auto p = make_pair("p", "a", "0 1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16 17 18 19");
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 20; ++i)
      if (gen() % 2) idx.push_back(i);
    const auto spans = addition_spans(idx, p);
    std::vector<std::size_t> flat;
    for (std::size_t s = 0; s < spans.size(); ++s) {
      if (s > 0) {
        EXPECT_GT(spans[s].start, spans[s - 1].end);
      }
      for (auto i = spans[s].start; i < spans[s].end; ++i) flat.push_back(i);
    }
    EXPECT_EQ(flat, idx);
  }
}

LexiconTagger small_tagger() {
  LexiconTagger t;
  t.add("en", "Merkel", "PROPN", "PERSON");
  t.add("de", "Merkel", "PROPN", "PERSON");
  t.add("de", "Bundeskanzlerin", "NOUN");
  t.add("de", "sagte", "VERB");
  t.add("en", "said", "VERB");
  t.add("en", "Monday", "PROPN", "DATE");
  t.add("de", "Montag", "PROPN", "DATE");
  t.add("de", "am", "ADP");
  return t;
}

TEST(FilterCandidate, NamedEntityAndUnalignedNoun) {
  const auto tagger = small_tagger();
  auto p = make_pair("p", "Merkel said", "Bundeskanzlerin Merkel sagte");
  const auto c = filter_candidate(p, links("p", {{0, 1}, {1, 2}}), tagger);
  ASSERT_TRUE(c);
  ASSERT_EQ(c->spans.size(), 1u);
  EXPECT_EQ(c->spans[0].tokens, (std::vector<std::string>{"Bundeskanzlerin"}));
  EXPECT_EQ(c->content_hits, (std::vector<std::size_t>{0}));
  ASSERT_EQ(c->ne_hits.size(), 2u);
  EXPECT_EQ(c->ne_hits[0].side, Side::Src);
  EXPECT_EQ(c->ne_hits[0].label, "PERSON");
  EXPECT_EQ(c->dataset, Dataset::EXTR);
}

TEST(FilterCandidate, FullyAlignedIsNotACandidate) {
  const auto tagger = small_tagger();
  auto p = make_pair("p", "Merkel said", "Merkel sagte");
  EXPECT_FALSE(filter_candidate(p, links("p", {{0, 0}, {1, 1}}), tagger));
}

TEST(FilterCandidate, DisallowedEntityLabelIsIgnored) {
  const auto tagger = small_tagger();
  auto p = make_pair("p", "Monday", "am Montag Bundeskanzlerin");
  EXPECT_FALSE(filter_candidate(p, links("p", {{0, 1}}), tagger));
}

TEST(FilterCandidate, MissingLanguageIsTaggerFailure) {
  const auto tagger = small_tagger();
  auto p = make_pair("p", "Merkel", "Merkel x");
  p.tgt_lang = "fr";
  try {
    filter_candidate(p, links("p", {{0, 0}}), tagger);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TaggerFailure);
  }
}

struct Fixture {
  Corpus corpus;
  AlignmentMap a, b;
  LexiconTagger tagger;
};

Fixture load_fixture() {
  Fixture f;
  f.corpus = load_parallel(fixture("bitext/src.en"), fixture("bitext/tgt.de"), "en", "de", Domain::TED);
  f.a = load_alignments(fixture("bitext/align_a.txt"), f.corpus, AlignerTool::A);
  f.b = load_alignments(fixture("bitext/align_b.txt"), f.corpus, AlignerTool::B);
  f.tagger = LexiconTagger::from_file(fixture("bitext/lexicon.tsv"));
  return f;
}

// id -> "start-end start-end" from the hand-derived oracle file.
std::map<std::string, std::string> expected_candidates() {
  std::map<std::string, std::string> out;
  for (const auto& line : testing::lines_of(fixture("bitext/candidates.expected"))) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

std::string span_string(const Candidate& c) {
  std::string s;
  for (const auto& sp : c.spans) {
    if (!s.empty()) s += ' ';
    s += std::to_string(sp.start) + "-" + std::to_string(sp.end);
  }
  return s;
}

TEST(ExtractCorpus, FixtureMatchesHandDerivedOracle) {
  const auto f = load_fixture();
  const auto merged = combine_alignment_maps(f.a, f.b, AlignmentCombine::Union);
  const auto set = extract_corpus(f.corpus, merged, f.tagger);
  std::map<std::string, std::string> got;
  for (const auto& c : set.candidates) got[c.pair_id] = span_string(c);
  EXPECT_EQ(got, expected_candidates());
  EXPECT_EQ(set.stats.n_pairs, 20u);
  EXPECT_EQ(set.stats.n_candidates, 9u);
  EXPECT_DOUBLE_EQ(set.stats.rate, 9.0 / 20.0);
}

TEST(ExtractCorpus, TargetSideEntityQualifies) {
  const auto f = load_fixture();
  const auto set = extract_corpus(f.corpus, combine_alignment_maps(f.a, f.b, AlignmentCombine::Union), f.tagger);
  const auto it = std::find_if(set.candidates.begin(), set.candidates.end(),
                               [](const Candidate& c) { return c.pair_id == "ted-en2de-000005"; });
  ASSERT_NE(it, set.candidates.end());
  ASSERT_EQ(it->ne_hits.size(), 1u);
  EXPECT_EQ(it->ne_hits[0].side, Side::Tgt);
  EXPECT_EQ(it->ne_hits[0].label, "GPE");
}

// Pair 12 has its only unaligned content word covered by the second aligner.
TEST(ExtractCorpus, IntersectionRecoversPairHiddenByUnion) {
  const auto f = load_fixture();
  auto has = [](const CandidateSet& s, const std::string& id) {
    return std::any_of(s.candidates.begin(), s.candidates.end(), [&](const Candidate& c) { return c.pair_id == id; });
  };
  const auto u = extract_corpus(f.corpus, combine_alignment_maps(f.a, f.b, AlignmentCombine::Union), f.tagger);
  const auto x = extract_corpus(f.corpus, combine_alignment_maps(f.a, f.b, AlignmentCombine::Intersection), f.tagger);
  EXPECT_FALSE(has(u, "ted-en2de-000012"));
  EXPECT_TRUE(has(x, "ted-en2de-000012"));
}

TEST(ExtractCorpus, ThreadedRunEqualsSerialRun) {
  const auto f = load_fixture();
  const auto merged = combine_alignment_maps(f.a, f.b, AlignmentCombine::Union);
  EXPECT_EQ(extract_corpus(f.corpus, merged, f.tagger, {1}).candidates,
            extract_corpus(f.corpus, merged, f.tagger, {4}).candidates);
}

TEST(ExtractCorpus, TwoOfTwentyGivesRateOneTenth) {
  const auto tagger = small_tagger();
  std::vector<SentencePair> pairs;
  AlignmentMap al;
  for (int i = 0; i < 20; ++i) {
    const auto id = make_pair_id(Domain::TED, "en", "de", i);
    const bool qualifies = i == 3 || i == 11;
    pairs.push_back(make_pair(id, "Merkel said", qualifies ? "Bundeskanzlerin Merkel sagte" : "Merkel sagte"));
    al[id] = qualifies ? links(id, {{0, 1}, {1, 2}}) : links(id, {{0, 0}, {1, 1}});
  }
  const auto set = extract_corpus(Corpus(pairs), al, tagger);
  EXPECT_EQ(set.stats.n_candidates, 2u);
  EXPECT_DOUBLE_EQ(set.stats.rate, 0.10);
}

TEST(ExtractCorpus, NoEntitiesNoCandidates) {
  LexiconTagger t;
  t.add("*", "Haus", "NOUN");
  std::vector<SentencePair> pairs = {make_pair("a", "house", "das Haus"), make_pair("b", "tree", "ein Haus")};
  AlignmentMap al{{"a", links("a", {})}, {"b", links("b", {})}};
  const auto set = extract_corpus(Corpus(pairs), al, t);
  EXPECT_TRUE(set.candidates.empty());
  EXPECT_EQ(set.stats.rate, 0.0);
}

TEST(ExtractCorpus, MissingAlignmentIsReported) {
  const auto tagger = small_tagger();
  std::vector<SentencePair> pairs = {make_pair("a", "Merkel", "Merkel")};
  try {
    extract_corpus(Corpus(pairs), {}, tagger);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingAlignment);
  }
}

}  // namespace
}  // namespace pragex
