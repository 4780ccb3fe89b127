#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "pragex/corpus.hpp"
#include "pragex/error.hpp"
#include "pragex/records_io.hpp"
#include "test_support.hpp"

namespace pragex {
namespace {

using testing::TempDir;
using testing::fixture;
using testing::spit;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected pragex::Error";
  return Errc::InvalidState;
}

TEST(LoadParallel, AssignsSequentialIds) {
  TempDir dir;
  spit(dir / "a.en", "one\ntwo\nthree\n");
  spit(dir / "a.de", "eins\nzwei\ndrei\n");
  const auto c = load_parallel(dir / "a.en", dir / "a.de", "en", "de", Domain::TED);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.pairs()[0].id, "ted-en2de-000000");
  EXPECT_EQ(c.pairs()[2].id, "ted-en2de-000002");
  EXPECT_EQ(c.at("ted-en2de-000001").tgt_text, "zwei");
  EXPECT_EQ(c.pairs()[1].src_lang, "en");
}

TEST(LoadParallel, LineCountMismatch) {
  TempDir dir;
  spit(dir / "a.en", "1\n2\n3\n4\n5\n");
  spit(dir / "a.de", "1\n2\n3\n4\n");
  EXPECT_EQ(code_of([&] { load_parallel(dir / "a.en", dir / "a.de", "en", "de", Domain::TED); }),
            Errc::LineCountMismatch);
}

TEST(LoadParallel, EmptyAndMissingFiles) {
  TempDir dir;
  spit(dir / "a.en", "");
  spit(dir / "a.de", "x\n");
  EXPECT_EQ(code_of([&] { load_parallel(dir / "a.en", dir / "a.de", "en", "de", Domain::TED); }), Errc::EmptyFile);
  EXPECT_EQ(code_of([&] { load_parallel(dir / "nope", dir / "a.de", "en", "de", Domain::TED); }), Errc::FileNotFound);
}

TEST(LoadParallel, FixtureTokenCountsMatchHandTokenization) {
  const auto c = load_parallel(fixture("bitext/src.en"), fixture("bitext/tgt.de"), "en", "de", Domain::TED);
  const auto src = testing::lines_of(fixture("bitext/tokens.en"));
  const auto tgt = testing::lines_of(fixture("bitext/tokens.de"));
  ASSERT_EQ(c.size(), 20u);
  ASSERT_EQ(src.size(), 20u);
  ASSERT_EQ(tgt.size(), 20u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c.pairs()[i].src_tokens, testing::words(src[i])) << "pair " << i;
    EXPECT_EQ(c.pairs()[i].tgt_tokens, testing::words(tgt[i])) << "pair " << i;
  }
}

TEST(Tokenize, SplitsBracketsFromWords) {
  EXPECT_EQ(tokenize("1 mile (1.6km)"), (std::vector<std::string>{"1", "mile", "(", "1.6km", ")"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Tokenize, KeepsInternalPunctuation) {
  EXPECT_EQ(tokenize("3,5 U.K. it's"), (std::vector<std::string>{"3,5", "U.K", ".", "it's"}));
  EXPECT_EQ(tokenize("„Hallo“"), (std::vector<std::string>{"„", "Hallo", "“"}));
  EXPECT_EQ(tokenize("((a))"), (std::vector<std::string>{"(", "(", "a", ")", ")"}));
}

// Property: tokens never contain whitespace and concatenate back to the
// input with whitespace removed.
TEST(Tokenize, ConcatenationPreservesNonSpaceCharacters) {
  std::mt19937 gen(7);
  const std::string alphabet = "ab1.,()[]- \t";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const int len = static_cast<int>(gen() % 30);
    for (int i = 0; i < len; ++i) s.push_back(alphabet[gen() % alphabet.size()]);
    std::string joined;
    for (const auto& t : tokenize(s)) {
      ASSERT_FALSE(t.empty());
      ASSERT_EQ(t.find_first_of(" \t"), std::string::npos);
      joined += t;
    }
    std::string expected;
    for (char ch : s)
      if (ch != ' ' && ch != '\t') expected.push_back(ch);
    EXPECT_EQ(joined, expected) << "input '" << s << "'";
  }
}

TEST(Pharaoh, ParsesLinksAsSet) {
  EXPECT_EQ(parse_pharaoh_line("0-0 1-2"), (std::set<Link>{{0, 0}, {1, 2}}));
  EXPECT_EQ(parse_pharaoh_line("0-0 0-0").size(), 1u);
  EXPECT_TRUE(parse_pharaoh_line("").empty());
  EXPECT_EQ(format_pharaoh_line({{1, 2}, {0, 0}}), "0-0 1-2");
  EXPECT_EQ(code_of([] { parse_pharaoh_line("0-x"); }), Errc::MalformedLink);
  EXPECT_EQ(code_of([] { parse_pharaoh_line("3"); }), Errc::MalformedLink);
}

TEST(Pharaoh, OutOfBoundsLinkRejected) {
  TempDir dir;
  spit(dir / "s", "a b\n");
  spit(dir / "t", "x y z\n");
  spit(dir / "ok", "0-0 1-2\n");
  spit(dir / "bad", "5-0\n");
  const auto c = load_parallel(dir / "s", dir / "t", "en", "de", Domain::EUR);
  const auto ok = load_alignments(dir / "ok", c, AlignerTool::A);
  EXPECT_EQ(ok.at("eur-en2de-000000").links, (std::set<Link>{{0, 0}, {1, 2}}));
  EXPECT_EQ(code_of([&] { load_alignments(dir / "bad", c, AlignerTool::A); }), Errc::IndexOutOfBounds);
}

TEST(MergeAlignments, UnionExamples) {
  AlignmentSet a{"p", {{0, 0}}, AlignerTool::A};
  AlignmentSet b{"p", {{1, 1}}, AlignerTool::B};
  EXPECT_EQ(merge_alignments(a, b).links, (std::set<Link>{{0, 0}, {1, 1}}));
  EXPECT_EQ(merge_alignments(a, b).source_tool, AlignerTool::MERGED);
  AlignmentSet e1{"p", {}, AlignerTool::A}, e2{"p", {}, AlignerTool::B};
  EXPECT_TRUE(merge_alignments(e1, e2).links.empty());
  AlignmentSet other{"q", {}, AlignerTool::B};
  EXPECT_EQ(code_of([&] { merge_alignments(a, other); }), Errc::PairMismatch);
}

// Brute-force set oracle over a small index grid.
TEST(MergeAlignments, MatchesBruteForceUnionAndIntersection) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 300; ++trial) {
    AlignmentSet a{"p", {}, AlignerTool::A}, b{"p", {}, AlignerTool::B};
    bool in_a[6][6] = {}, in_b[6][6] = {};
    for (std::size_t s = 0; s < 6; ++s)
      for (std::size_t t = 0; t < 6; ++t) {
        if (gen() % 4 == 0) {
          a.links.insert({s, t});
          in_a[s][t] = true;
        }
        if (gen() % 4 == 0) {
          b.links.insert({s, t});
          in_b[s][t] = true;
        }
      }
    const auto u = combine_alignments(a, b, AlignmentCombine::Union);
    const auto x = combine_alignments(a, b, AlignmentCombine::Intersection);
    for (std::size_t s = 0; s < 6; ++s)
      for (std::size_t t = 0; t < 6; ++t) {
        EXPECT_EQ(u.links.contains({s, t}), in_a[s][t] || in_b[s][t]);
        EXPECT_EQ(x.links.contains({s, t}), in_a[s][t] && in_b[s][t]);
      }
  }
}

TEST(MergeAlignments, MapsMustCoverTheSameIds) {
  AlignmentMap a{{"p", {"p", {}, AlignerTool::A}}};
  AlignmentMap b{{"q", {"q", {}, AlignerTool::B}}};
  EXPECT_EQ(code_of([&] { combine_alignment_maps(a, b, AlignmentCombine::Union); }), Errc::MissingAlignment);
}

AnnotatedRecord sample_record(int i) {
  AnnotatedRecord r;
  r.id = "ted-en2de-00000" + std::to_string(i);
  r.source = "It is 1 mile long .";
  r.target = "Es ist 1 Meile ( 1,6 km ) lang .";
  r.dataset = i % 2 ? Dataset::POOL : Dataset::EXTR;
  if (i == 2) {
    r.al_label = ALLabel::False;
    return r;
  }
  r.al_label = ALLabel::True;
  r.spans.push_back({{4, 8}, TokenRange{2, 4}, {TypeTag::MeasConv}});
  r.types = {TypeTag::MeasConv};
  r.styles = {StyleTag::A};
  return r;
}

TEST(RecordsIo, EmptyListRoundTrips) {
  TempDir dir;
  write_records({}, dir / "r.jsonl");
  EXPECT_EQ(testing::slurp(dir / "r.jsonl"), "");
  EXPECT_TRUE(read_records(dir / "r.jsonl").empty());
}

TEST(RecordsIo, WritesAreByteStable) {
  TempDir dir;
  const std::vector<AnnotatedRecord> recs = {sample_record(0), sample_record(1), sample_record(2)};
  write_records(recs, dir / "a.jsonl");
  write_records(recs, dir / "b.jsonl");
  EXPECT_EQ(testing::slurp(dir / "a.jsonl"), testing::slurp(dir / "b.jsonl"));
}

TEST(RecordsIo, RoundTripFieldByField) {
  TempDir dir;
  const std::vector<AnnotatedRecord> recs = {sample_record(0), sample_record(1), sample_record(2)};
  write_records(recs, dir / "a.jsonl");
  const auto back = read_records(dir / "a.jsonl");
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].id, recs[i].id);
    EXPECT_EQ(back[i].source, recs[i].source);
    EXPECT_EQ(back[i].target, recs[i].target);
    EXPECT_EQ(back[i].types, recs[i].types);
    EXPECT_EQ(back[i].styles, recs[i].styles);
    EXPECT_EQ(back[i].dataset, recs[i].dataset);
    EXPECT_EQ(back[i].al_label, recs[i].al_label);
    ASSERT_EQ(back[i].spans.size(), recs[i].spans.size());
    for (std::size_t s = 0; s < recs[i].spans.size(); ++s) {
      EXPECT_EQ(back[i].spans[s].target, recs[i].spans[s].target);
      EXPECT_EQ(back[i].spans[s].source, recs[i].spans[s].source);
      EXPECT_EQ(back[i].spans[s].types, recs[i].spans[s].types);
    }
  }
}

TEST(RecordsIo, InvalidLineNamesItsLineNumber) {
  TempDir dir;
  auto bad = sample_record(0);
  bad.types.clear();
  spit(dir / "r.jsonl", record_to_line(sample_record(1)) + "\n" + record_to_line(bad) + "\n");
  try {
    read_records(dir / "r.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SchemaViolation);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("types empty"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace pragex
