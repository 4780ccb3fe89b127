#include <gtest/gtest.h>

#include <random>

#include "pragex/error.hpp"
#include "pragex/records_io.hpp"
#include "pragex/schema.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace pragex {
namespace {

using testing::random_record;

using testing::fixture;

AnnotatedRecord true_record() {
  AnnotatedRecord r;
  r.id = "ted-en2de-000001";
  r.source = "1 mile ( 1.6km )";
  r.target = "1 mile ( 1.6km )";
  r.al_label = ALLabel::True;
  r.spans.push_back({{3, 4}, std::nullopt, {}});
  r.types = {TypeTag::MeasConv};
  r.styles = {StyleTag::A};
  return r;
}

bool has_violation(const std::vector<Violation>& v, const std::string& message) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.message == message; });
}

TEST(Validate, ValidRecordHasNoViolations) { EXPECT_TRUE(validate(true_record()).empty()); }

TEST(Validate, TrueRecordNeedsTypes) {
  auto r = true_record();
  r.types.clear();
  const auto v = validate(r);
  EXPECT_TRUE(has_violation(v, "types empty"));
  EXPECT_EQ(v.front().path, "types");
}

TEST(Validate, FalseRecordMustNotCarrySpans) {
  auto r = true_record();
  r.al_label = ALLabel::False;
  r.types.clear();
  r.styles.clear();
  EXPECT_TRUE(has_violation(validate(r), "spans nonempty on FALSE"));
}

TEST(Validate, StructuralRules) {
  auto r = true_record();
  r.spans = {{{2, 4}, std::nullopt, {}}, {{3, 6}, std::nullopt, {}}};
  r.styles = {StyleTag::A, StyleTag::A};
  auto v = validate(r);
  EXPECT_TRUE(has_violation(v, "overlaps previous span"));
  EXPECT_TRUE(has_violation(v, "span out of bounds (6 > 5)"));

  r = true_record();
  r.styles.clear();
  EXPECT_TRUE(has_violation(validate(r), "styles count 0 != spans count 1"));

  r = true_record();
  r.target = "1  mile";
  EXPECT_TRUE(has_violation(validate(r), "target not token-normalized"));

  r = true_record();
  r.spans[0].target = {2, 2};
  EXPECT_TRUE(has_violation(validate(r), "empty span"));
}

TEST(RenderBrackets, WrapsSpanTokens) {
  auto r = true_record();
  const auto b = render_brackets(r);
  EXPECT_EQ(b.target, "1 mile ( [ 1.6km ] )");
  EXPECT_EQ(b.source, "1 mile ( 1.6km )");
}

TEST(RenderBrackets, NoSpansLeavesTextUnchanged) {
  AnnotatedRecord r;
  r.id = "x";
  r.source = "a b";
  r.target = "c d";
  const auto b = render_brackets(r);
  EXPECT_EQ(b.source, "a b");
  EXPECT_EQ(b.target, "c d");
}

TEST(ParseBrackets, MalformedMarkup) {
  RecordMeta m;
  m.id = "x";
  auto code = [&](std::string_view tgt) {
    try {
      parse_brackets("a", tgt, m);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidState;
  };
  EXPECT_EQ(code("a [ b"), Errc::UnbalancedBrackets);
  EXPECT_EQ(code("a ] b"), Errc::UnbalancedBrackets);
  EXPECT_EQ(code("[ a [ b ] ]"), Errc::NestedBrackets);
  EXPECT_EQ(code("a [ ] b"), Errc::SchemaViolation);
}

TEST(TypeTags, TableHasNineteenTagsInFourCategories) {
  std::map<Category, int> per;
  for (auto t : all_type_tags()) ++per[category_of(t)];
  EXPECT_EQ(per[Category::ENT], 5);
  EXPECT_EQ(per[Category::LING], 5);
  EXPECT_EQ(per[Category::SYS], 5);
  EXPECT_EQ(per[Category::ADD], 4);
  EXPECT_EQ(parse_type_tag("MEAS_CONV"), TypeTag::MeasConv);
  EXPECT_EQ(parse_type_tag("ENT-DESC"), TypeTag::EntDesc);
  EXPECT_THROW(parse_type_tag("NOPE"), Error);
}

struct Table3Row {
  RecordMeta meta;
  std::string source;
  std::string target;
};

std::vector<Table3Row> table3() {
  std::vector<Table3Row> out;
  for (const auto& j : read_jsonl(fixture("table3.jsonl"))) {
    Table3Row row;
    row.meta.id = j.at("id");
    row.meta.dataset = parse_dataset(j.at("dataset").get<std::string>());
    row.meta.al_label = ALLabel::True;
    for (const auto& t : j.at("types")) row.meta.types.push_back(parse_type_tag(t.get<std::string>()));
    for (const auto& s : j.at("styles")) row.meta.styles.push_back(parse_style(s.get<std::string>()));
    if (j.contains("source_links"))
      for (const auto& l : j.at("source_links"))
        row.meta.source_links.push_back(l.is_null() ? std::nullopt : std::optional<std::size_t>(l.get<std::size_t>()));
    row.source = j.at("source");
    row.target = j.at("target");
    out.push_back(std::move(row));
  }
  return out;
}

TEST(Table3, EveryTranscribedExampleValidates) {
  const auto rows = table3();
  ASSERT_EQ(rows.size(), 10u);
  for (const auto& row : rows) {
    const auto r = parse_brackets(row.source, row.target, row.meta);
    EXPECT_TRUE(validate(r).empty()) << row.meta.id << ": " << format_violations(validate(r));
    const auto b = render_brackets(r);
    EXPECT_EQ(b.source, row.source) << row.meta.id;
    EXPECT_EQ(b.target, row.target) << row.meta.id;
  }
}

TEST(Table3, MeasurementExampleLinksSpansToSources) {
  const auto rows = table3();
  const auto r = parse_brackets(rows[4].source, rows[4].target, rows[4].meta);
  ASSERT_EQ(r.spans.size(), 3u);
  EXPECT_FALSE(r.spans[0].source.has_value());
  // "15,000 feet" -> "4.500 m", "3,000 feet" -> "900 m"
  EXPECT_EQ(r.spans[1].source, (TokenRange{4, 6}));
  EXPECT_EQ(r.spans[2].source, (TokenRange{8, 10}));
  EXPECT_EQ(r.spans[1].target, (TokenRange{7, 9}));
}

TEST(Table3, CorpusStatsMatchHandCount) {
  std::vector<AnnotatedRecord> recs;
  for (const auto& row : table3()) recs.push_back(parse_brackets(row.source, row.target, row.meta));
  const auto table = corpus_stats(recs);
  ASSERT_EQ(table.size(), 3u);
  const auto& de = table.at({"TED", "en-de"});
  EXPECT_EQ(de.pool, 4u);
  EXPECT_EQ(de.extr, 1u);
  EXPECT_EQ(de.train, 1u);
  EXPECT_EQ(de.ent, 2u);
  EXPECT_EQ(de.ling, 2u);
  EXPECT_EQ(de.sys, 4u);
  EXPECT_EQ(de.add, 0u);
  const auto& nl = table.at({"TED", "en-nl"});
  EXPECT_EQ(nl.extr, 2u);
  EXPECT_EQ(nl.ent, 1u);
  EXPECT_EQ(nl.add, 3u);
  const auto& es = table.at({"TED", "en-es"});
  EXPECT_EQ(es.pool, 2u);
  EXPECT_EQ(es.sys, 1u);
  EXPECT_EQ(es.ent, 1u);
  EXPECT_EQ(es.add, 1u);
}

TEST(CorpusStats, FiveRecordFixture) {
  auto rec = [](const std::string& id, Dataset d, std::vector<TypeTag> types) {
    AnnotatedRecord r;
    r.id = id;
    r.source = "s";
    r.target = "t";
    r.dataset = d;
    r.types = std::move(types);
    return r;
  };
  const std::vector<AnnotatedRecord> recs = {
      rec("ted-en2de-000000", Dataset::EXTR, {TypeTag::EntDesc}),
      rec("ted-en2de-000001", Dataset::EXTR, {TypeTag::EntRep}),
      rec("ted-en2de-000002", Dataset::POOL, {TypeTag::SysConv}),
      rec("ted-en2de-000003", Dataset::POOL, {}),
      rec("ted-en2de-000004", Dataset::POOL, {}),
  };
  const auto table = corpus_stats(recs);
  ASSERT_EQ(table.size(), 1u);
  const auto& row = table.begin()->second;
  EXPECT_EQ(table.begin()->first.label(), "TED-DE");
  EXPECT_EQ((std::vector<std::size_t>{row.extr, row.pool, row.train, row.ent, row.ling, row.sys, row.add}),
            (std::vector<std::size_t>{2, 3, 0, 2, 0, 1, 0}));
  EXPECT_EQ(format_stats_table(table),
            "corpus\tPOOL\tEXTR\tTRAIN\tENT\tSYS\tLING\tADD\nTED-DE\t3\t2\t0\t2\t1\t0\t0\n");
  EXPECT_TRUE(corpus_stats({}).empty());
}

TEST(RoundTrip, RenderThenParseIsIdentityOnThousandRecords) {
  std::mt19937 gen(99);
  for (int i = 0; i < 1000; ++i) {
    const auto r = random_record(gen, i);
    ASSERT_TRUE(validate(r).empty()) << format_violations(validate(r));
    const auto b = render_brackets(r);
    const auto back = parse_brackets(b.source, b.target, meta_of(r));
    ASSERT_EQ(back, r) << "record " << i << "\n" << b.source << "\n" << b.target;
  }
}

TEST(RoundTrip, JsonLinesIdentity) {
  std::mt19937 gen(100);
  testing::TempDir dir;
  std::vector<AnnotatedRecord> recs;
  for (int i = 0; i < 1000; ++i) recs.push_back(random_record(gen, i));
  write_records(recs, dir / "r.jsonl");
  EXPECT_EQ(read_records(dir / "r.jsonl"), recs);
  for (const auto& r : recs) EXPECT_EQ(record_to_line(record_from_json(Json::parse(record_to_line(r)))), record_to_line(r));
}

TEST(CorpusKey, ParsesRecordIds) {
  EXPECT_EQ(corpus_key("ted-en2de-000001").label(), "TED-DE");
  EXPECT_EQ(corpus_key("eur-en2es-17").lang_pair, "en-es");
  EXPECT_EQ(corpus_key("garbage").domain, "UNKNOWN");
}

}  // namespace
}  // namespace pragex
