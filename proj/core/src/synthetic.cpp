#include "pragex/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "pragex/error.hpp"
#include "pragex/extraction.hpp"
#include "pragex/models.hpp"
#include "pragex/rng.hpp"

namespace pragex {

namespace {

struct Word {
  std::string_view en;
  std::string_view de;
  std::string_view pos;
};

constexpr std::array<Word, 24> kNouns = {{
    {"house", "Haus", "NOUN"},       {"river", "Fluss", "NOUN"},      {"teacher", "Lehrer", "NOUN"},
    {"mountain", "Berg", "NOUN"},    {"village", "Dorf", "NOUN"},     {"child", "Kind", "NOUN"},
    {"road", "Straße", "NOUN"},      {"market", "Markt", "NOUN"},     {"book", "Buch", "NOUN"},
    {"doctor", "Arzt", "NOUN"},      {"bridge", "Brücke", "NOUN"},    {"school", "Schule", "NOUN"},
    {"water", "Wasser", "NOUN"},     {"island", "Insel", "NOUN"},     {"farmer", "Bauer", "NOUN"},
    {"company", "Firma", "NOUN"},    {"forest", "Wald", "NOUN"},      {"idea", "Idee", "NOUN"},
    {"city", "Stadt", "NOUN"},       {"journey", "Reise", "NOUN"},    {"music", "Musik", "NOUN"},
    {"garden", "Garten", "NOUN"},    {"problem", "Problem", "NOUN"},  {"story", "Geschichte", "NOUN"},
}};

constexpr std::array<Word, 12> kVerbs = {{
    {"sees", "sieht", "VERB"},     {"builds", "baut", "VERB"},   {"finds", "findet", "VERB"},
    {"needs", "braucht", "VERB"},  {"loves", "liebt", "VERB"},   {"crosses", "überquert", "VERB"},
    {"visits", "besucht", "VERB"}, {"opens", "öffnet", "VERB"},  {"leaves", "verlässt", "VERB"},
    {"reaches", "erreicht", "VERB"}, {"knows", "kennt", "VERB"}, {"describes", "beschreibt", "VERB"},
}};

constexpr std::array<Word, 8> kAdjectives = {{
    {"old", "alte", "ADJ"},   {"small", "kleine", "ADJ"}, {"new", "neue", "ADJ"},    {"long", "lange", "ADJ"},
    {"quiet", "ruhige", "ADJ"}, {"large", "große", "ADJ"}, {"famous", "berühmte", "ADJ"}, {"green", "grüne", "ADJ"},
}};

constexpr std::array<Word, 6> kAdpositions = {{
    {"in", "in", "ADP"}, {"near", "bei", "ADP"}, {"with", "mit", "ADP"},
    {"behind", "hinter", "ADP"}, {"over", "über", "ADP"}, {"for", "für", "ADP"},
}};

// Target-only particles that any aligner leaves unlinked.
constexpr std::array<std::string_view, 6> kParticles = {"auch", "doch", "ja", "schon", "noch", "eben"};

struct Entity {
  std::string_view name;
  std::string_view label;
};

constexpr std::array<Entity, 16> kPlaces = {{
    {"Texas", "GPE"},   {"Bayern", "GPE"},  {"Ohio", "GPE"},     {"Kyoto", "GPE"},
    {"Peru", "GPE"},    {"Norwegen", "GPE"}, {"Kenia", "GPE"},   {"Utah", "GPE"},
    {"Sizilien", "GPE"}, {"Quebec", "GPE"}, {"Vietnam", "GPE"},  {"Chile", "GPE"},
    {"Alaska", "GPE"},  {"Tirol", "GPE"},   {"Marokko", "GPE"},  {"Oregon", "GPE"},
}};

constexpr std::array<Entity, 10> kOthers = {{
    {"Siemens", "ORG"}, {"Nokia", "ORG"},    {"Unesco", "ORG"},   {"Harvard", "ORG"}, {"Lincoln", "PERSON"},
    {"Darwin", "PERSON"}, {"Curie", "PERSON"}, {"Mandela", "PERSON"}, {"Amazonas", "LOC"}, {"Sahara", "LOC"},
}};

// Description heads used inside entity explanations.
constexpr std::array<std::string_view, 6> kDescHeads = {"Stadt", "Region", "Firma", "Politiker", "Fluss", "Gebiet"};

struct Measure {
  std::string_view en_unit;
  std::string_view de_unit;
  std::string_view conv_unit;  // unit token of the converted value
  int factor_pct;
};

constexpr std::array<Measure, 4> kMeasures = {{
    {"miles", "Meilen", "km", 161},
    {"pounds", "Pfund", "kg", 45},
    {"feet", "Fuß", "m", 30},
    {"acres", "Morgen", "km", 1},
}};

LexiconTagger build_tagger() {
  LexiconTagger t;
  auto both = [&](std::string_view en, std::string_view de, std::string_view pos) {
    t.add("en", en, pos);
    t.add("de", de, pos);
  };
  for (const auto& w : kNouns) both(w.en, w.de, w.pos);
  for (const auto& w : kVerbs) both(w.en, w.de, w.pos);
  for (const auto& w : kAdjectives) both(w.en, w.de, w.pos);
  for (const auto& w : kAdpositions) both(w.en, w.de, w.pos);
  both("the", "die", "DET");
  both("a", "eine", "DET");
  both("and", "und", "CCONJ");
  for (auto p : kParticles) t.add("de", p, "ADV");
  for (auto h : kDescHeads) t.add("de", h, "NOUN");
  t.add("de", "etwa", "ADV");
  t.add("de", "also", "ADV");
  t.add("de", "das", "DET");
  t.add("de", "der", "DET");
  for (const auto& m : kMeasures) {
    t.add("en", m.en_unit, "NOUN");
    t.add("de", m.de_unit, "NOUN");
    t.add("*", m.conv_unit, "NOUN");
  }
  for (const auto& e : kPlaces) t.add("*", e.name, "PROPN", e.label);
  for (const auto& e : kOthers) t.add("*", e.name, "PROPN", e.label);
  return t;
}

struct Segment {
  std::vector<std::string> src;
  std::vector<std::string> tgt;
  bool aligned = true;  // monotone links src[i] -> tgt[i]; unaligned segments have no source side
};

template <typename T, std::size_t N>
const T& pick(const std::array<T, N>& items, Rng& rng) {
  return items[rng.uniform_index(N)];
}

bool coin(Rng& rng, double p) { return rng.uniform01() < p; }

std::string number(Rng& rng, int lo, int hi) {
  return std::to_string(lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1))));
}

Segment word_segment(const Word& w) { return {{std::string(w.en)}, {std::string(w.de)}, true}; }

std::vector<Segment> clause(Rng& rng, double particle_rate) {
  std::vector<Segment> out;
  out.push_back({{"the"}, {"die"}, true});
  if (coin(rng, 0.4)) out.push_back(word_segment(pick(kAdjectives, rng)));
  out.push_back(word_segment(pick(kNouns, rng)));
  out.push_back(word_segment(pick(kVerbs, rng)));
  if (coin(rng, particle_rate)) out.push_back({{}, {std::string(pick(kParticles, rng))}, false});
  out.push_back({{"a"}, {"eine"}, true});
  out.push_back(word_segment(pick(kNouns, rng)));
  if (coin(rng, 0.5)) {
    out.push_back(word_segment(pick(kAdpositions, rng)));
    out.push_back({{"the"}, {"die"}, true});
    out.push_back(word_segment(pick(kNouns, rng)));
  }
  return out;
}

Entity any_entity(Rng& rng) {
  return coin(rng, 0.6) ? pick(kPlaces, rng) : pick(kOthers, rng);
}

// Hidden-rule positives.
std::vector<Segment> unit_conversion(Rng& rng) {
  const auto& m = pick(kMeasures, rng);
  const std::string n = number(rng, 2, 90);
  const int converted = std::max(1, std::stoi(n) * m.factor_pct / 100);
  Segment conv{{}, {"("}, false};
  conv.tgt.push_back(std::to_string(converted));
  conv.tgt.push_back(std::string(m.conv_unit));
  conv.tgt.push_back(")");
  return {{{n, std::string(m.en_unit)}, {n, std::string(m.de_unit)}, true}, conv};
}

std::vector<Segment> entity_description(Rng& rng) {
  const auto e = any_entity(rng);
  Segment desc{{}, {"(", std::string(pick(kDescHeads, rng))}, false};
  if (coin(rng, 0.5)) desc.tgt.push_back("in");
  desc.tgt.push_back(std::string(pick(kPlaces, rng).name));
  desc.tgt.push_back(")");
  return {{{std::string(e.name)}, {std::string(e.name)}, true}, desc};
}

// Distractors that touch the same surface cues without meeting the rule.
std::vector<Segment> plain_bracket_addition(Rng& rng) {
  Segment s{{}, {"("}, false};
  if (coin(rng, 0.5)) s.tgt.push_back("also");
  s.tgt.push_back(coin(rng, 0.5) ? "das" : "der");
  s.tgt.push_back(std::string(pick(kNouns, rng).de));
  s.tgt.push_back(")");
  return {s};
}

std::vector<Segment> bare_unit_addition(Rng& rng) {
  const auto& m = pick(kMeasures, rng);
  return {{{}, {"etwa", number(rng, 2, 90), std::string(m.conv_unit)}, false}};
}

std::vector<Segment> bare_entity_addition(Rng& rng) {
  return {{{}, {"in", std::string(pick(kPlaces, rng).name)}, false}};
}

std::vector<Segment> year_in_brackets(Rng& rng) {
  return {{{}, {"(", number(rng, 1850, 2020), ")"}, false}};
}

std::vector<Segment> aligned_parenthetical(Rng& rng) {
  const auto& w = pick(kNouns, rng);
  return {{{"(", std::string(w.en), ")"}, {"(", std::string(w.de), ")"}, true}};
}

std::vector<Segment> aligned_measure(Rng& rng) {
  const auto& m = pick(kMeasures, rng);
  const std::string n = number(rng, 2, 90);
  return {{{n, std::string(m.conv_unit)}, {n, std::string(m.conv_unit)}, true}};
}

std::vector<Segment> aligned_entity(Rng& rng) {
  const auto e = any_entity(rng);
  return {{{std::string(e.name)}, {std::string(e.name)}, true}};
}

using Maker = std::vector<Segment> (*)(Rng&);

struct Built {
  SentencePair pair;
  AlignmentSet alignment;
};

Built assemble(std::vector<std::vector<Segment>> inserts, Rng& rng, const SyntheticConfig& cfg) {
  std::vector<Segment> segments = clause(rng, cfg.particle_rate);
  if (coin(rng, 0.35)) {
    segments.push_back({{"and"}, {"und"}, true});
    auto more = clause(rng, cfg.particle_rate);
    segments.insert(segments.end(), more.begin(), more.end());
  }
  // Insert each block after a random segment boundary (never before the first).
  for (auto& block : inserts) {
    const std::size_t at = 1 + rng.uniform_index(segments.size());
    segments.insert(segments.begin() + static_cast<std::ptrdiff_t>(at), block.begin(), block.end());
  }

  Built b;
  std::vector<std::size_t> unaligned_tgt;
  for (const auto& seg : segments) {
    const std::size_t s0 = b.pair.src_tokens.size();
    const std::size_t t0 = b.pair.tgt_tokens.size();
    b.pair.src_tokens.insert(b.pair.src_tokens.end(), seg.src.begin(), seg.src.end());
    b.pair.tgt_tokens.insert(b.pair.tgt_tokens.end(), seg.tgt.begin(), seg.tgt.end());
    if (seg.aligned) {
      for (std::size_t i = 0; i < std::min(seg.src.size(), seg.tgt.size()); ++i)
        if (!coin(rng, cfg.link_drop_rate)) b.alignment.links.insert({s0 + i, t0 + i});
    } else {
      for (std::size_t i = 0; i < seg.tgt.size(); ++i) unaligned_tgt.push_back(t0 + i);
    }
  }
  if (!unaligned_tgt.empty() && coin(rng, cfg.spurious_link_rate)) {
    const auto t = unaligned_tgt[rng.uniform_index(unaligned_tgt.size())];
    b.alignment.links.insert({rng.uniform_index(b.pair.src_tokens.size()), t});
  }
  b.pair.src_lang = cfg.src_lang;
  b.pair.tgt_lang = cfg.tgt_lang;
  b.pair.domain = cfg.domain;
  b.pair.src_text = join_tokens(b.pair.src_tokens);
  b.pair.tgt_text = join_tokens(b.pair.tgt_tokens);
  return b;
}

Built draw_pair(bool positive, double hard_rate, Rng& rng, const SyntheticConfig& cfg) {
  static constexpr std::array<Maker, 2> kPositive = {unit_conversion, entity_description};
  // Distractor families: a bracket with no cue inside, or a cue with no
  // bracket around it. A pair draws from one family only, so the rule stays
  // recoverable from the features up to aligner noise.
  static constexpr std::array<Maker, 2> kBracketOnly = {plain_bracket_addition, year_in_brackets};
  static constexpr std::array<Maker, 2> kCueOnly = {bare_unit_addition, bare_entity_addition};
  static constexpr std::array<Maker, 3> kEasy = {aligned_parenthetical, aligned_measure, aligned_entity};

  std::vector<std::vector<Segment>> inserts;
  if (positive) inserts.push_back(pick(kPositive, rng)(rng));
  if (coin(rng, positive ? cfg.positive_distractor_rate : hard_rate)) {
    const auto& family = coin(rng, 0.5) ? kBracketOnly : kCueOnly;
    inserts.push_back(pick(family, rng)(rng));
    if (coin(rng, cfg.second_distractor_rate)) inserts.push_back(pick(family, rng)(rng));
  }
  if (coin(rng, 0.5)) inserts.push_back(pick(kEasy, rng)(rng));
  return assemble(std::move(inserts), rng, cfg);
}

Instance finish(Built b, std::string id) {
  b.pair.id = id;
  b.alignment.pair_id = std::move(id);
  b.alignment.source_tool = AlignerTool::MERGED;
  return make_instance(b.pair, b.alignment, synthetic_tagger());
}

struct SpanVerdict {
  bool unit = false;
  bool entity = false;
};

std::vector<std::pair<const AdditionSpan*, SpanVerdict>> qualifying_spans(const Instance& inst) {
  const auto ents = synthetic_tagger().ner(inst.pair.tgt_tokens, inst.pair.tgt_lang);
  std::vector<std::pair<const AdditionSpan*, SpanVerdict>> out;
  for (const auto& span : inst.spans) {
    bool bracket = false;
    SpanVerdict v;
    for (std::size_t i = span.start; i < span.end; ++i) {
      const auto& tok = inst.pair.tgt_tokens[i];
      if (tok == "(" || tok == ")") bracket = true;
      if (is_unit_token(tok)) v.unit = true;
    }
    for (const auto& e : ents)
      if (is_allowed_ne_label(e.label) && e.start >= span.start && e.end <= span.end) v.entity = true;
    if (bracket && (v.unit || v.entity)) out.emplace_back(&span, v);
  }
  return out;
}

}  // namespace

const LexiconTagger& synthetic_tagger() {
  static const LexiconTagger tagger = build_tagger();
  return tagger;
}

bool synthetic_rule(const Instance& instance) { return !qualifying_spans(instance).empty(); }

AnnotatedRecord synthetic_oracle(const Instance& instance) {
  AnnotatedRecord r = blank_record(instance, Dataset::TRAIN, ALLabel::False);
  const auto hits = qualifying_spans(instance);
  if (hits.empty()) return r;
  r.al_label = ALLabel::True;
  bool any_unit = false, any_entity = false;
  for (const auto& [span, v] : hits) {
    RecordSpan rs;
    rs.target = {span->start, span->end};
    if (v.unit) rs.types.push_back(TypeTag::MeasConv);
    if (v.entity) rs.types.push_back(TypeTag::EntDesc);
    any_unit |= v.unit;
    any_entity |= v.entity;
    r.spans.push_back(std::move(rs));
    r.styles.push_back(StyleTag::A);
  }
  if (any_entity) r.types.push_back(TypeTag::EntDesc);
  if (any_unit) r.types.push_back(TypeTag::MeasConv);
  return r;
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.pool_positive_rate < 0 || cfg.pool_positive_rate > 1 || cfg.annotated_positive_rate < 0 ||
      cfg.annotated_positive_rate > 1)
    throw Error(Errc::InvalidConfig, "positive rates must lie in [0, 1]");
  Rng rng(cfg.seed);
  // Exact positive counts keep the split preconditions stable across seeds.
  auto planted = [&](std::size_t n, double rate) {
    std::vector<bool> flags(n, false);
    const auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    for (auto i : rng.sample_indices(n, k)) flags[i] = true;
    return flags;
  };
  const auto annotated_flags = planted(cfg.annotated_size, cfg.annotated_positive_rate);
  const auto pool_flags = planted(cfg.pool_size, cfg.pool_positive_rate);

  SyntheticData data;
  data.instances.reserve(cfg.annotated_size + cfg.pool_size);
  std::size_t index = 0;
  for (std::size_t i = 0; i < cfg.annotated_size; ++i) {
    auto inst = finish(draw_pair(annotated_flags[i], cfg.annotated_hard_negative_rate, rng, cfg),
                       make_pair_id(cfg.domain, cfg.src_lang, cfg.tgt_lang, index++));
    auto gold = synthetic_oracle(inst);
    gold.dataset = Dataset::EXTR;
    data.annotated.push_back(std::move(gold));
    data.instances.push_back(std::move(inst));
  }
  for (std::size_t i = 0; i < cfg.pool_size; ++i) {
    auto inst = finish(draw_pair(pool_flags[i], cfg.pool_hard_negative_rate, rng, cfg),
                       make_pair_id(cfg.domain, cfg.src_lang, cfg.tgt_lang, index++));
    data.pool_ids.push_back(inst.pair.id);
    data.instances.push_back(std::move(inst));
  }
  return data;
}

}  // namespace pragex
