#include "pragex/schema.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "pragex/error.hpp"

namespace pragex {

std::string_view label_name(ALLabel label) {
  switch (label) {
    case ALLabel::True: return "TRUE";
    case ALLabel::False: return "FALSE";
    case ALLabel::Discard: return "DISCARD";
  }
  return "FALSE";
}

ALLabel parse_label(std::string_view name) {
  if (name == "TRUE") return ALLabel::True;
  if (name == "FALSE") return ALLabel::False;
  if (name == "DISCARD") return ALLabel::Discard;
  throw Error(Errc::SchemaViolation, "unknown AL label '" + std::string(name) + "'");
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::ENT: return "ENT";
    case Category::LING: return "LING";
    case Category::SYS: return "SYS";
    case Category::ADD: return "ADD";
  }
  return "ADD";
}

namespace {

struct TagInfo {
  TypeTag tag;
  Category category;
  std::string_view name;
  std::string_view description;
};

constexpr std::array<TagInfo, kTypeTagCount> kTags = {{
    {TypeTag::EntRep, Category::ENT, "ENT-REP", "Entity Replacement"},
    {TypeTag::EntDesc, Category::ENT, "ENT-DESC", "Entity Description"},
    {TypeTag::EntSpec, Category::ENT, "ENT-SPEC", "Entity Specification"},
    {TypeTag::EntHyp, Category::ENT, "ENT-HYP", "Entity Hypernym"},
    {TypeTag::EntAcr, Category::ENT, "ENT-ACR", "Entity Acronym"},
    {TypeTag::Trans, Category::LING, "TRANS", "Translation"},
    {TypeTag::LingExpl, Category::LING, "LING-EXPL", "Linguistic Explanation"},
    {TypeTag::Acr, Category::LING, "ACR", "Acronym"},
    {TypeTag::Hyper, Category::LING, "HYPER", "Hypernym"},
    {TypeTag::HypoSpec, Category::LING, "HYPO-SPEC", "Hyponym Specification"},
    {TypeTag::MeasConv, Category::SYS, "MEAS-CONV", "Measurement Conversion"},
    {TypeTag::MeasDim, Category::SYS, "MEAS-DIM", "Measurement Dimension"},
    {TypeTag::MeasSpec, Category::SYS, "MEAS-SPEC", "Measurement Specification"},
    {TypeTag::SysConv, Category::SYS, "SYS-CONV", "System Conversion"},
    {TypeTag::SysDesc, Category::SYS, "SYS-DESC", "System Description"},
    {TypeTag::AddInf, Category::ADD, "ADD-INF", "Additional Information"},
    {TypeTag::Clear, Category::ADD, "CLEAR", "Clarifying Information"},
    {TypeTag::Deix, Category::ADD, "DEIX", "Deixis Resolution"},
    {TypeTag::Other, Category::ADD, "OTHER", "Other cultural explicitation"},
}};

const TagInfo& info(TypeTag tag) { return kTags[static_cast<std::size_t>(tag)]; }

}  // namespace

const std::array<TypeTag, kTypeTagCount>& all_type_tags() {
  static const std::array<TypeTag, kTypeTagCount> tags = [] {
    std::array<TypeTag, kTypeTagCount> out{};
    for (std::size_t i = 0; i < kTypeTagCount; ++i) out[i] = kTags[i].tag;
    return out;
  }();
  return tags;
}

Category category_of(TypeTag tag) { return info(tag).category; }
std::string_view type_name(TypeTag tag) { return info(tag).name; }
std::string_view type_description(TypeTag tag) { return info(tag).description; }

TypeTag parse_type_tag(std::string_view name) {
  std::string norm(name);
  std::replace(norm.begin(), norm.end(), '_', '-');
  for (const auto& t : kTags)
    if (t.name == norm) return t.tag;
  throw Error(Errc::SchemaViolation, "unknown type tag '" + std::string(name) + "'");
}

std::string_view style_name(StyleTag s) { return s == StyleTag::R ? "R" : "A"; }

StyleTag parse_style(std::string_view name) {
  if (name == "R") return StyleTag::R;
  if (name == "A") return StyleTag::A;
  throw Error(Errc::SchemaViolation, "unknown style '" + std::string(name) + "'");
}

std::string_view dataset_name(Dataset d) {
  switch (d) {
    case Dataset::EXTR: return "EXTR";
    case Dataset::POOL: return "POOL";
    case Dataset::TRAIN: return "TRAIN";
  }
  return "EXTR";
}

Dataset parse_dataset(std::string_view name) {
  if (name == "EXTR") return Dataset::EXTR;
  if (name == "POOL") return Dataset::POOL;
  if (name == "TRAIN") return Dataset::TRAIN;
  throw Error(Errc::SchemaViolation, "unknown dataset '" + std::string(name) + "'");
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

namespace {

void check_range(std::vector<Violation>& out, const std::string& path, const TokenRange& r, std::size_t n) {
  if (r.start >= r.end) out.push_back({path, "empty span"});
  else if (r.end > n) out.push_back({path, "span out of bounds (" + std::to_string(r.end) + " > " + std::to_string(n) + ")"});
}

}  // namespace

std::vector<Violation> validate(const AnnotatedRecord& record) {
  std::vector<Violation> out;
  if (record.id.empty()) out.push_back({"id", "id empty"});

  const auto src_tokens = split_tokens(record.source);
  const auto tgt_tokens = split_tokens(record.target);
  if (tgt_tokens.empty()) out.push_back({"target", "target empty"});
  if (join_tokens(src_tokens) != record.source) out.push_back({"source", "source not token-normalized"});
  if (join_tokens(tgt_tokens) != record.target) out.push_back({"target", "target not token-normalized"});

  if (record.al_label == ALLabel::True) {
    if (record.spans.empty()) out.push_back({"spans", "spans empty"});
    if (record.types.empty()) out.push_back({"types", "types empty"});
    if (record.styles.size() != record.spans.size())
      out.push_back({"styles", "styles count " + std::to_string(record.styles.size()) + " != spans count " +
                                   std::to_string(record.spans.size())});
  } else {
    const std::string label(label_name(record.al_label));
    if (!record.spans.empty()) out.push_back({"spans", "spans nonempty on " + label});
    if (!record.types.empty()) out.push_back({"types", "types nonempty on " + label});
    if (!record.styles.empty()) out.push_back({"styles", "styles nonempty on " + label});
  }

  std::set<TokenRange> sources;
  for (std::size_t i = 0; i < record.spans.size(); ++i) {
    const auto& s = record.spans[i];
    const std::string path = "spans[" + std::to_string(i) + "]";
    check_range(out, path + ".target", s.target, tgt_tokens.size());
    if (i > 0) {
      const auto& prev = record.spans[i - 1].target;
      if (s.target.overlaps(prev)) out.push_back({path + ".target", "overlaps previous span"});
      else if (s.target.start < prev.end) out.push_back({path + ".target", "spans not sorted"});
    }
    if (s.source) {
      check_range(out, path + ".source", *s.source, src_tokens.size());
      sources.insert(*s.source);
    }
  }
  const std::vector<TokenRange> distinct(sources.begin(), sources.end());
  for (std::size_t i = 1; i < distinct.size(); ++i)
    if (distinct[i].overlaps(distinct[i - 1])) out.push_back({"spans", "source spans overlap"});
  return out;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.path + ": " + v.message;
  }
  return out;
}

namespace {

// Tokens made of backslashes followed by a single bracket are literal text;
// one extra backslash keeps them apart from markup.
bool is_bracket_like(std::string_view tok) {
  if (tok.empty()) return false;
  char last = tok.back();
  if (last != '[' && last != ']') return false;
  return std::all_of(tok.begin(), tok.end() - 1, [](char c) { return c == '\\'; });
}

std::string escape_token(const std::string& tok) { return is_bracket_like(tok) ? "\\" + tok : tok; }

std::string render_side(const std::vector<std::string>& tokens, const std::vector<TokenRange>& ranges) {
  std::vector<std::string> out;
  out.reserve(tokens.size() + 2 * ranges.size());
  std::size_t r = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (r < ranges.size() && ranges[r].start == i) out.emplace_back("[");
    out.push_back(escape_token(tokens[i]));
    if (r < ranges.size() && ranges[r].end == i + 1) {
      out.emplace_back("]");
      ++r;
    }
  }
  return join_tokens(out);
}

struct ParsedSide {
  std::vector<std::string> tokens;
  std::vector<TokenRange> groups;
};

ParsedSide parse_side(std::string_view text, std::string_view side) {
  ParsedSide out;
  constexpr std::size_t kClosed = static_cast<std::size_t>(-1);
  std::size_t open = kClosed;
  for (auto& tok : split_tokens(text)) {
    if (tok == "[") {
      if (open != kClosed) throw Error(Errc::NestedBrackets, std::string(side) + ": '[' inside open bracket");
      open = out.tokens.size();
    } else if (tok == "]") {
      if (open == kClosed) throw Error(Errc::UnbalancedBrackets, std::string(side) + ": ']' without '['");
      if (open == out.tokens.size())
        throw Error(Errc::SchemaViolation, std::string(side) + ": empty bracket group");
      out.groups.push_back({open, out.tokens.size()});
      open = kClosed;
    } else if (is_bracket_like(tok) && tok.size() > 1) {
      out.tokens.push_back(tok.substr(1));
    } else {
      out.tokens.push_back(std::move(tok));
    }
  }
  if (open != kClosed) throw Error(Errc::UnbalancedBrackets, std::string(side) + ": unclosed '['");
  return out;
}

std::vector<TokenRange> distinct_sources(const AnnotatedRecord& record) {
  std::set<TokenRange> set;
  for (const auto& s : record.spans)
    if (s.source) set.insert(*s.source);
  std::vector<TokenRange> out(set.begin(), set.end());
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].overlaps(out[i - 1])) throw Error(Errc::OverlappingSpans, record.id + ": source spans overlap");
  return out;
}

}  // namespace

BracketedText render_brackets(const AnnotatedRecord& record) {
  std::vector<TokenRange> targets;
  for (const auto& s : record.spans) {
    if (!targets.empty() && s.target.start < targets.back().end)
      throw Error(Errc::OverlappingSpans, record.id + ": target spans overlap or are unsorted");
    targets.push_back(s.target);
  }
  const auto sources = distinct_sources(record);
  return {render_side(split_tokens(record.source), sources), render_side(split_tokens(record.target), targets)};
}

RecordMeta meta_of(const AnnotatedRecord& record) {
  RecordMeta meta;
  meta.id = record.id;
  meta.dataset = record.dataset;
  meta.al_label = record.al_label;
  meta.types = record.types;
  meta.styles = record.styles;
  const auto sources = distinct_sources(record);
  for (const auto& s : record.spans) {
    meta.span_types.push_back(s.types);
    if (s.source) {
      auto it = std::lower_bound(sources.begin(), sources.end(), *s.source);
      meta.source_links.emplace_back(static_cast<std::size_t>(it - sources.begin()));
    } else {
      meta.source_links.emplace_back(std::nullopt);
    }
  }
  return meta;
}

AnnotatedRecord parse_brackets(std::string_view source, std::string_view target, const RecordMeta& meta) {
  auto src = parse_side(source, "source");
  auto tgt = parse_side(target, "target");

  AnnotatedRecord r;
  r.id = meta.id;
  r.source = join_tokens(src.tokens);
  r.target = join_tokens(tgt.tokens);
  r.types = meta.types;
  r.styles = meta.styles;
  r.dataset = meta.dataset;
  r.al_label = meta.al_label;

  const std::size_t n = tgt.groups.size();
  if (!meta.span_types.empty() && meta.span_types.size() != n)
    throw Error(Errc::SchemaViolation, meta.id + ": span_types count does not match bracket groups");
  if (!meta.source_links.empty() && meta.source_links.size() != n)
    throw Error(Errc::SchemaViolation, meta.id + ": source_links count does not match bracket groups");
  if (meta.source_links.empty() && src.groups.size() > n)
    throw Error(Errc::SchemaViolation, meta.id + ": more source groups than target groups");

  std::vector<bool> used(src.groups.size(), false);
  for (std::size_t i = 0; i < n; ++i) {
    RecordSpan span;
    span.target = tgt.groups[i];
    std::optional<std::size_t> link;
    if (!meta.source_links.empty()) link = meta.source_links[i];
    else if (i < src.groups.size()) link = i;
    if (link) {
      if (*link >= src.groups.size())
        throw Error(Errc::SchemaViolation, meta.id + ": source link " + std::to_string(*link) + " out of range");
      span.source = src.groups[*link];
      used[*link] = true;
    }
    if (!meta.span_types.empty()) span.types = meta.span_types[i];
    r.spans.push_back(std::move(span));
  }
  if (std::find(used.begin(), used.end(), false) != used.end())
    throw Error(Errc::SchemaViolation, meta.id + ": source bracket group not linked to any target span");
  return r;
}

std::string CorpusKey::label() const {
  auto dash = lang_pair.find('-');
  std::string tgt = dash == std::string::npos ? lang_pair : lang_pair.substr(dash + 1);
  std::transform(tgt.begin(), tgt.end(), tgt.begin(), [](unsigned char c) { return std::toupper(c); });
  return domain + "-" + tgt;
}

CorpusKey corpus_key(std::string_view record_id) {
  // <domain>-<src>2<tgt>-<index>
  auto first = record_id.find('-');
  if (first == std::string_view::npos) return {"UNKNOWN", "unknown"};
  auto second = record_id.find('-', first + 1);
  std::string_view langs = record_id.substr(first + 1, second == std::string_view::npos ? std::string_view::npos
                                                                                         : second - first - 1);
  auto two = langs.find('2');
  if (two == std::string_view::npos) return {"UNKNOWN", "unknown"};
  std::string domain(record_id.substr(0, first));
  std::transform(domain.begin(), domain.end(), domain.begin(), [](unsigned char c) { return std::toupper(c); });
  return {domain, std::string(langs.substr(0, two)) + "-" + std::string(langs.substr(two + 1))};
}

StatsTable corpus_stats(const std::vector<AnnotatedRecord>& records) {
  StatsTable table;
  for (const auto& r : records) {
    auto& row = table[corpus_key(r.id)];
    switch (r.dataset) {
      case Dataset::POOL: ++row.pool; break;
      case Dataset::EXTR: ++row.extr; break;
      case Dataset::TRAIN: ++row.train; break;
    }
    for (auto t : r.types) {
      switch (category_of(t)) {
        case Category::ENT: ++row.ent; break;
        case Category::SYS: ++row.sys; break;
        case Category::LING: ++row.ling; break;
        case Category::ADD: ++row.add; break;
      }
    }
  }
  return table;
}

std::string format_stats_table(const StatsTable& table) {
  std::ostringstream out;
  out << "corpus\tPOOL\tEXTR\tTRAIN\tENT\tSYS\tLING\tADD\n";
  for (const auto& [key, row] : table)
    out << key.label() << '\t' << row.pool << '\t' << row.extr << '\t' << row.train << '\t' << row.ent << '\t'
        << row.sys << '\t' << row.ling << '\t' << row.add << '\n';
  return out.str();
}

}  // namespace pragex
