#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pragex {

enum class ALLabel { True, False, Discard };

std::string_view label_name(ALLabel label);
ALLabel parse_label(std::string_view name);

enum class Category { ENT, LING, SYS, ADD };

std::string_view category_name(Category c);

// Table order. OTHER has no category of its own and is counted under ADD.
enum class TypeTag {
  EntRep, EntDesc, EntSpec, EntHyp, EntAcr,
  Trans, LingExpl, Acr, Hyper, HypoSpec,
  MeasConv, MeasDim, MeasSpec, SysConv, SysDesc,
  AddInf, Clear, Deix, Other,
};

inline constexpr std::size_t kTypeTagCount = 19;
const std::array<TypeTag, kTypeTagCount>& all_type_tags();

Category category_of(TypeTag tag);
std::string_view type_name(TypeTag tag);         // "ENT-DESC"
std::string_view type_description(TypeTag tag);  // "Entity Description"
// Accepts the hyphenated form and the underscore variant ("ENT_DESC").
TypeTag parse_type_tag(std::string_view name);

enum class StyleTag { R, A };

std::string_view style_name(StyleTag s);
StyleTag parse_style(std::string_view name);

enum class Dataset { EXTR, POOL, TRAIN };

std::string_view dataset_name(Dataset d);
Dataset parse_dataset(std::string_view name);

// Half-open token range [start, end).
struct TokenRange {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  bool overlaps(const TokenRange& o) const noexcept { return start < o.end && o.start < end; }
  friend auto operator<=>(const TokenRange&, const TokenRange&) = default;
};

struct RecordSpan {
  TokenRange target;
  std::optional<TokenRange> source;
  // Optional per-span attribution; the record-level list is authoritative.
  std::vector<TypeTag> types;

  friend bool operator==(const RecordSpan&, const RecordSpan&) = default;
};

// source/target hold single-space-joined tokens; span indices refer to those
// tokens. Bracketed forms are produced by render_brackets.
struct AnnotatedRecord {
  std::string id;
  std::string source;
  std::string target;
  std::vector<RecordSpan> spans;
  std::vector<TypeTag> types;
  std::vector<StyleTag> styles;
  Dataset dataset = Dataset::EXTR;
  ALLabel al_label = ALLabel::False;

  friend bool operator==(const AnnotatedRecord&, const AnnotatedRecord&) = default;
};

std::vector<std::string> split_tokens(std::string_view text);
std::string join_tokens(const std::vector<std::string>& tokens);

struct Violation {
  std::string path;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// Empty result means the record is valid.
std::vector<Violation> validate(const AnnotatedRecord& record);
std::string format_violations(const std::vector<Violation>& violations);

struct BracketedText {
  std::string source;
  std::string target;
};

BracketedText render_brackets(const AnnotatedRecord& record);

// Everything parse_brackets cannot recover from markup alone.
struct RecordMeta {
  std::string id;
  Dataset dataset = Dataset::EXTR;
  ALLabel al_label = ALLabel::True;
  std::vector<TypeTag> types;
  std::vector<StyleTag> styles;
  std::vector<std::vector<TypeTag>> span_types;
  // For each target span, the index of its bracketed source group. When left
  // empty, target span i takes source group i while groups remain.
  std::vector<std::optional<std::size_t>> source_links;
};

RecordMeta meta_of(const AnnotatedRecord& record);
AnnotatedRecord parse_brackets(std::string_view source, std::string_view target, const RecordMeta& meta);

// (domain, language pair) as encoded in record ids, e.g. ("TED", "en-de").
struct CorpusKey {
  std::string domain;
  std::string lang_pair;

  std::string label() const;  // "TED-DE"
  friend auto operator<=>(const CorpusKey&, const CorpusKey&) = default;
};

CorpusKey corpus_key(std::string_view record_id);

struct StatsRow {
  std::size_t pool = 0;
  std::size_t extr = 0;
  std::size_t train = 0;
  std::size_t ent = 0;
  std::size_t sys = 0;
  std::size_t ling = 0;
  std::size_t add = 0;

  friend bool operator==(const StatsRow&, const StatsRow&) = default;
};

using StatsTable = std::map<CorpusKey, StatsRow>;

StatsTable corpus_stats(const std::vector<AnnotatedRecord>& records);
std::string format_stats_table(const StatsTable& table);

}  // namespace pragex
