#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pragex {

enum class Domain { TED, EUR, SYNTH };

std::string_view domain_name(Domain d);
Domain parse_domain(std::string_view name);

struct SentencePair {
  std::string id;
  std::string src_lang;
  std::string tgt_lang;
  std::string src_text;
  std::string tgt_text;
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  Domain domain = Domain::TED;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

// "ted-en2de-000123"
std::string make_pair_id(Domain domain, std::string_view src_lang, std::string_view tgt_lang,
                         std::size_t index);

struct Link {
  std::size_t src = 0;
  std::size_t tgt = 0;
  friend auto operator<=>(const Link&, const Link&) = default;
};

enum class AlignerTool { A, B, MERGED };

struct AlignmentSet {
  std::string pair_id;
  std::set<Link> links;
  AlignerTool source_tool = AlignerTool::A;

  friend bool operator==(const AlignmentSet&, const AlignmentSet&) = default;
};

using AlignmentMap = std::map<std::string, AlignmentSet>;

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<SentencePair> pairs);

  const std::vector<SentencePair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  const SentencePair* find(std::string_view id) const;
  const SentencePair& at(std::string_view id) const;

 private:
  std::vector<SentencePair> pairs_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Whitespace split, then leading and trailing punctuation characters are
// peeled off one per token. Never yields an empty token.
std::vector<std::string> tokenize(std::string_view text, std::string_view lang = {});

// True when the token carries at least one letter or digit.
bool has_alnum(std::string_view token);

Corpus load_parallel(const std::filesystem::path& src_path, const std::filesystem::path& tgt_path,
                     std::string_view src_lang, std::string_view tgt_lang, Domain domain);

// Parses one Pharaoh line ("0-0 1-2 ...") without bounds checks.
std::set<Link> parse_pharaoh_line(std::string_view line);
std::string format_pharaoh_line(const std::set<Link>& links);

AlignmentMap load_alignments(const std::filesystem::path& path, const Corpus& corpus, AlignerTool tool);

// Throws IndexOutOfBounds when a link leaves the pair's token ranges.
void check_alignment_bounds(const SentencePair& pair, const AlignmentSet& alignment);

AlignmentSet merge_alignments(const AlignmentSet& a, const AlignmentSet& b);

enum class AlignmentCombine { Union, Intersection };

AlignmentSet combine_alignments(const AlignmentSet& a, const AlignmentSet& b, AlignmentCombine mode);
AlignmentMap combine_alignment_maps(const AlignmentMap& a, const AlignmentMap& b, AlignmentCombine mode);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace pragex
