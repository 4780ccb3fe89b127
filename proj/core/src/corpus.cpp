#include "pragex/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "pragex/error.hpp"

namespace pragex {

std::string_view domain_name(Domain d) {
  switch (d) {
    case Domain::TED: return "TED";
    case Domain::EUR: return "EUR";
    case Domain::SYNTH: return "SYNTH";
  }
  return "TED";
}

Domain parse_domain(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "TED") return Domain::TED;
  if (upper == "EUR" || upper == "EUROPARL") return Domain::EUR;
  if (upper == "SYNTH") return Domain::SYNTH;
  throw Error(Errc::InvalidConfig, "unknown domain '" + std::string(name) + "'");
}

std::string make_pair_id(Domain domain, std::string_view src_lang, std::string_view tgt_lang,
                         std::size_t index) {
  std::string prefix(domain_name(domain));
  std::transform(prefix.begin(), prefix.end(), prefix.begin(), [](unsigned char c) { return std::tolower(c); });
  char number[16];
  std::snprintf(number, sizeof number, "%06zu", index);
  return prefix + "-" + std::string(src_lang) + "2" + std::string(tgt_lang) + "-" + number;
}

Corpus::Corpus(std::vector<SentencePair> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (!index_.emplace(pairs_[i].id, i).second)
      throw Error(Errc::InvalidConfig, "duplicate pair id " + pairs_[i].id);
  }
}

const SentencePair* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &pairs_[it->second];
}

const SentencePair& Corpus::at(std::string_view id) const {
  if (const auto* p = find(id)) return *p;
  throw Error(Errc::MissingAlignment, "no pair with id " + std::string(id));
}

namespace {

// Multi-byte punctuation that commonly shows up in TED/Europarl text.
constexpr std::array<std::string_view, 14> kUnicodePunct = {
    "—", "–", "„", "“", "”", "‘", "’",
    "«", "»", "…", "¿", "¡", "‚", "‹",
};

std::size_t leading_punct(std::string_view s) {
  if (s.empty()) return 0;
  if (std::ispunct(static_cast<unsigned char>(s.front()))) return 1;
  for (auto p : kUnicodePunct)
    if (s.starts_with(p)) return p.size();
  return 0;
}

std::size_t trailing_punct(std::string_view s) {
  if (s.empty()) return 0;
  if (std::ispunct(static_cast<unsigned char>(s.back()))) return 1;
  for (auto p : kUnicodePunct)
    if (s.ends_with(p)) return p.size();
  return 0;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text, std::string_view /*lang*/) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    std::string_view word = text.substr(i, j - i);
    i = j;
    if (word.empty()) continue;

    std::vector<std::string> tail;
    while (std::size_t n = leading_punct(word)) {
      out.emplace_back(word.substr(0, n));
      word.remove_prefix(n);
    }
    while (std::size_t n = trailing_punct(word)) {
      tail.emplace_back(word.substr(word.size() - n));
      word.remove_suffix(n);
    }
    if (!word.empty()) out.emplace_back(word);
    out.insert(out.end(), std::make_move_iterator(tail.rbegin()), std::make_move_iterator(tail.rend()));
  }
  return out;
}

bool has_alnum(std::string_view token) {
  std::size_t i = 0;
  while (i < token.size()) {
    const auto c = static_cast<unsigned char>(token[i]);
    if (c < 0x80) {
      if (std::isalnum(c)) return true;
      ++i;
      continue;
    }
    std::size_t skip = 0;
    for (auto p : kUnicodePunct)
      if (token.substr(i).starts_with(p)) skip = p.size();
    // Non-ASCII text outside the punctuation table counts as a letter.
    if (skip == 0) return true;
    i += skip;
  }
  return false;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

Corpus load_parallel(const std::filesystem::path& src_path, const std::filesystem::path& tgt_path,
                     std::string_view src_lang, std::string_view tgt_lang, Domain domain) {
  auto src = read_lines(src_path);
  auto tgt = read_lines(tgt_path);
  if (src.empty()) throw Error(Errc::EmptyFile, src_path.string());
  if (tgt.empty()) throw Error(Errc::EmptyFile, tgt_path.string());
  if (src.size() != tgt.size())
    throw Error(Errc::LineCountMismatch, src_path.string() + " has " + std::to_string(src.size()) +
                                             " lines, " + tgt_path.string() + " has " +
                                             std::to_string(tgt.size()));
  std::vector<SentencePair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    SentencePair p;
    p.id = make_pair_id(domain, src_lang, tgt_lang, i);
    p.src_lang = src_lang;
    p.tgt_lang = tgt_lang;
    p.src_text = std::move(src[i]);
    p.tgt_text = std::move(tgt[i]);
    p.src_tokens = tokenize(p.src_text, src_lang);
    p.tgt_tokens = tokenize(p.tgt_text, tgt_lang);
    p.domain = domain;
    pairs.push_back(std::move(p));
  }
  return Corpus(std::move(pairs));
}

namespace {

bool parse_index(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::set<Link> parse_pharaoh_line(std::string_view line) {
  std::set<Link> links;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    std::string_view tok = line.substr(i, j - i);
    i = j;
    if (tok.empty()) continue;
    auto dash = tok.find('-');
    Link link;
    if (dash == std::string_view::npos || !parse_index(tok.substr(0, dash), link.src) ||
        !parse_index(tok.substr(dash + 1), link.tgt))
      throw Error(Errc::MalformedLink, "'" + std::string(tok) + "'");
    links.insert(link);
  }
  return links;
}

std::string format_pharaoh_line(const std::set<Link>& links) {
  std::string out;
  for (const auto& l : links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(l.src) + "-" + std::to_string(l.tgt);
  }
  return out;
}

void check_alignment_bounds(const SentencePair& pair, const AlignmentSet& alignment) {
  for (const auto& l : alignment.links) {
    if (l.src >= pair.src_tokens.size() || l.tgt >= pair.tgt_tokens.size())
      throw Error(Errc::IndexOutOfBounds, pair.id + ": link " + std::to_string(l.src) + "-" +
                                              std::to_string(l.tgt) + " outside " +
                                              std::to_string(pair.src_tokens.size()) + "x" +
                                              std::to_string(pair.tgt_tokens.size()));
  }
}

AlignmentMap load_alignments(const std::filesystem::path& path, const Corpus& corpus, AlignerTool tool) {
  auto lines = read_lines(path);
  if (lines.size() != corpus.size())
    throw Error(Errc::LineCountMismatch, path.string() + " has " + std::to_string(lines.size()) +
                                             " lines, corpus has " + std::to_string(corpus.size()));
  AlignmentMap out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& pair = corpus.pairs()[i];
    AlignmentSet set;
    set.pair_id = pair.id;
    set.source_tool = tool;
    try {
      set.links = parse_pharaoh_line(lines[i]);
    } catch (const Error& e) {
      throw Error(Errc::MalformedLink, path.string() + ":" + std::to_string(i + 1) + " (" + pair.id +
                                           ") " + e.what());
    }
    check_alignment_bounds(pair, set);
    out.emplace(pair.id, std::move(set));
  }
  return out;
}

AlignmentSet merge_alignments(const AlignmentSet& a, const AlignmentSet& b) {
  return combine_alignments(a, b, AlignmentCombine::Union);
}

AlignmentSet combine_alignments(const AlignmentSet& a, const AlignmentSet& b, AlignmentCombine mode) {
  if (a.pair_id != b.pair_id) throw Error(Errc::PairMismatch, a.pair_id + " vs " + b.pair_id);
  AlignmentSet out;
  out.pair_id = a.pair_id;
  out.source_tool = AlignerTool::MERGED;
  if (mode == AlignmentCombine::Union) {
    std::set_union(a.links.begin(), a.links.end(), b.links.begin(), b.links.end(),
                   std::inserter(out.links, out.links.end()));
  } else {
    std::set_intersection(a.links.begin(), a.links.end(), b.links.begin(), b.links.end(),
                          std::inserter(out.links, out.links.end()));
  }
  return out;
}

AlignmentMap combine_alignment_maps(const AlignmentMap& a, const AlignmentMap& b, AlignmentCombine mode) {
  AlignmentMap out;
  for (const auto& [id, set] : a) {
    auto it = b.find(id);
    if (it == b.end()) throw Error(Errc::MissingAlignment, id + " missing from second aligner");
    out.emplace(id, combine_alignments(set, it->second, mode));
  }
  if (b.size() != a.size()) {
    for (const auto& [id, _] : b)
      if (!a.contains(id)) throw Error(Errc::MissingAlignment, id + " missing from first aligner");
  }
  return out;
}

}  // namespace pragex
