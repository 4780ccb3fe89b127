#include "pragex/tagger.hpp"

#include <algorithm>
#include <cctype>

#include "pragex/corpus.hpp"
#include "pragex/error.hpp"
#include "pragex/schema.hpp"

namespace pragex {

LexiconTagger LexiconTagger::from_file(const std::filesystem::path& path) {
  LexiconTagger tagger;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() < 3 || cols.size() > 4 || cols[1].empty())
      throw Error(Errc::InvalidConfig, path.string() + ":" + std::to_string(lineno) + ": expected lang, token, POS[, NE]");
    tagger.add(cols[0], cols[1], cols[2], cols.size() == 4 ? cols[3] : std::string());
  }
  return tagger;
}

void LexiconTagger::add(std::string_view lang, std::string_view token, std::string_view pos, std::string_view ne) {
  entries_[std::string(lang)][std::string(token)] = Entry{std::string(pos), std::string(ne)};
}

void LexiconTagger::require_language(std::string_view lang) const {
  if (!entries_.contains(lang) && !entries_.contains("*"))
    throw Error(Errc::TaggerFailure, "lexicon has no entries for language '" + std::string(lang) + "'");
}

const LexiconTagger::Entry* LexiconTagger::lookup(const std::string& token, std::string_view lang) const {
  std::string lower = token;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (std::string_view l : {lang, std::string_view("*")}) {
    auto it = entries_.find(l);
    if (it == entries_.end()) continue;
    if (auto e = it->second.find(token); e != it->second.end()) return &e->second;
    if (auto e = it->second.find(lower); e != it->second.end()) return &e->second;
  }
  return nullptr;
}

std::vector<std::string> LexiconTagger::pos(std::span<const std::string> tokens, std::string_view lang) const {
  require_language(lang);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (const auto* e = lookup(t, lang)) out.push_back(e->pos);
    else if (!has_alnum(t)) out.emplace_back("PUNCT");
    else if (std::isdigit(static_cast<unsigned char>(t.front()))) out.emplace_back("NUM");
    else out.emplace_back("X");
  }
  return out;
}

std::vector<NamedEntity> LexiconTagger::ner(std::span<const std::string> tokens, std::string_view lang) const {
  require_language(lang);
  std::vector<NamedEntity> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto* e = lookup(tokens[i], lang);
    if (!e || e->ne.empty()) continue;
    if (!out.empty() && out.back().end == i && out.back().label == e->ne) out.back().end = i + 1;
    else out.push_back({e->ne, i, i + 1});
  }
  return out;
}

}  // namespace pragex
