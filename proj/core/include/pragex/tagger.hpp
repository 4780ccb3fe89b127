#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pragex {

struct NamedEntity {
  std::string label;  // OntoNotes-style label, e.g. "PERSON"
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const NamedEntity&, const NamedEntity&) = default;
};

// POS tags use the Universal POS tag set. Implementations must be
// deterministic per input; thread_safe() tells the extractor whether it may
// call concurrently.
class Tagger {
 public:
  virtual ~Tagger() = default;

  virtual std::vector<std::string> pos(std::span<const std::string> tokens, std::string_view lang) const = 0;
  virtual std::vector<NamedEntity> ner(std::span<const std::string> tokens, std::string_view lang) const = 0;
  virtual bool thread_safe() const { return false; }
};

// Dictionary-backed tagger for tests and small fixtures.
//
// Lexicon file: one entry per line, tab separated
//   lang  token  POS  [NE-label]
// lang "*" applies to every language. Lookup tries the exact token, then its
// lowercase form. Unknown tokens get PUNCT (no letters or digits), NUM
// (leading digit) or X. Consecutive tokens with the same NE label form one
// entity.
class LexiconTagger final : public Tagger {
 public:
  struct Entry {
    std::string pos;
    std::string ne;
  };

  LexiconTagger() = default;
  static LexiconTagger from_file(const std::filesystem::path& path);

  void add(std::string_view lang, std::string_view token, std::string_view pos, std::string_view ne = {});

  std::vector<std::string> pos(std::span<const std::string> tokens, std::string_view lang) const override;
  std::vector<NamedEntity> ner(std::span<const std::string> tokens, std::string_view lang) const override;
  bool thread_safe() const override { return true; }

 private:
  const Entry* lookup(const std::string& token, std::string_view lang) const;
  void require_language(std::string_view lang) const;

  std::map<std::string, std::map<std::string, Entry, std::less<>>, std::less<>> entries_;
};

}  // namespace pragex
