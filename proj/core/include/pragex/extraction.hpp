#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pragex/corpus.hpp"
#include "pragex/schema.hpp"
#include "pragex/tagger.hpp"

namespace pragex {

// A maximal run of consecutive unaligned target tokens, [start, end).
struct AdditionSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<std::string> tokens;

  friend bool operator==(const AdditionSpan&, const AdditionSpan&) = default;
};

enum class Side { Src, Tgt };

std::string_view side_name(Side side);

struct NeHit {
  Side side = Side::Src;
  std::string label;
  TokenRange range;

  friend bool operator==(const NeHit&, const NeHit&) = default;
};

struct Candidate {
  std::string pair_id;
  std::vector<AdditionSpan> spans;
  std::vector<NeHit> ne_hits;
  std::vector<std::size_t> content_hits;  // unaligned target indices tagged NOUN/PRON/PROPN
  Dataset dataset = Dataset::EXTR;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// PERSON, NORP, FAC, ORG, GPE, LOC, PRODUCT, EVENT, WORK_OF_ART, LAW, LANGUAGE
bool is_allowed_ne_label(std::string_view label);
const std::vector<std::string>& allowed_ne_labels();

// NOUN, PRON, PROPN
bool is_content_pos(std::string_view pos);

std::vector<std::size_t> null_target_indices(const SentencePair& pair, const AlignmentSet& alignment);

std::vector<AdditionSpan> addition_spans(std::span<const std::size_t> indices, const SentencePair& pair);

// Tagger errors are rethrown as TaggerFailure carrying the pair id.
std::optional<Candidate> filter_candidate(const SentencePair& pair, const AlignmentSet& alignment,
                                          const Tagger& tagger);

struct ExtractionStats {
  std::size_t n_pairs = 0;
  std::size_t n_candidates = 0;
  double rate = 0.0;
};

struct CandidateSet {
  std::vector<Candidate> candidates;  // ordered by pair id
  ExtractionStats stats;
};

struct ExtractOptions {
  // Worker threads; ignored (serial) when the tagger is not thread safe.
  unsigned threads = 1;
};

CandidateSet extract_corpus(const Corpus& corpus, const AlignmentMap& alignments, const Tagger& tagger,
                            const ExtractOptions& options = {});

}  // namespace pragex
