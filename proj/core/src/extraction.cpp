#include "pragex/extraction.hpp"

#include <algorithm>
#include <future>

#include "pragex/error.hpp"

namespace pragex {

std::string_view side_name(Side side) { return side == Side::Src ? "SRC" : "TGT"; }

const std::vector<std::string>& allowed_ne_labels() {
  static const std::vector<std::string> labels = {"PERSON",  "NORP",  "FAC",         "ORG", "GPE",     "LOC",
                                                  "PRODUCT", "EVENT", "WORK_OF_ART", "LAW", "LANGUAGE"};
  return labels;
}

bool is_allowed_ne_label(std::string_view label) {
  const auto& labels = allowed_ne_labels();
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

bool is_content_pos(std::string_view pos) { return pos == "NOUN" || pos == "PRON" || pos == "PROPN"; }

std::vector<std::size_t> null_target_indices(const SentencePair& pair, const AlignmentSet& alignment) {
  std::vector<bool> aligned(pair.tgt_tokens.size(), false);
  for (const auto& l : alignment.links)
    if (l.tgt < aligned.size()) aligned[l.tgt] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < aligned.size(); ++i)
    if (!aligned[i]) out.push_back(i);
  return out;
}

std::vector<AdditionSpan> addition_spans(std::span<const std::size_t> indices, const SentencePair& pair) {
  std::vector<AdditionSpan> out;
  for (std::size_t i = 0; i < indices.size();) {
    std::size_t j = i + 1;
    while (j < indices.size() && indices[j] == indices[j - 1] + 1) ++j;
    AdditionSpan span{indices[i], indices[j - 1] + 1, {}};
    for (std::size_t k = span.start; k < span.end; ++k) span.tokens.push_back(pair.tgt_tokens.at(k));
    out.push_back(std::move(span));
    i = j;
  }
  return out;
}

namespace {

void check_tagger_output(const SentencePair& pair, std::size_t n, const std::vector<std::string>& pos,
                         const std::vector<NamedEntity>& ents) {
  if (pos.size() != n)
    throw Error(Errc::TaggerFailure, pair.id + ": POS output has " + std::to_string(pos.size()) + " tags for " +
                                         std::to_string(n) + " tokens");
  for (const auto& e : ents)
    if (e.start >= e.end || e.end > n) throw Error(Errc::TaggerFailure, pair.id + ": entity range out of bounds");
}

}  // namespace

std::optional<Candidate> filter_candidate(const SentencePair& pair, const AlignmentSet& alignment,
                                          const Tagger& tagger) {
  const auto nulls = null_target_indices(pair, alignment);
  if (nulls.empty()) return std::nullopt;

  std::vector<std::string> tgt_pos;
  std::vector<NamedEntity> src_ents, tgt_ents;
  try {
    tgt_pos = tagger.pos(pair.tgt_tokens, pair.tgt_lang);
    src_ents = tagger.ner(pair.src_tokens, pair.src_lang);
    tgt_ents = tagger.ner(pair.tgt_tokens, pair.tgt_lang);
  } catch (const Error& e) {
    if (e.code() == Errc::TaggerFailure) throw Error(Errc::TaggerFailure, pair.id + ": " + e.what());
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::TaggerFailure, pair.id + ": " + e.what());
  }
  check_tagger_output(pair, pair.tgt_tokens.size(), tgt_pos, tgt_ents);
  for (const auto& e : src_ents)
    if (e.start >= e.end || e.end > pair.src_tokens.size())
      throw Error(Errc::TaggerFailure, pair.id + ": entity range out of bounds");

  Candidate c;
  c.pair_id = pair.id;
  for (const auto& e : src_ents)
    if (is_allowed_ne_label(e.label)) c.ne_hits.push_back({Side::Src, e.label, {e.start, e.end}});
  for (const auto& e : tgt_ents)
    if (is_allowed_ne_label(e.label)) c.ne_hits.push_back({Side::Tgt, e.label, {e.start, e.end}});
  if (c.ne_hits.empty()) return std::nullopt;

  for (auto i : nulls)
    if (is_content_pos(tgt_pos[i]) && has_alnum(pair.tgt_tokens[i])) c.content_hits.push_back(i);
  if (c.content_hits.empty()) return std::nullopt;

  c.spans = addition_spans(nulls, pair);
  return c;
}

CandidateSet extract_corpus(const Corpus& corpus, const AlignmentMap& alignments, const Tagger& tagger,
                            const ExtractOptions& options) {
  for (const auto& p : corpus.pairs())
    if (!alignments.contains(p.id)) throw Error(Errc::MissingAlignment, p.id);

  const auto& pairs = corpus.pairs();
  std::vector<std::optional<Candidate>> results(pairs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& align = alignments.at(pairs[i].id);
      check_alignment_bounds(pairs[i], align);
      results[i] = filter_candidate(pairs[i], align, tagger);
    }
  };

  const unsigned threads = tagger.thread_safe() ? std::max(1u, options.threads) : 1u;
  if (threads == 1 || pairs.size() < 2 * threads) {
    work(0, pairs.size());
  } else {
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (pairs.size() + threads - 1) / threads;
    for (std::size_t b = 0; b < pairs.size(); b += chunk)
      jobs.push_back(std::async(std::launch::async, work, b, std::min(pairs.size(), b + chunk)));
    for (auto& j : jobs) j.get();
  }

  CandidateSet out;
  for (auto& r : results)
    if (r) out.candidates.push_back(std::move(*r));
  std::sort(out.candidates.begin(), out.candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.pair_id < b.pair_id; });
  out.stats.n_pairs = pairs.size();
  out.stats.n_candidates = out.candidates.size();
  out.stats.rate = pairs.empty() ? 0.0 : static_cast<double>(out.candidates.size()) / pairs.size();
  return out;
}

}  // namespace pragex
