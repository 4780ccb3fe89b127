#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pragex/instances.hpp"
#include "pragex/schema.hpp"
#include "pragex/tagger.hpp"

namespace pragex {

// Generator for synthetic bitext with a hidden explicitation rule.
//
// A pair is positive when some maximal run of unaligned target tokens holds a
// bracket token together with a unit token or a named-entity token. Target
// sentences are built from phrase segments; distractor segments put brackets,
// units and entities into the sentence without satisfying the rule, and an
// aligner-noise step drops and adds links at random.
struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::string src_lang = "en";
  std::string tgt_lang = "de";
  Domain domain = Domain::SYNTH;

  std::size_t pool_size = 5000;
  double pool_positive_rate = 0.03;
  // Share of pool negatives that carry a distractor addition.
  double pool_hard_negative_rate = 0.25;

  // Candidate-like records with gold labels, used for seed and test splits.
  std::size_t annotated_size = 400;
  double annotated_positive_rate = 0.15;
  double annotated_hard_negative_rate = 0.50;

  // Chance that a positive also carries a distractor, and that a distractor
  // pair carries a second one.
  double positive_distractor_rate = 0.3;
  double second_distractor_rate = 0.25;
  // Chance of an unlinked particle after each verb.
  double particle_rate = 0.2;

  // Per-link drop probability and per-pair chance of one spurious link.
  double link_drop_rate = 0.04;
  double spurious_link_rate = 0.15;
};

struct SyntheticData {
  std::vector<Instance> instances;        // annotated first, then pool
  std::vector<std::string> pool_ids;      // unlabeled ids
  std::vector<AnnotatedRecord> annotated; // gold records for the annotated ids
};

// The lexicon every synthetic sentence is drawn from.
const LexiconTagger& synthetic_tagger();

SyntheticData generate_synthetic(const SyntheticConfig& config);

// Applies the hidden rule; TRUE records mark each qualifying span.
AnnotatedRecord synthetic_oracle(const Instance& instance);
bool synthetic_rule(const Instance& instance);

}  // namespace pragex
