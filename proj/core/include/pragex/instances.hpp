#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pragex/corpus.hpp"
#include "pragex/extraction.hpp"
#include "pragex/models.hpp"
#include "pragex/records_io.hpp"

namespace pragex {

// A sentence pair with everything the learning loop needs precomputed, so
// that the engine never calls a tagger.
struct Instance {
  SentencePair pair;
  AlignmentSet alignment;
  std::vector<AdditionSpan> spans;
  FeatureVector features;
  std::optional<Candidate> candidate;  // present for extracted candidates

  friend bool operator==(const Instance&, const Instance&) = default;
};

Instance make_instance(const SentencePair& pair, const AlignmentSet& alignment, const Tagger& tagger);

// One JSON object per line:
//   {id, domain, src_lang, tgt_lang, source, target, src_tokens, tgt_tokens,
//    links: [[s, t], ...], spans: [{start, end}], features: {...},
//    candidate?: {ne_hits: [{side, label, start, end}], content_hits, dataset}}
Json instance_to_json(const Instance& instance);
Instance instance_from_json(const Json& j);

std::vector<Instance> read_instances(const std::filesystem::path& path);
void write_instances(const std::vector<Instance>& instances, const std::filesystem::path& path);

class InstanceStore {
 public:
  InstanceStore() = default;
  explicit InstanceStore(std::vector<Instance> instances);

  void add(Instance instance);
  const Instance* find(const std::string& id) const;
  const Instance& at(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.contains(id); }
  std::size_t size() const noexcept { return instances_.size(); }
  const std::vector<Instance>& all() const noexcept { return instances_; }

  ModelInput model_input(const std::string& id, std::string_view separator = kDefaultSeparator) const;

 private:
  std::vector<Instance> instances_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Unlabeled record shell for an instance: tokens joined by single spaces.
AnnotatedRecord blank_record(const Instance& instance, Dataset dataset, ALLabel label = ALLabel::False);

}  // namespace pragex
