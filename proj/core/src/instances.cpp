#include "pragex/instances.hpp"

#include "pragex/error.hpp"

namespace pragex {

Instance make_instance(const SentencePair& pair, const AlignmentSet& alignment, const Tagger& tagger) {
  Instance inst;
  inst.pair = pair;
  inst.alignment = alignment;
  const auto nulls = null_target_indices(pair, alignment);
  inst.spans = addition_spans(nulls, pair);
  inst.features = featurize(pair, alignment, tagger);
  return inst;
}

Json instance_to_json(const Instance& inst) {
  Json links = Json::array();
  for (const auto& l : inst.alignment.links) links.push_back(Json::array({l.src, l.tgt}));
  Json spans = Json::array();
  for (const auto& s : inst.spans) spans.push_back({{"start", s.start}, {"end", s.end}});
  Json j = {
      {"id", inst.pair.id},
      {"domain", std::string(domain_name(inst.pair.domain))},
      {"src_lang", inst.pair.src_lang},
      {"tgt_lang", inst.pair.tgt_lang},
      {"source", inst.pair.src_text},
      {"target", inst.pair.tgt_text},
      {"src_tokens", inst.pair.src_tokens},
      {"tgt_tokens", inst.pair.tgt_tokens},
      {"links", std::move(links)},
      {"spans", std::move(spans)},
      {"features", features_to_json(inst.features)},
  };
  if (inst.candidate) {
    Json hits = Json::array();
    for (const auto& h : inst.candidate->ne_hits)
      hits.push_back({{"side", std::string(side_name(h.side))}, {"label", h.label}, {"start", h.range.start}, {"end", h.range.end}});
    j["candidate"] = {{"ne_hits", std::move(hits)},
                      {"content_hits", inst.candidate->content_hits},
                      {"dataset", std::string(dataset_name(inst.candidate->dataset))}};
  }
  return j;
}

Instance instance_from_json(const Json& j) {
  try {
    Instance inst;
    auto& p = inst.pair;
    p.id = j.at("id").get<std::string>();
    p.domain = parse_domain(j.at("domain").get<std::string>());
    p.src_lang = j.at("src_lang").get<std::string>();
    p.tgt_lang = j.at("tgt_lang").get<std::string>();
    p.src_text = j.at("source").get<std::string>();
    p.tgt_text = j.at("target").get<std::string>();
    p.src_tokens = j.at("src_tokens").get<std::vector<std::string>>();
    p.tgt_tokens = j.at("tgt_tokens").get<std::vector<std::string>>();
    inst.alignment.pair_id = p.id;
    inst.alignment.source_tool = AlignerTool::MERGED;
    for (const auto& l : j.at("links")) inst.alignment.links.insert({l.at(0).get<std::size_t>(), l.at(1).get<std::size_t>()});
    check_alignment_bounds(p, inst.alignment);
    for (const auto& s : j.at("spans")) {
      AdditionSpan span{s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>(), {}};
      if (span.start >= span.end || span.end > p.tgt_tokens.size())
        throw Error(Errc::SchemaViolation, p.id + ": addition span out of bounds");
      for (auto k = span.start; k < span.end; ++k) span.tokens.push_back(p.tgt_tokens[k]);
      inst.spans.push_back(std::move(span));
    }
    inst.features = features_from_json(j.at("features"));
    if (j.contains("candidate")) {
      Candidate c;
      c.pair_id = p.id;
      c.spans = inst.spans;
      const auto& cj = j.at("candidate");
      for (const auto& h : cj.at("ne_hits"))
        c.ne_hits.push_back({h.at("side").get<std::string>() == "SRC" ? Side::Src : Side::Tgt, h.at("label").get<std::string>(),
                             {h.at("start").get<std::size_t>(), h.at("end").get<std::size_t>()}});
      c.content_hits = cj.at("content_hits").get<std::vector<std::size_t>>();
      c.dataset = parse_dataset(cj.at("dataset").get<std::string>());
      inst.candidate = std::move(c);
    }
    return inst;
  } catch (const Json::exception& e) {
    throw Error(Errc::SchemaViolation, e.what());
  }
}

std::vector<Instance> read_instances(const std::filesystem::path& path) {
  std::vector<Instance> out;
  std::size_t line = 0;
  for (const auto& j : read_jsonl(path)) {
    ++line;
    try {
      out.push_back(instance_from_json(j));
    } catch (const Error& e) {
      throw Error(Errc::SchemaViolation, path.string() + ": row " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

void write_instances(const std::vector<Instance>& instances, const std::filesystem::path& path) {
  std::vector<Json> rows;
  rows.reserve(instances.size());
  for (const auto& i : instances) rows.push_back(instance_to_json(i));
  write_jsonl(rows, path);
}

InstanceStore::InstanceStore(std::vector<Instance> instances) {
  for (auto& i : instances) add(std::move(i));
}

void InstanceStore::add(Instance instance) {
  const std::string id = instance.pair.id;
  if (!index_.emplace(id, instances_.size()).second) throw Error(Errc::InvalidConfig, "duplicate instance id " + id);
  instances_.push_back(std::move(instance));
}

const Instance* InstanceStore::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &instances_[it->second];
}

const Instance& InstanceStore::at(const std::string& id) const {
  if (const auto* i = find(id)) return *i;
  throw Error(Errc::InvalidState, "unknown instance " + id);
}

ModelInput InstanceStore::model_input(const std::string& id, std::string_view separator) const {
  const auto& inst = at(id);
  return {pack(inst.pair, separator), inst.features};
}

AnnotatedRecord blank_record(const Instance& instance, Dataset dataset, ALLabel label) {
  AnnotatedRecord r;
  r.id = instance.pair.id;
  r.source = join_tokens(instance.pair.src_tokens);
  r.target = join_tokens(instance.pair.tgt_tokens);
  r.dataset = dataset;
  r.al_label = label;
  return r;
}

}  // namespace pragex
