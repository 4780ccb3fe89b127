#include "pragex/records_io.hpp"

#include <fstream>

#include "pragex/error.hpp"

namespace pragex {

namespace {

Json range_to_json(const TokenRange& r) { return Json{{"start", r.start}, {"end", r.end}}; }

TokenRange range_from_json(const Json& j) {
  return {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
}

Json types_to_json(const std::vector<TypeTag>& types) {
  Json out = Json::array();
  for (auto t : types) out.push_back(std::string(type_name(t)));
  return out;
}

std::vector<TypeTag> types_from_json(const Json& j) {
  std::vector<TypeTag> out;
  for (const auto& t : j) out.push_back(parse_type_tag(t.get<std::string>()));
  return out;
}

}  // namespace

Json record_to_json(const AnnotatedRecord& record) {
  Json spans = Json::array();
  for (const auto& s : record.spans) {
    Json span = range_to_json(s.target);
    span["source"] = s.source ? range_to_json(*s.source) : Json(nullptr);
    span["types"] = types_to_json(s.types);
    spans.push_back(std::move(span));
  }
  Json styles = Json::array();
  for (auto s : record.styles) styles.push_back(std::string(style_name(s)));
  return Json{
      {"id", record.id},
      {"source", record.source},
      {"target", record.target},
      {"spans", std::move(spans)},
      {"types", types_to_json(record.types)},
      {"styles", std::move(styles)},
      {"dataset", std::string(dataset_name(record.dataset))},
      {"al_label", std::string(label_name(record.al_label))},
  };
}

AnnotatedRecord record_from_json(const Json& j) {
  try {
    AnnotatedRecord r;
    r.id = j.at("id").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.target = j.at("target").get<std::string>();
    for (const auto& s : j.at("spans")) {
      RecordSpan span;
      span.target = range_from_json(s);
      if (s.contains("source") && !s.at("source").is_null()) span.source = range_from_json(s.at("source"));
      if (s.contains("types")) span.types = types_from_json(s.at("types"));
      r.spans.push_back(std::move(span));
    }
    r.types = types_from_json(j.at("types"));
    for (const auto& s : j.at("styles")) r.styles.push_back(parse_style(s.get<std::string>()));
    r.dataset = parse_dataset(j.at("dataset").get<std::string>());
    r.al_label = parse_label(j.at("al_label").get<std::string>());
    return r;
  } catch (const Json::exception& e) {
    throw Error(Errc::SchemaViolation, e.what());
  }
}

std::string record_to_line(const AnnotatedRecord& record) { return record_to_json(record).dump(); }

void write_records(const std::vector<AnnotatedRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  for (const auto& r : records) out << record_to_line(r) << '\n';
}

std::vector<AnnotatedRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  std::vector<AnnotatedRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(Errc::SchemaViolation, where + e.what());
    }
    AnnotatedRecord r;
    try {
      r = record_from_json(j);
    } catch (const Error& e) {
      throw Error(Errc::SchemaViolation, where + e.what());
    }
    if (auto v = validate(r); !v.empty()) throw Error(Errc::SchemaViolation, where + format_violations(v));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Error(Errc::SchemaViolation, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::vector<Json>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  for (const auto& r : rows) out << r.dump() << '\n';
}

}  // namespace pragex
