#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pragex/schema.hpp"

namespace pragex {

using Json = nlohmann::ordered_json;

Json record_to_json(const AnnotatedRecord& record);
// Structural decode only; throws SchemaViolation on missing or mistyped fields.
AnnotatedRecord record_from_json(const Json& j);

std::string record_to_line(const AnnotatedRecord& record);

void write_records(const std::vector<AnnotatedRecord>& records, const std::filesystem::path& path);
// Each line must decode and pass validate(); failures name the 1-based line.
std::vector<AnnotatedRecord> read_records(const std::filesystem::path& path);

// JSON-lines helpers shared by the other file formats.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::vector<Json>& rows, const std::filesystem::path& path);

}  // namespace pragex
