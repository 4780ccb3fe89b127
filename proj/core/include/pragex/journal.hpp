#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pragex {

// Append-only JSON-lines file. append() returns only after the line has
// reached the disk (fsync), so a caller may acknowledge the write.
class Journal {
 public:
  explicit Journal(std::filesystem::path path);
  ~Journal();
  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  void append(const nlohmann::ordered_json& event);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

struct JournalContents {
  std::vector<nlohmann::ordered_json> events;
  // Bytes after the last complete line, left by a crash mid-append.
  std::size_t torn_bytes = 0;
};

// Reads every complete line. A trailing partial line is reported, not
// parsed; a malformed complete line throws InvalidState.
JournalContents read_journal(const std::filesystem::path& path);

// Drops a torn tail so the next append starts on a fresh line.
void repair_journal(const std::filesystem::path& path);

// Writes via a temporary file, fsync and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace pragex
