#include "pragex/journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pragex/error.hpp"

namespace pragex {

namespace {

[[noreturn]] void io_error(const std::string& what, const std::filesystem::path& path) {
  throw Error(Errc::InvalidState, what + " " + path.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& data, const std::filesystem::path& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("write", path);
    }
    done += static_cast<std::size_t>(n);
  }
}

void fsync_dir(const std::filesystem::path& dir) {
  const int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  repair_journal(path_);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) io_error("open", path_);
  fsync_dir(path_.parent_path());
}

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

void Journal::append(const nlohmann::ordered_json& event) {
  write_all(fd_, event.dump() + "\n", path_);
  if (::fsync(fd_) != 0) io_error("fsync", path_);
}

JournalContents read_journal(const std::filesystem::path& path) {
  JournalContents out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < data.size()) {
    const auto nl = data.find('\n', start);
    if (nl == std::string::npos) {
      out.torn_bytes = data.size() - start;
      break;
    }
    ++line_no;
    const std::string_view line(data.data() + start, nl - start);
    if (!line.empty()) {
      try {
        out.events.push_back(nlohmann::ordered_json::parse(line));
      } catch (const nlohmann::ordered_json::exception& e) {
        throw Error(Errc::InvalidState, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    start = nl + 1;
  }
  return out;
}

void repair_journal(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return;
  const auto contents = read_journal(path);
  if (contents.torn_bytes == 0) return;
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - contents.torn_bytes);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_error("open", tmp);
  write_all(fd, contents, tmp);
  if (::fsync(fd) != 0) {
    ::close(fd);
    io_error("fsync", tmp);
  }
  ::close(fd);
  std::filesystem::rename(tmp, path);
  fsync_dir(path.parent_path());
}

}  // namespace pragex
