#include "pragex/encoder_adapter.hpp"

#include <cmath>
#include <csignal>
#include <cstdlib>
#include <thread>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "pragex/error.hpp"
#include "pragex/records_io.hpp"

namespace pragex {

std::string shell_quote(const std::string& arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

ProcessResult run_command(const std::string& command, std::chrono::milliseconds timeout) {
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(Errc::AdapterFailure, "fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int status = 0;
  while (true) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error(Errc::AdapterFailure, "waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return {-1, true};
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, false};
}

EncoderAdapterClassifier::EncoderAdapterClassifier(EncoderAdapterConfig config) : config_(std::move(config)) {
  if (config_.command.empty()) {
    if (const char* env = std::getenv(kEncoderCommandEnv)) config_.command = env;
  }
  if (config_.command.empty())
    throw Error(Errc::InvalidConfig, std::string("no encoder command configured and $") + kEncoderCommandEnv + " unset");
  if (config_.work_dir.empty()) config_.work_dir = std::filesystem::temp_directory_path() / "pragex-encoder";
  std::filesystem::create_directories(config_.work_dir);
}

namespace {

void check_run(const ProcessResult& r, const std::string& what, std::chrono::milliseconds timeout) {
  if (r.timed_out)
    throw Error(Errc::AdapterTimeout, what + " exceeded " + std::to_string(timeout.count()) + " ms");
  if (r.exit_code != 0) throw Error(Errc::AdapterFailure, what + " exited with " + std::to_string(r.exit_code));
}

}  // namespace

void EncoderAdapterClassifier::fit(std::span<const LabeledInput> data, int epochs, std::uint64_t seed) {
  std::vector<Json> rows;
  for (const auto& d : data) {
    if (d.label == ALLabel::Discard) continue;
    rows.push_back({{"id", d.input.packed.pair_id}, {"text", d.input.packed.text}, {"label", d.label == ALLabel::True ? 1 : 0}});
  }
  const auto train = config_.work_dir / "train.jsonl";
  const auto model = config_.work_dir / "model";
  write_jsonl(rows, train);
  std::filesystem::create_directories(model);
  const std::string cmd = config_.command + " fit " + shell_quote(train.string()) + " " + shell_quote(model.string()) +
                          " --epochs " + std::to_string(epochs) + " --seed " + std::to_string(seed);
  check_run(run_command(cmd, config_.timeout), "encoder fit", config_.timeout);
  trained_ = true;
}

std::vector<ClassifierScore> EncoderAdapterClassifier::predict(std::span<const ModelInput> inputs) const {
  if (!trained_) throw Error(Errc::InvalidState, "encoder adapter used before fit");
  const auto tag = std::to_string(calls_++);
  const auto requests = config_.work_dir / ("requests-" + tag + ".jsonl");
  const auto responses = config_.work_dir / ("responses-" + tag + ".jsonl");
  std::vector<Json> rows;
  for (const auto& in : inputs) rows.push_back({{"id", in.packed.pair_id}, {"text", in.packed.text}});
  write_jsonl(rows, requests);
  std::filesystem::remove(responses);
  const std::string cmd = config_.command + " predict " + shell_quote((config_.work_dir / "model").string()) + " " +
                          shell_quote(requests.string()) + " " + shell_quote(responses.string());
  check_run(run_command(cmd, config_.timeout), "encoder predict", config_.timeout);

  std::vector<Json> got;
  try {
    got = read_jsonl(responses);
  } catch (const Error& e) {
    throw Error(Errc::MalformedScores, e.what());
  }
  if (got.size() != inputs.size())
    throw Error(Errc::MalformedScores, std::to_string(got.size()) + " scores for " + std::to_string(inputs.size()) + " requests");
  std::vector<ClassifierScore> out;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto& g = got[i];
    if (!g.contains("id") || !g.contains("p") || !g["p"].is_number())
      throw Error(Errc::MalformedScores, "row " + std::to_string(i + 1) + " lacks id or numeric p");
    if (g["id"] != inputs[i].packed.pair_id)
      throw Error(Errc::MalformedScores, "row " + std::to_string(i + 1) + " id does not match request order");
    const double p = g["p"].get<double>();
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw Error(Errc::MalformedScores, "row " + std::to_string(i + 1) + " p out of range");
    out.push_back({p});
  }
  return out;
}

nlohmann::ordered_json EncoderAdapterClassifier::snapshot() const {
  return {{"kind", kind()}, {"model_dir", (config_.work_dir / "model").string()}, {"trained", trained_}};
}

void EncoderAdapterClassifier::restore(const nlohmann::ordered_json& snapshot) {
  if (snapshot.at("kind").get<std::string>() != kind())
    throw Error(Errc::InvalidState, "snapshot is not an encoder adapter model");
  trained_ = snapshot.at("trained").get<bool>();
}

}  // namespace pragex
