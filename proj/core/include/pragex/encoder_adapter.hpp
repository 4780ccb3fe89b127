#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "pragex/models.hpp"

namespace pragex {

// Drives an externally fine-tuned encoder through batch file exchange.
//
//   <command> fit <train.jsonl> <model_dir> --epochs <n> --seed <s>
//       train.jsonl rows: {"id", "text", "label"} with label 1 or 0
//   <command> predict <model_dir> <requests.jsonl> <responses.jsonl>
//       requests rows:  {"id", "text"}
//       responses rows: {"id", "p"}, same ids in the same order
//
// The command runs through /bin/sh. A non-zero exit is AdapterFailure, an
// overrun of the timeout is AdapterTimeout, and a response file with the
// wrong row count, mismatched ids or p outside [0, 1] is MalformedScores.
struct EncoderAdapterConfig {
  std::string command;  // empty: taken from $PRAGEX_ENCODER_CMD
  std::filesystem::path work_dir;
  std::chrono::milliseconds timeout{std::chrono::minutes(30)};
};

inline constexpr const char* kEncoderCommandEnv = "PRAGEX_ENCODER_CMD";

class EncoderAdapterClassifier final : public BinaryClassifier {
 public:
  explicit EncoderAdapterClassifier(EncoderAdapterConfig config);

  std::string kind() const override { return "encoder_adapter"; }
  void fit(std::span<const LabeledInput> data, int epochs, std::uint64_t seed) override;
  std::vector<ClassifierScore> predict(std::span<const ModelInput> inputs) const override;
  bool trained() const override { return trained_; }

  nlohmann::ordered_json snapshot() const override;
  void restore(const nlohmann::ordered_json& snapshot) override;

 private:
  EncoderAdapterConfig config_;
  bool trained_ = false;
  mutable unsigned calls_ = 0;
};

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
};

// Runs `/bin/sh -c command`; the child is killed when the timeout elapses.
ProcessResult run_command(const std::string& command, std::chrono::milliseconds timeout);

std::string shell_quote(const std::string& arg);

}  // namespace pragex
