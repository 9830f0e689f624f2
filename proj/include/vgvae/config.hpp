#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vgvae/model.hpp"
#include "vgvae/objectives.hpp"

namespace vgvae {

struct TrainConfig {
  std::size_t batch_size = 32;
  int epochs = 10;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  /// Steps between periodic checkpoints (0 disables them).
  std::size_t checkpoint_every = 0;
  /// STS-format file scored after every epoch for model selection.
  std::string dev_path;
  /// Shuffle the words of every training sentence (order-free baseline).
  bool scramble = false;
  std::size_t min_count = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Every setting of a run. Text form is flat "key=value" lines; '#' starts
/// a comment.
struct RunConfig {
  ModelConfig model;
  LossConfig loss;
  TrainConfig train;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Known keys, in canonical order.
const std::vector<std::string>& config_keys();

/// Throws ConfigError for unknown keys or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
/// Apply every line of a key=value text. Errors name the line number.
void apply_text(RunConfig& cfg, const std::string& text, const std::string& source = "config");
void apply_file(RunConfig& cfg, const std::filesystem::path& path);

/// Canonical text: every key, one per line, values printed exactly
/// (doubles round-trip).
std::string to_text(const RunConfig& cfg);
RunConfig from_text(const std::string& text);

/// Value of VGVAE_SEED when set; ConfigError if it is not an integer.
std::optional<std::uint64_t> seed_from_env();

}  // namespace vgvae
