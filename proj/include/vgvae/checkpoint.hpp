#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vgvae/autodiff.hpp"
#include "vgvae/config.hpp"
#include "vgvae/data_io.hpp"
#include "vgvae/model.hpp"
#include "vgvae/objectives.hpp"

namespace vgvae {

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<double> data;
  bool operator==(const NamedTensor&) const = default;
};

/// Optimizer and loop position needed to continue a run exactly.
struct TrainState {
  int epoch = 1;                      // 1-based epoch in progress
  std::size_t batch_in_epoch = 0;     // next mini-batch within the epoch
  std::uint64_t step = 0;             // optimizer steps taken
  std::vector<std::size_t> order;     // pair permutation of the current epoch
  std::string rng;                    // serialized generator state
  std::uint64_t adam_t = 0;
  std::vector<NamedTensor> adam_m, adam_v;
  std::vector<std::vector<MegaBatch::Entry>> megabatch;
  double best_dev = 0.0;
  int best_epoch = 0;                 // 0 when no dev score was recorded
  bool operator==(const TrainState&) const = default;
};

inline bool operator==(const MegaBatch::Entry& a, const MegaBatch::Entry& b) {
  return a.key == b.key && a.partner == b.partner && a.sentence == b.sentence && a.direction == b.direction;
}

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  RunConfig config;
  Vocab vocab;
  std::vector<NamedTensor> params;
  TrainState state;
  bool operator==(const Checkpoint&) const = default;
};

std::vector<NamedTensor> snapshot(const std::vector<Parameter>& params);

/// Rebuild the model stored in a checkpoint. Throws CheckpointError when a
/// tensor is missing or has the wrong shape.
Model restore_model(const Checkpoint& c);

/// Little-endian binary: "VGV1", version, config text, vocabulary, named
/// parameter tensors, then the training state.
std::string encode_checkpoint(const Checkpoint& c);
/// Throws CheckpointError with the byte offset of the first problem.
Checkpoint decode_checkpoint(const std::string& bytes);

/// Written to a temporary file and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vgvae
