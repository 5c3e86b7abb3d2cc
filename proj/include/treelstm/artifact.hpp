#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "treelstm/model.hpp"

namespace treelstm {

inline constexpr int kModelFormatVersion = 1;

// A trained model plus the bookkeeping needed to interpret it without the
// original configuration.
struct ModelArtifact {
  ModelParams params;
  std::size_t best_epoch = 0;
  double dev_accuracy = 0.0;
  std::string manifest;  // path of the run manifest, relative to the artifact

  bool operator==(const ModelArtifact&) const = default;
};

// File layout:
//
//   treelstm-model <version>\n
//   task <fine|binary>\n  classes <n>\n  model <rnn|lstm>\n  activation <name>\n
//   d <n>\n  d_w <n>\n  embeddings_trainable <0|1>\n  lowercase_fallback <0|1>\n
//   best_epoch <n>\n  dev_accuracy <decimal>\n  manifest <path>\n
//   vocab <V>\n followed by V token lines (row order, index 0 is <unk>)
//   tensors <T>\n followed by T "<name> <element count>" lines
//   end\n
//
// then the payload: each listed tensor (canonical for_each_tensor order, then
// the V x d_w embedding table "embeddings") as little-endian IEEE-754 binary64
// values, row-major, with no padding.
void save_model(const ModelArtifact& artifact, std::ostream& out);
ModelArtifact load_model(std::istream& in);

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

}  // namespace treelstm
