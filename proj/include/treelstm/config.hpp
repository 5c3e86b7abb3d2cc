#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "treelstm/training.hpp"

namespace treelstm {

using KeyValues = std::map<std::string, std::string>;

// Flat `key=value` lines; blank lines and lines starting with '#' are skipped.
// Throws ConfigError naming the line on malformed input or duplicate keys.
KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);

// Applies TrainConfig fields found in `values` on top of `base`. Unknown keys
// are rejected.
TrainConfig apply_config(const KeyValues& values, TrainConfig base = {});
KeyValues config_to_key_values(const TrainConfig& config);
std::string to_text(const KeyValues& values);

// Everything needed to reproduce one training run.
struct RunManifest {
  TrainConfig config;
  std::string data_dir;
  std::string embeddings;  // empty for random embeddings
  std::size_t embedding_dim = 100;
  bool lowercase = false;
  std::string out_dir;
  std::string input_hash;
  std::size_t best_epoch = 0;
  double dev_accuracy = 0.0;
  double test_accuracy = 0.0;
  // Wall-clock timings live only here, never in the model or history files.
  std::vector<double> epoch_seconds;

  bool operator==(const RunManifest&) const = default;
};

std::string manifest_to_text(const RunManifest& manifest);
RunManifest manifest_from_text(const std::string& text);

// Git blob hash ("blob <size>\0<content>" through SHA-1), lowercase hex.
std::string git_blob_hash(const std::filesystem::path& path);
// SHA-1 over "<blob-hash> <file-name>\n" lines of the given files, in order.
std::string combined_input_hash(const std::vector<std::filesystem::path>& files);

}  // namespace treelstm
