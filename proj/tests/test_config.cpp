#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "treelstm/artifact.hpp"
#include "treelstm/config.hpp"
#include "treelstm/errors.hpp"
#include "treelstm/format.hpp"
#include "treelstm/gradient_check.hpp"

using namespace treelstm;
namespace fs = std::filesystem;

TEST(FormatDouble, RoundTripsExactly) {
  for (double x : {0.0, -0.0, 0.1, 1.0 / 3.0, 48.1, 1e-300, -2.5e17,
                   std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max()}) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(parse_double(format_double(x))),
              std::bit_cast<std::uint64_t>(x))
        << format_double(x);
  }
  EXPECT_EQ(format_double(0.05), "0.05");
  EXPECT_THROW(parse_double("0.5x"), ConfigError);
  EXPECT_THROW(parse_double(""), ConfigError);
}

TEST(KeyValues, ParsesCommentsAndBlanks) {
  const KeyValues kv = parse_key_values("# header\n\nd=8\n  lambda = 0.01 \nmodel_kind=rnn\n");
  EXPECT_EQ(kv.at("d"), "8");
  EXPECT_EQ(kv.at("lambda"), "0.01");
  EXPECT_EQ(kv.size(), 3u);
  EXPECT_THROW(parse_key_values("d=1\nd=2\n"), ConfigError);
  EXPECT_THROW(parse_key_values("no equals sign\n"), ConfigError);
}

TEST(ApplyConfig, OverridesAndRejectsUnknownKeys) {
  const TrainConfig c = apply_config(read_key_values(TREELSTM_TEST_DATA "/mini.cfg"));
  EXPECT_EQ(c.d, 4u);
  EXPECT_EQ(c.epochs, 2u);
  EXPECT_EQ(c.batch_size, 2u);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.activation, ActivationKind::Tanh);
  EXPECT_THROW(apply_config({{"dropout", "0.5"}}), ConfigError);
  EXPECT_THROW(apply_config({{"d", "many"}}), ConfigError);
  EXPECT_THROW(apply_config({{"activation", "relu"}}), ConfigError);
}

TEST(ApplyConfig, RoundTripsThroughKeyValues) {
  TrainConfig c;
  c.d = 7;
  c.activation = ActivationKind::Softsign;
  c.learning_rate = 0.01;
  c.lambda = 0;
  c.batch_size = 9;
  c.epochs = 3;
  c.seed = 123456789012345ULL;
  c.task = TaskKind::Binary;
  c.model_kind = ModelKind::Rnn;
  c.embeddings_trainable = false;
  EXPECT_EQ(apply_config(parse_key_values(to_text(config_to_key_values(c)))), c);
}

TEST(Manifest, RoundTrip) {
  RunManifest m;
  m.config.seed = 11;
  m.config.learning_rate = 0.1 + 0.2;
  m.data_dir = "/data/sst trees";
  m.embeddings = "glove.txt";
  m.embedding_dim = 300;
  m.lowercase = true;
  m.out_dir = "runs/a";
  m.input_hash = "0123abcd";
  m.best_epoch = 4;
  m.dev_accuracy = 47.31;
  m.test_accuracy = 1.0 / 3.0;
  m.epoch_seconds = {1.5, 2.25, 0.1};
  EXPECT_EQ(manifest_from_text(manifest_to_text(m)), m);
  EXPECT_EQ(manifest_from_text(manifest_to_text(RunManifest{})), RunManifest{});
}

TEST(GitBlobHash, MatchesGit) {
  const fs::path path = fs::temp_directory_path() / "treelstm_blob.txt";
  std::ofstream(path, std::ios::binary) << "hello\n";
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(git_blob_hash(path), "ce013625030ba8dba906f756967f9e9ca394464a");
  std::ofstream(path, std::ios::binary | std::ios::trunc);
  EXPECT_EQ(git_blob_hash(path), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_THROW(git_blob_hash("/nonexistent/file"), IoError);
}

namespace {

ModelArtifact sample_artifact(ModelKind kind) {
  ModelShape shape;
  shape.kind = kind;
  shape.activation = ActivationKind::Softsign;
  shape.task = TaskKind::Binary;
  shape.d = 4;
  shape.d_w = 3;
  ModelArtifact a;
  a.params = random_model(shape, std::vector<std::string>{"good", "bad", "caf\xc3\xa9"}, 5);
  a.params.lexicon.table.trainable = false;
  a.best_epoch = 7;
  a.dev_accuracy = 100.0 * 5 / 7;
  a.manifest = "manifest.txt";
  return a;
}

std::string serialize(const ModelArtifact& a) {
  std::ostringstream out;
  save_model(a, out);
  return out.str();
}

}  // namespace

TEST(Artifact, SaveLoadSaveIsByteIdentical) {
  for (auto kind : {ModelKind::Rnn, ModelKind::LstmRnn}) {
    const ModelArtifact a = sample_artifact(kind);
    const std::string bytes = serialize(a);
    std::istringstream in(bytes);
    const ModelArtifact loaded = load_model(in);
    EXPECT_EQ(loaded, a);
    EXPECT_EQ(serialize(loaded), bytes);
  }
}

TEST(Artifact, RejectsOtherVersionsAndCorruption) {
  const std::string bytes = serialize(sample_artifact(ModelKind::LstmRnn));
  std::string future = bytes;
  future.replace(0, std::string("treelstm-model 1").size(), "treelstm-model 2");
  std::istringstream a(future);
  EXPECT_THROW(load_model(a), IoError);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_model(truncated), IoError);

  std::istringstream trailing(bytes + "x");
  EXPECT_THROW(load_model(trailing), IoError);

  std::string wrong_classes = bytes;
  const auto pos = wrong_classes.find("classes 2");
  ASSERT_NE(pos, std::string::npos);
  wrong_classes.replace(pos, 9, "classes 5");
  std::istringstream c(wrong_classes);
  EXPECT_THROW(load_model(c), IoError);
}
