#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "treelstm/tensor.hpp"
#include "treelstm/treebank.hpp"

namespace treelstm {

inline constexpr std::string_view kUnknownToken = "<unk>";

// Token <-> row index map. Index 0 is always the unknown-word row.
class Vocabulary {
 public:
  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}
  // Tokens are taken in the given order after the unknown token; duplicates
  // and the unknown token itself are ignored.
  explicit Vocabulary(const std::vector<std::string>& tokens, bool lowercase_fallback = false);

  std::size_t size() const { return tokens_.size(); }
  std::size_t unk_index() const { return 0; }
  bool lowercase_fallback() const { return lowercase_fallback_; }

  std::optional<std::size_t> find(std::string_view token) const;
  // Exact match, then the lowercased token when fallback is enabled, then unk.
  std::size_t resolve(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_[index]; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && lowercase_fallback_ == other.lowercase_fallback_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  bool lowercase_fallback_ = false;
};

struct EmbeddingTable {
  Matrix vectors;  // V x d_w
  bool trainable = true;

  std::size_t dim() const { return vectors.cols(); }
  std::size_t rows() const { return vectors.rows(); }

  bool operator==(const EmbeddingTable&) const = default;
};

// Vocabulary plus its table; rows line up with vocabulary indices.
struct Lexicon {
  Vocabulary vocab;
  EmbeddingTable table;

  bool operator==(const Lexicon&) const = default;
};

std::string ascii_lowercase(std::string_view token);

std::set<std::string> collect_vocabulary(std::span<const Tree> trees);

// Entries uniform in [-1/sqrt(dim), 1/sqrt(dim)], deterministic per seed.
EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

Lexicon random_lexicon(const std::set<std::string>& corpus_vocab, std::size_t dim,
                       std::uint64_t seed, bool lowercase_fallback = false);

// Reads a GloVe text file, keeping only rows needed by corpus_vocab. Corpus
// tokens the file cannot supply get their own randomly initialized row, as
// does the unknown word.
Lexicon load_glove(const std::filesystem::path& path, std::size_t expected_dim,
                   const std::set<std::string>& corpus_vocab, std::uint64_t seed,
                   bool lowercase_fallback = false);

Vector lookup(const Vocabulary& vocab, const EmbeddingTable& table, std::string_view token);

}  // namespace treelstm
