#include "treelstm/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

#include "treelstm/errors.hpp"

namespace treelstm {

Vocabulary::Vocabulary(const std::vector<std::string>& tokens, bool lowercase_fallback)
    : lowercase_fallback_(lowercase_fallback) {
  tokens_.emplace_back(kUnknownToken);
  index_.emplace(std::string(kUnknownToken), 0);
  for (const auto& token : tokens) {
    if (index_.contains(token)) continue;
    index_.emplace(token, tokens_.size());
    tokens_.push_back(token);
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::resolve(std::string_view token) const {
  if (auto hit = find(token)) return *hit;
  if (lowercase_fallback_) {
    if (auto hit = find(ascii_lowercase(token))) return *hit;
  }
  return unk_index();
}

std::string ascii_lowercase(std::string_view token) {
  std::string out(token);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::set<std::string> collect_vocabulary(std::span<const Tree> trees) {
  std::set<std::string> vocab;
  for (const auto& tree : trees) {
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) vocab.insert(node.token);
    }
  }
  return vocab;
}

namespace {

void fill_uniform_row(std::span<double> row, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& x : row) x = dist(rng);
}

}  // namespace

EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  EmbeddingTable table;
  table.vectors = Matrix(vocab_size, dim);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  fill_uniform_row(table.vectors.values(), bound, rng);
  return table;
}

Lexicon random_lexicon(const std::set<std::string>& corpus_vocab, std::size_t dim,
                       std::uint64_t seed, bool lowercase_fallback) {
  Lexicon lex;
  lex.vocab = Vocabulary(std::vector<std::string>(corpus_vocab.begin(), corpus_vocab.end()),
                         lowercase_fallback);
  lex.table = random_embeddings(lex.vocab.size(), dim, seed);
  return lex;
}

Lexicon load_glove(const std::filesystem::path& path, std::size_t expected_dim,
                   const std::set<std::string>& corpus_vocab, std::uint64_t seed,
                   bool lowercase_fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings file " + path.string());

  std::set<std::string> wanted(corpus_vocab.begin(), corpus_vocab.end());
  if (lowercase_fallback) {
    for (const auto& token : corpus_vocab) wanted.insert(ascii_lowercase(token));
  }

  std::unordered_map<std::string, std::vector<double>> found;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t space = line.find(' ');
    const std::string token = line.substr(0, space);
    std::size_t fields = 0;
    for (std::size_t i = space; i != std::string::npos && i < line.size();) {
      const std::size_t start = line.find_first_not_of(' ', i);
      if (start == std::string::npos) break;
      ++fields;
      i = line.find(' ', start);
    }
    if (fields != expected_dim) {
      throw IoError(path.string() + ":" + std::to_string(line_number) + ": token '" + token +
                    "' has " + std::to_string(fields) + " values, expected " +
                    std::to_string(expected_dim));
    }
    if (!wanted.contains(token) || found.contains(token)) continue;

    std::vector<double> values;
    values.reserve(expected_dim);
    const char* cursor = line.data() + space;
    const char* end = line.data() + line.size();
    while (values.size() < expected_dim) {
      while (cursor < end && *cursor == ' ') ++cursor;
      double value = 0.0;
      auto [next, ec] = std::from_chars(cursor, end, value);
      if (ec != std::errc() || !std::isfinite(value)) {
        throw IoError(path.string() + ":" + std::to_string(line_number) + ": token '" + token +
                      "' has a malformed value");
      }
      values.push_back(value);
      cursor = next;
    }
    found.emplace(token, std::move(values));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());

  // Vocabulary: every retained file row plus corpus tokens that cannot be
  // resolved through the case fallback.
  std::set<std::string> rows;
  for (const auto& [token, _] : found) rows.insert(token);
  for (const auto& token : corpus_vocab) {
    if (found.contains(token)) continue;
    if (lowercase_fallback && found.contains(ascii_lowercase(token))) continue;
    rows.insert(token);
  }

  Lexicon lex;
  lex.vocab = Vocabulary(std::vector<std::string>(rows.begin(), rows.end()), lowercase_fallback);
  lex.table.vectors = Matrix(lex.vocab.size(), expected_dim);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(expected_dim));
  for (std::size_t i = 0; i < lex.vocab.size(); ++i) {
    auto row = lex.table.vectors.row(i);
    auto it = found.find(lex.vocab.token(i));
    if (it != found.end()) {
      std::copy(it->second.begin(), it->second.end(), row.begin());
    } else {
      fill_uniform_row(row, bound, rng);
    }
  }
  return lex;
}

Vector lookup(const Vocabulary& vocab, const EmbeddingTable& table, std::string_view token) {
  const auto row = table.vectors.row(vocab.resolve(token));
  return Vector(std::vector<double>(row.begin(), row.end()));
}

}  // namespace treelstm
