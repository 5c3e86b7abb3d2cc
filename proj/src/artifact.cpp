#include "treelstm/artifact.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "treelstm/errors.hpp"
#include "treelstm/format.hpp"

namespace treelstm {

namespace {

void write_doubles(std::ostream& out, std::span<const double> values) {
  std::vector<char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void read_doubles(std::istream& in, std::span<double> values, const std::string& name) {
  std::vector<unsigned char> bytes(values.size() * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw IoError("model file truncated inside tensor " + name);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
}

std::string read_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("model file header truncated");
  return line;
}

// Reads "<key> <value>" and returns value.
std::string read_field(std::istream& in, const std::string& key) {
  const std::string line = read_line(in);
  if (line.rfind(key + " ", 0) != 0) {
    throw IoError("model file: expected field '" + key + "', got '" + line + "'");
  }
  return line.substr(key.size() + 1);
}

std::size_t read_count(std::istream& in, const std::string& key) {
  const std::string text = read_field(in, key);
  try {
    std::size_t pos = 0;
    const unsigned long long value = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(value);
  } catch (const std::logic_error&) {
    throw IoError("model file: field '" + key + "' is not a count: '" + text + "'");
  }
}

bool read_flag(std::istream& in, const std::string& key) {
  const std::string text = read_field(in, key);
  if (text == "0") return false;
  if (text == "1") return true;
  throw IoError("model file: field '" + key + "' must be 0 or 1");
}

}  // namespace

void save_model(const ModelArtifact& artifact, std::ostream& out) {
  const ModelParams& p = artifact.params;
  const ModelShape& s = p.shape;
  out << "treelstm-model " << kModelFormatVersion << "\n";
  out << "task " << to_string(s.task) << "\n";
  out << "classes " << s.classes() << "\n";
  out << "model " << to_string(s.kind) << "\n";
  out << "activation " << to_string(s.activation) << "\n";
  out << "d " << s.d << "\n";
  out << "d_w " << s.d_w << "\n";
  out << "embeddings_trainable " << (p.lexicon.table.trainable ? 1 : 0) << "\n";
  out << "lowercase_fallback " << (p.lexicon.vocab.lowercase_fallback() ? 1 : 0) << "\n";
  out << "best_epoch " << artifact.best_epoch << "\n";
  out << "dev_accuracy " << format_double(artifact.dev_accuracy) << "\n";
  out << "manifest " << artifact.manifest << "\n";
  out << "vocab " << p.lexicon.vocab.size() << "\n";
  for (const auto& token : p.lexicon.vocab.tokens()) {
    if (token.find('\n') != std::string::npos) {
      throw IoError("vocabulary token contains a newline");
    }
    out << token << "\n";
  }

  std::vector<std::pair<std::string, std::span<const double>>> tensors;
  for_each_tensor(p.weights, [&](std::string_view name, std::span<const double> values) {
    tensors.emplace_back(std::string(name), values);
  });
  tensors.emplace_back("embeddings", p.lexicon.table.vectors.values());
  out << "tensors " << tensors.size() << "\n";
  for (const auto& [name, values] : tensors) out << name << " " << values.size() << "\n";
  out << "end\n";
  for (const auto& [name, values] : tensors) write_doubles(out, values);
  if (!out) throw IoError("failed writing model");
}

ModelArtifact load_model(std::istream& in) {
  const std::string magic = read_line(in);
  if (magic.rfind("treelstm-model ", 0) != 0) throw IoError("not a treelstm model file");
  if (magic != "treelstm-model " + std::to_string(kModelFormatVersion)) {
    throw IoError("unsupported model format version: '" + magic.substr(15) + "'");
  }

  ModelArtifact artifact;
  ModelParams& p = artifact.params;
  ModelShape& s = p.shape;
  try {
    s.task = parse_task(read_field(in, "task"));
    const std::size_t classes = read_count(in, "classes");
    if (classes != s.classes()) throw IoError("class count does not match task");
    s.kind = parse_model_kind(read_field(in, "model"));
    s.activation = parse_activation(read_field(in, "activation"));
  } catch (const ConfigError& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
  s.d = read_count(in, "d");
  s.d_w = read_count(in, "d_w");
  if (s.d == 0 || s.d_w == 0) throw IoError("model file: zero dimension");
  const bool trainable = read_flag(in, "embeddings_trainable");
  const bool lowercase = read_flag(in, "lowercase_fallback");
  artifact.best_epoch = read_count(in, "best_epoch");
  try {
    artifact.dev_accuracy = parse_double(read_field(in, "dev_accuracy"));
  } catch (const ConfigError& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
  artifact.manifest = read_field(in, "manifest");

  const std::size_t vocab_size = read_count(in, "vocab");
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) tokens.push_back(read_line(in));
  if (tokens.empty() || tokens.front() != kUnknownToken) {
    throw IoError("model file: vocabulary must start with " + std::string(kUnknownToken));
  }
  tokens.erase(tokens.begin());
  p.lexicon.vocab = Vocabulary(tokens, lowercase);
  if (p.lexicon.vocab.size() != vocab_size) throw IoError("model file: duplicate vocabulary token");
  p.lexicon.table.vectors = Matrix(vocab_size, s.d_w);
  p.lexicon.table.trainable = trainable;
  p.weights = zero_weights(s);

  std::vector<std::pair<std::string, std::span<double>>> expected;
  for_each_tensor(p.weights, [&](std::string_view name, std::span<double> values) {
    expected.emplace_back(std::string(name), values);
  });
  expected.emplace_back("embeddings", p.lexicon.table.vectors.values());

  const std::size_t count = read_count(in, "tensors");
  if (count != expected.size()) throw IoError("model file: unexpected tensor count");
  for (const auto& [name, values] : expected) {
    const std::size_t size = read_count(in, name);
    if (size != values.size()) {
      throw IoError("model file: tensor " + name + " has " + std::to_string(size) +
                    " values, expected " + std::to_string(values.size()));
    }
  }
  if (read_line(in) != "end") throw IoError("model file: missing header terminator");
  for (const auto& [name, values] : expected) read_doubles(in, values, name);
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("model file: trailing bytes");
  return artifact;
}

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  save_model(artifact, out);
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace treelstm
