#include "treelstm/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include "treelstm/errors.hpp"
#include "treelstm/format.hpp"

namespace treelstm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const ConfigError&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

const std::string& require(const KeyValues& values, const std::string& key) {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("manifest is missing key '" + key + "'");
  return it->second;
}

class Sha1 {
 public:
  Sha1() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha1(), nullptr) != 1) {
      throw Error("SHA-1 initialization failed");
    }
  }

  void update(const void* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) throw Error("SHA-1 update failed");
  }

  std::string hex_digest() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &length) != 1) {
      throw Error("SHA-1 finalization failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
      out += kHex[digest[i] >> 4];
      out += kHex[digest[i] & 0xf];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues values;
  std::istringstream in(text);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_number) + ": expected key=value");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_number) + ": empty key");
    if (!values.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_number) + ": duplicate key '" + key + "'");
    }
  }
  return values;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_key_values(buffer.str());
}

TrainConfig apply_config(const KeyValues& values, TrainConfig config) {
  for (const auto& [key, value] : values) {
    if (key == "d") {
      config.d = parse_unsigned(key, value);
    } else if (key == "activation") {
      config.activation = parse_activation(value);
    } else if (key == "learning_rate") {
      config.learning_rate = parse_number(key, value);
    } else if (key == "lambda") {
      config.lambda = parse_number(key, value);
    } else if (key == "batch_size") {
      config.batch_size = parse_unsigned(key, value);
    } else if (key == "epochs") {
      config.epochs = parse_unsigned(key, value);
    } else if (key == "seed") {
      config.seed = parse_unsigned(key, value);
    } else if (key == "task") {
      config.task = parse_task(value);
    } else if (key == "model_kind") {
      config.model_kind = parse_model_kind(value);
    } else if (key == "embeddings_trainable") {
      config.embeddings_trainable = parse_bool(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return config;
}

KeyValues config_to_key_values(const TrainConfig& c) {
  return {
      {"d", std::to_string(c.d)},
      {"activation", std::string(to_string(c.activation))},
      {"learning_rate", format_double(c.learning_rate)},
      {"lambda", format_double(c.lambda)},
      {"batch_size", std::to_string(c.batch_size)},
      {"epochs", std::to_string(c.epochs)},
      {"seed", std::to_string(c.seed)},
      {"task", std::string(to_string(c.task))},
      {"model_kind", std::string(to_string(c.model_kind))},
      {"embeddings_trainable", c.embeddings_trainable ? "true" : "false"},
  };
}

std::string to_text(const KeyValues& values) {
  std::string out;
  for (const auto& [key, value] : values) out += key + "=" + value + "\n";
  return out;
}

std::string manifest_to_text(const RunManifest& m) {
  KeyValues values = config_to_key_values(m.config);
  values["data_dir"] = m.data_dir;
  values["embeddings"] = m.embeddings;
  values["embedding_dim"] = std::to_string(m.embedding_dim);
  values["lowercase"] = m.lowercase ? "true" : "false";
  values["out_dir"] = m.out_dir;
  values["input_hash"] = m.input_hash;
  values["best_epoch"] = std::to_string(m.best_epoch);
  values["dev_accuracy"] = format_double(m.dev_accuracy);
  values["test_accuracy"] = format_double(m.test_accuracy);
  std::string seconds;
  for (std::size_t i = 0; i < m.epoch_seconds.size(); ++i) {
    if (i > 0) seconds += ',';
    seconds += format_double(m.epoch_seconds[i]);
  }
  values["epoch_seconds"] = seconds;
  return to_text(values);
}

RunManifest manifest_from_text(const std::string& text) {
  KeyValues values = parse_key_values(text);
  RunManifest m;
  m.data_dir = require(values, "data_dir");
  m.embeddings = require(values, "embeddings");
  m.embedding_dim = parse_unsigned("embedding_dim", require(values, "embedding_dim"));
  m.lowercase = parse_bool("lowercase", require(values, "lowercase"));
  m.out_dir = require(values, "out_dir");
  m.input_hash = require(values, "input_hash");
  m.best_epoch = parse_unsigned("best_epoch", require(values, "best_epoch"));
  m.dev_accuracy = parse_number("dev_accuracy", require(values, "dev_accuracy"));
  m.test_accuracy = parse_number("test_accuracy", require(values, "test_accuracy"));
  const std::string seconds = require(values, "epoch_seconds");
  std::size_t start = 0;
  while (start < seconds.size()) {
    auto comma = seconds.find(',', start);
    if (comma == std::string::npos) comma = seconds.size();
    m.epoch_seconds.push_back(parse_number("epoch_seconds", seconds.substr(start, comma - start)));
    start = comma + 1;
  }
  for (const char* key : {"data_dir", "embeddings", "embedding_dim", "lowercase", "out_dir",
                          "input_hash", "best_epoch", "dev_accuracy", "test_accuracy",
                          "epoch_seconds"}) {
    values.erase(key);
  }
  m.config = apply_config(values);
  return m;
}

std::string git_blob_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  const auto size = std::filesystem::file_size(path);
  Sha1 sha;
  const std::string header = "blob " + std::to_string(size);
  sha.update(header.data(), header.size() + 1);  // includes the NUL terminator
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    sha.update(buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  return sha.hex_digest();
}

std::string combined_input_hash(const std::vector<std::filesystem::path>& files) {
  Sha1 sha;
  for (const auto& file : files) {
    const std::string line = git_blob_hash(file) + " " + file.filename().string() + "\n";
    sha.update(line.data(), line.size());
  }
  return sha.hex_digest();
}

}  // namespace treelstm
