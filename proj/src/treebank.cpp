#include "treelstm/treebank.hpp"

#include <cctype>
#include <fstream>
#include <unordered_set>

#include "treelstm/errors.hpp"

namespace treelstm {

std::size_t num_classes(TaskKind task) { return task == TaskKind::FineGrained ? 5 : 2; }

std::string_view to_string(TaskKind task) {
  return task == TaskKind::FineGrained ? "fine" : "binary";
}

TaskKind parse_task(std::string_view name) {
  if (name == "fine") return TaskKind::FineGrained;
  if (name == "binary") return TaskKind::Binary;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected fine or binary)");
}

Tree Tree::leaf(std::optional<int> label, std::string token) {
  Tree t;
  t.nodes_.push_back(TreeNode{label, std::move(token), -1, -1});
  return t;
}

Tree Tree::join(std::optional<int> label, const Tree& left, const Tree& right) {
  Tree t;
  t.nodes_.reserve(left.size() + right.size() + 1);
  t.nodes_ = left.nodes_;
  const int offset = static_cast<int>(left.size());
  for (TreeNode node : right.nodes_) {
    if (!node.is_leaf()) {
      node.left += offset;
      node.right += offset;
    }
    t.nodes_.push_back(std::move(node));
  }
  t.nodes_.push_back(TreeNode{label, {}, offset - 1, static_cast<int>(t.nodes_.size()) - 1});
  return t;
}

std::size_t Tree::leaf_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes_) n += node.is_leaf() ? 1 : 0;
  return n;
}

std::size_t Tree::labeled_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes_) n += node.label.has_value() ? 1 : 0;
  return n;
}

std::vector<std::string_view> Tree::tokens() const {
  std::vector<std::string_view> out;
  for (const auto& node : nodes_) {
    if (node.is_leaf()) out.push_back(node.token);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> Tree::spans() const {
  std::vector<std::pair<std::size_t, std::size_t>> out(nodes_.size());
  std::size_t next_leaf = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) {
      out[i] = {next_leaf, next_leaf + 1};
      ++next_leaf;
    } else {
      out[i] = {out[node.left].first, out[node.right].second};
    }
  }
  return out;
}

namespace {

class SexprParser {
 public:
  SexprParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  Tree parse() {
    skip_space();
    Tree tree = parse_node();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after tree");
    return tree;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, pos_ + 1); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }

  void expect(char c) {
    if (at_end()) fail(std::string("unexpected end of input, expected '") + c + "'");
    if (text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view read_atom() {
    const std::size_t start = pos_;
    while (!at_end()) {
      const char c = text_[pos_];
      if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) break;
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  int parse_label() {
    const std::size_t start = pos_;
    const std::string_view atom = read_atom();
    if (atom.empty()) {
      pos_ = start;
      fail("missing label");
    }
    int value = 0;
    for (char c : atom) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        pos_ = start;
        fail("non-integer label '" + std::string(atom) + "'");
      }
      value = value * 10 + (c - '0');
      if (value > 4) break;
    }
    if (value > 4) {
      pos_ = start;
      fail("label '" + std::string(atom) + "' outside 0..4");
    }
    return value;
  }

  Tree parse_node() {
    const std::size_t open = pos_;
    expect('(');
    skip_space();
    const int label = parse_label();
    skip_space();
    if (at_end()) fail("unbalanced parentheses");
    if (text_[pos_] != '(') {
      const std::string_view token = read_atom();
      if (token.empty()) fail("missing token");
      skip_space();
      if (at_end()) fail("unbalanced parentheses");
      expect(')');
      return Tree::leaf(label, std::string(token));
    }
    std::vector<Tree> children;
    while (!at_end() && text_[pos_] == '(') {
      children.push_back(parse_node());
      skip_space();
    }
    if (at_end()) fail("unbalanced parentheses");
    if (text_[pos_] != ')') fail("token mixed with subtrees");
    if (children.size() != 2) {
      pos_ = open;
      fail(children.size() == 1 ? "unary inner node"
                                : "inner node has " + std::to_string(children.size()) +
                                      " children (expected 2)");
    }
    ++pos_;
    return Tree::join(label, children[0], children[1]);
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

void print_node(const Tree& tree, std::size_t index, std::string& out) {
  const auto& node = tree.nodes()[index];
  out += '(';
  if (node.label) {
    out += std::to_string(*node.label);
  } else {
    out += '?';
  }
  out += ' ';
  if (node.is_leaf()) {
    out += node.token;
  } else {
    print_node(tree, static_cast<std::size_t>(node.left), out);
    out += ' ';
    print_node(tree, static_cast<std::size_t>(node.right), out);
  }
  out += ')';
}

bool is_blank(std::string_view line) {
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Tree parse_tree(std::string_view line, std::size_t line_number) {
  return SexprParser(line, line_number).parse();
}

std::string print_tree(const Tree& tree) {
  std::string out;
  if (tree.size() > 0) print_node(tree, tree.root_index(), out);
  return out;
}

std::vector<Tree> load_split(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open treebank file " + path.string());
  std::vector<Tree> trees;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    try {
      trees.push_back(parse_tree(line, line_number));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
    }
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return trees;
}

std::vector<Tree> to_binary_task(std::span<const Tree> trees) {
  std::vector<Tree> out;
  for (const Tree& tree : trees) {
    if (tree.root().label == 2) continue;
    Tree copy = tree;
    for (auto& node : copy.nodes()) {
      if (!node.label) continue;
      const int label = *node.label;
      if (label == 2) {
        node.label.reset();
      } else {
        node.label = label < 2 ? 0 : 1;
      }
    }
    out.push_back(std::move(copy));
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& directory, TaskKind task) {
  Dataset data;
  data.task = task;
  data.train = load_split(directory / "train.txt");
  data.dev = load_split(directory / "dev.txt");
  data.test = load_split(directory / "test.txt");
  if (task == TaskKind::Binary) {
    data.train = to_binary_task(data.train);
    data.dev = to_binary_task(data.dev);
    data.test = to_binary_task(data.test);
  }
  return data;
}

TreeStats tree_stats(std::span<const Tree> trees) {
  TreeStats stats;
  std::unordered_set<std::string> phrases;
  for (const Tree& tree : trees) {
    ++stats.sentences;
    stats.leaves += tree.leaf_count();
    stats.labeled_nodes += tree.labeled_count();
    const auto tokens = tree.tokens();
    const auto spans = tree.spans();
    for (std::size_t i = 0; i < tree.size(); ++i) {
      if (!tree.nodes()[i].label) continue;
      std::string phrase;
      for (std::size_t k = spans[i].first; k < spans[i].second; ++k) {
        if (k > spans[i].first) phrase += ' ';
        phrase += tokens[k];
      }
      phrases.insert(std::move(phrase));
    }
  }
  stats.distinct_phrases = phrases.size();
  if (stats.sentences > 0) {
    stats.mean_leaf_count = static_cast<double>(stats.leaves) / static_cast<double>(stats.sentences);
  }
  return stats;
}

}  // namespace treelstm
