#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace treelstm {

enum class TaskKind { FineGrained, Binary };

std::size_t num_classes(TaskKind task);
std::string_view to_string(TaskKind task);
// Accepts "fine" or "binary".
TaskKind parse_task(std::string_view name);

struct TreeNode {
  std::optional<int> label;
  std::string token;  // leaves only
  int left = -1;
  int right = -1;

  bool is_leaf() const { return left < 0; }

  bool operator==(const TreeNode&) const = default;
};

// Binary constituency tree stored as a flat post-order node array: children
// always precede their parent and the root is the last node. Leaves appear in
// sentence order.
class Tree {
 public:
  static Tree leaf(std::optional<int> label, std::string token);
  static Tree join(std::optional<int> label, const Tree& left, const Tree& right);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t root_index() const { return nodes_.size() - 1; }
  const TreeNode& root() const { return nodes_.back(); }

  std::size_t leaf_count() const;
  std::size_t inner_count() const { return nodes_.size() - leaf_count(); }
  std::size_t labeled_count() const;
  std::vector<std::string_view> tokens() const;

  // [first, last) leaf positions covered by each node, indexed like nodes().
  std::vector<std::pair<std::size_t, std::size_t>> spans() const;

  bool operator==(const Tree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

// Parses one SST s-expression. line_number is only used in error messages.
Tree parse_tree(std::string_view line, std::size_t line_number = 1);

// Canonical single-space rendering; unlabeled nodes print their label as '?'.
std::string print_tree(const Tree& tree);

// One tree per non-blank line, in file order.
std::vector<Tree> load_split(const std::filesystem::path& path);

// Drops sentences with a neutral root, maps 0,1 -> 0 and 3,4 -> 1, and
// unlabels neutral inner phrases.
std::vector<Tree> to_binary_task(std::span<const Tree> trees);

struct Dataset {
  std::vector<Tree> train;
  std::vector<Tree> dev;
  std::vector<Tree> test;
  TaskKind task = TaskKind::FineGrained;
};

// Reads train.txt, dev.txt and test.txt from an SST trees/ directory.
Dataset load_dataset(const std::filesystem::path& directory, TaskKind task);

struct TreeStats {
  std::size_t sentences = 0;
  std::size_t leaves = 0;
  double mean_leaf_count = 0.0;
  std::size_t labeled_nodes = 0;
  // Distinct labeled phrases, identified by their token yield.
  std::size_t distinct_phrases = 0;
};

TreeStats tree_stats(std::span<const Tree> trees);

}  // namespace treelstm
