#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "treelstm/errors.hpp"
#include "treelstm/gradient_check.hpp"
#include "treelstm/treebank.hpp"

using namespace treelstm;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / ("treelstm_test_" + name);
  std::ofstream(path) << content;
  return path;
}

ParseError parse_error_of(const std::string& text) {
  try {
    parse_tree(text, 7);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for " << text;
  return ParseError("none", 0, 0);
}

}  // namespace

TEST(ParseTree, TwoLeaves) {
  const Tree t = parse_tree("(3 (2 good) (2 movie))");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.root().label, 3);
  EXPECT_FALSE(t.root().is_leaf());
  const TreeNode& left = t.nodes()[static_cast<std::size_t>(t.root().left)];
  const TreeNode& right = t.nodes()[static_cast<std::size_t>(t.root().right)];
  EXPECT_EQ(left.token, "good");
  EXPECT_EQ(left.label, 2);
  EXPECT_EQ(right.token, "movie");
  EXPECT_EQ(right.label, 2);
}

TEST(ParseTree, SingleLeaf) {
  const Tree t = parse_tree("(2 fine)");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_TRUE(t.root().is_leaf());
  EXPECT_EQ(t.root().token, "fine");
  EXPECT_EQ(t.root().label, 2);
}

TEST(ParseTree, TokensPreservedByteExactly) {
  const Tree t = parse_tree("(2 (2 -LRB-) (2 caf\xc3\xa9's))");
  const auto tokens = t.tokens();
  ASSERT_EQ(tokens.size(), 2u);
  EXPECT_EQ(tokens[0], "-LRB-");
  EXPECT_EQ(tokens[1], "caf\xc3\xa9's");
}

TEST(ParseTree, ThreeChildrenRejected) {
  const ParseError e = parse_error_of("(3 (2 a) (2 b) (2 c))");
  EXPECT_EQ(e.line(), 7u);
  EXPECT_EQ(e.column(), 1u);
  EXPECT_NE(std::string(e.what()).find("3 children"), std::string::npos) << e.what();
}

TEST(ParseTree, MalformedInputsReportPosition) {
  EXPECT_NE(std::string(parse_error_of("(3 (2 a)").what()).find("unbalanced"), std::string::npos);
  EXPECT_NE(std::string(parse_error_of("(3 (2 a))").what()).find("unary"), std::string::npos);
  EXPECT_NE(std::string(parse_error_of("(x a)").what()).find("non-integer"), std::string::npos);
  EXPECT_NE(std::string(parse_error_of("(7 a)").what()).find("outside 0..4"), std::string::npos);
  EXPECT_NE(std::string(parse_error_of("(2 a))").what()).find("trailing"), std::string::npos);
  const ParseError e = parse_error_of("(2 (2 a) (9 b))");
  EXPECT_EQ(e.column(), 11u);
}

TEST(ParseTree, PrintRoundTrip) {
  const std::string text = "(1 (2 The) (1 (2 plot) (1 (2 is) (1 dull))))";
  EXPECT_EQ(print_tree(parse_tree(text)), text);

  std::mt19937_64 rng(3);
  const std::vector<std::string> tokens{"a", "b", "c", "d"};
  for (std::size_t leaves = 1; leaves <= 12; ++leaves) {
    const Tree t = random_tree(leaves, tokens, TaskKind::FineGrained, rng);
    EXPECT_EQ(parse_tree(print_tree(t)), t);
  }
}

TEST(ParseTree, LeafAndInnerCountsDifferByOne) {
  std::mt19937_64 rng(9);
  const std::vector<std::string> tokens{"x", "y"};
  for (std::size_t leaves = 1; leaves <= 30; ++leaves) {
    const Tree t = parse_tree(print_tree(random_tree(leaves, tokens, TaskKind::FineGrained, rng)));
    EXPECT_EQ(t.leaf_count(), leaves);
    EXPECT_EQ(t.leaf_count() - 1, t.inner_count());
  }
}

TEST(LoadSplit, EmptyFileGivesEmptyList) {
  EXPECT_TRUE(load_split(temp_file("empty.txt", "")).empty());
}

TEST(LoadSplit, ErrorNamesFileAndLine) {
  const fs::path path = temp_file("bad.txt", "(2 a)\n(3 (2 a) (2 b) (2 c))\n");
  try {
    load_split(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("bad.txt"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_split("/nonexistent/split.txt"), IoError);
}

TEST(LoadSplit, FixtureDataset) {
  const Dataset ds = load_dataset(TREELSTM_TEST_DATA "/sst_mini", TaskKind::FineGrained);
  EXPECT_EQ(ds.train.size(), 8u);
  EXPECT_EQ(ds.dev.size(), 3u);
  EXPECT_EQ(ds.test.size(), 4u);
}

TEST(BinaryTask, DropsNeutralRootsAndMapsLabels) {
  const std::vector<Tree> trees{parse_tree("(2 (2 a) (2 b))"), parse_tree("(4 (1 a) (2 b))"),
                                parse_tree("(0 (3 a) (2 b))")};
  const auto binary = to_binary_task(trees);
  ASSERT_EQ(binary.size(), 2u);
  EXPECT_EQ(print_tree(binary[0]), "(1 (0 a) (? b))");
  EXPECT_EQ(print_tree(binary[1]), "(0 (1 a) (? b))");
}

TEST(BinaryTask, StructureUnchanged) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> tokens{"p", "q", "r"};
  std::vector<Tree> trees;
  for (int i = 0; i < 50; ++i) trees.push_back(random_tree(8, tokens, TaskKind::FineGrained, rng));
  std::vector<Tree> kept;
  for (const auto& t : trees) {
    if (t.root().label != 2) kept.push_back(t);
  }
  const auto binary = to_binary_task(trees);
  ASSERT_EQ(binary.size(), kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    ASSERT_EQ(binary[i].size(), kept[i].size());
    for (std::size_t n = 0; n < kept[i].size(); ++n) {
      EXPECT_EQ(binary[i].nodes()[n].left, kept[i].nodes()[n].left);
      EXPECT_EQ(binary[i].nodes()[n].right, kept[i].nodes()[n].right);
      EXPECT_EQ(binary[i].nodes()[n].token, kept[i].nodes()[n].token);
    }
  }
}

TEST(TreeStats, HandCountedExample) {
  const std::vector<Tree> trees{parse_tree("(3 (2 a) (2 b))")};
  const TreeStats s = tree_stats(trees);
  EXPECT_EQ(s.sentences, 1u);
  EXPECT_EQ(s.leaves, 2u);
  EXPECT_DOUBLE_EQ(s.mean_leaf_count, 2.0);
  EXPECT_EQ(s.labeled_nodes, 3u);
  EXPECT_EQ(s.distinct_phrases, 3u);
}

TEST(TreeStats, RepeatedPhrasesCountedOnce) {
  const std::vector<Tree> trees{parse_tree("(3 (2 a) (2 b))"), parse_tree("(3 (2 a) (2 c))")};
  const TreeStats s = tree_stats(trees);
  EXPECT_EQ(s.labeled_nodes, 6u);
  EXPECT_EQ(s.distinct_phrases, 5u);  // a, b, c, "a b", "a c"
}

TEST(TaskKind, ClassCounts) {
  EXPECT_EQ(num_classes(TaskKind::FineGrained), 5u);
  EXPECT_EQ(num_classes(TaskKind::Binary), 2u);
  EXPECT_EQ(parse_task("binary"), TaskKind::Binary);
  EXPECT_THROW(parse_task("ternary"), ConfigError);
}
