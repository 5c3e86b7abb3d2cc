#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "treelstm/errors.hpp"
#include "treelstm/evaluation.hpp"
#include "treelstm/gradient_check.hpp"

using namespace treelstm;

namespace {

ModelParams uniform_model() {
  ModelShape shape;
  shape.d = 3;
  shape.d_w = 2;
  ModelParams m = random_model(shape, std::vector<std::string>{"a", "b"}, 1);
  m.weights.softmax = zero_weights(shape).softmax;
  return m;
}

}  // namespace

TEST(Evaluate, UniformPredictionTiesToClassZero) {
  const std::vector<Tree> trees{parse_tree("(0 (0 a) (2 b))"), parse_tree("(3 (0 a) (0 b))"),
                                parse_tree("(0 a)"), parse_tree("(4 (1 a) (4 b))")};
  const EvalReport r = evaluate(uniform_model(), trees);
  EXPECT_EQ(r.root_total, 4u);
  EXPECT_EQ(r.root_correct, 2u);
  EXPECT_DOUBLE_EQ(r.root_accuracy(), 50.0);
  EXPECT_EQ(r.allnode_total, 10u);
  EXPECT_EQ(r.allnode_correct, 5u);
  EXPECT_LE(r.root_correct, r.allnode_correct);
}

TEST(Evaluate, UnlabeledNodesSkipped) {
  ModelParams m = uniform_model();
  m.shape.task = TaskKind::Binary;
  m.weights.softmax = zero_weights(m.shape).softmax;
  const std::vector<Tree> trees{Tree::join(0, Tree::leaf(std::nullopt, "a"), Tree::leaf(1, "b"))};
  const EvalReport r = evaluate(m, trees);
  EXPECT_EQ(r.allnode_total, 2u);
  EXPECT_EQ(r.allnode_correct, 1u);
}

TEST(Evaluate, InvariantUnderLogitRescaleAndShift) {
  ModelShape shape;
  shape.d = 4;
  shape.d_w = 3;
  const std::vector<std::string> tokens{"a", "b", "c"};
  std::mt19937_64 rng(2);
  std::vector<Tree> trees;
  for (int i = 0; i < 30; ++i) trees.push_back(random_tree(5, tokens, TaskKind::FineGrained, rng));
  const ModelParams m = random_model(shape, tokens, 3);
  ModelParams scaled = m;
  // Scaling W and b by a positive factor rescales every logit; adding a
  // constant to b shifts them.
  for (auto* t : {&scaled.weights.softmax.w_leaf, &scaled.weights.softmax.w_inner}) {
    for (auto& x : t->values()) x *= 3.0;
  }
  for (auto* b : {&scaled.weights.softmax.b_leaf, &scaled.weights.softmax.b_inner}) {
    for (auto& x : *b) x = 3.0 * x + 1.25;
  }
  const EvalReport a = evaluate(m, trees), b = evaluate(scaled, trees);
  EXPECT_EQ(a.root_correct, b.root_correct);
  EXPECT_EQ(a.allnode_correct, b.allnode_correct);
}

TEST(Evaluate, EmptySetReportsZero) {
  const EvalReport r = evaluate(uniform_model(), std::vector<Tree>{});
  EXPECT_EQ(r.root_total, 0u);
  EXPECT_EQ(r.root_accuracy(), 0.0);
}

TEST(EvalReportCsv, HeaderAndRow) {
  EvalReport r;
  r.root_correct = 1;
  r.root_total = 4;
  r.allnode_correct = 3;
  r.allnode_total = 6;
  const std::string header = eval_report_csv_header();
  const std::string row = eval_report_csv_row(r);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_NE(row.find("25"), std::string::npos) << row;
  EXPECT_NE(row.find("50"), std::string::npos) << row;
}

TEST(RunStats, MedianOddAndEven) {
  EXPECT_DOUBLE_EQ(run_stats(std::vector<double>{1, 2, 3, 4, 5}).median, 3.0);
  EXPECT_DOUBLE_EQ(run_stats(std::vector<double>{1, 2, 3, 4}).median, 2.5);
  const RunStats s = run_stats(std::vector<double>{1, 2, 3, 4, 5});
  EXPECT_DOUBLE_EQ(s.min, 1);
  EXPECT_DOUBLE_EQ(s.q1, 2);
  EXPECT_DOUBLE_EQ(s.q3, 4);
  EXPECT_DOUBLE_EQ(s.max, 5);
  const RunStats e = run_stats(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(e.q1, 1.75);
  EXPECT_DOUBLE_EQ(e.q3, 3.25);
  EXPECT_THROW(run_stats(std::vector<double>{}), ConfigError);
}

TEST(RunStats, TenRunsContainedAndPermutationInvariant) {
  std::vector<double> runs{47.2, 48.9, 46.5, 48.1, 49.0, 47.7, 48.3, 46.9, 48.6, 47.9};
  const RunStats s = run_stats(runs);
  EXPECT_GE(s.median, s.min);
  EXPECT_LE(s.median, s.max);
  EXPECT_LE(s.q1, s.median);
  EXPECT_GE(s.q3, s.median);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(runs.begin(), runs.end(), rng);
    const RunStats t = run_stats(runs);
    EXPECT_EQ(t.min, s.min);
    EXPECT_EQ(t.q1, s.q1);
    EXPECT_EQ(t.median, s.median);
    EXPECT_EQ(t.q3, s.q3);
    EXPECT_EQ(t.max, s.max);
  }
}

TEST(RunStats, CsvHasOneRowPerRunPlusSummary) {
  const std::string csv = run_stats_csv(run_stats(std::vector<double>{40, 50, 45}));
  EXPECT_EQ(csv.rfind("run_id,accuracy\n", 0), 0u) << csv;
  EXPECT_NE(csv.find("\n0,40\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find("median,45"), std::string::npos) << csv;
}
