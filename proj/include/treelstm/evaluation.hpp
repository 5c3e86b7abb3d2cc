#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treelstm/model.hpp"
#include "treelstm/treebank.hpp"

namespace treelstm {

struct EvalReport {
  std::size_t root_correct = 0;
  std::size_t root_total = 0;
  std::size_t allnode_correct = 0;
  std::size_t allnode_total = 0;

  double root_accuracy() const;
  double allnode_accuracy() const;
};

// Argmax prediction at every labeled node (ties to the smallest class).
EvalReport evaluate(const ModelParams& model, std::span<const Tree> trees);

std::string eval_report_csv_header();
std::string eval_report_csv_row(const EvalReport& report);

struct RunStats {
  std::vector<double> accuracies;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Quartiles by linear interpolation between order statistics (inclusive
// method). Throws ConfigError on an empty list.
RunStats run_stats(std::span<const double> accuracies);

// run_id,accuracy rows followed by the summary rows.
std::string run_stats_csv(const RunStats& stats);

}  // namespace treelstm
