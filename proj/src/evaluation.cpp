#include "treelstm/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "treelstm/errors.hpp"
#include "treelstm/format.hpp"
#include "treelstm/tensor.hpp"

namespace treelstm {

namespace {

double percentage(std::size_t correct, std::size_t total) {
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

double EvalReport::root_accuracy() const { return percentage(root_correct, root_total); }
double EvalReport::allnode_accuracy() const { return percentage(allnode_correct, allnode_total); }

EvalReport evaluate(const ModelParams& model, std::span<const Tree> trees) {
  EvalReport report;
  for (const Tree& tree : trees) {
    const ForwardResult result = forward(tree, model);
    const auto& nodes = tree.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].label) continue;
      const auto predicted = argmax(result.states[i].class_distribution.values());
      const bool correct = predicted == static_cast<std::size_t>(*nodes[i].label);
      ++report.allnode_total;
      report.allnode_correct += correct ? 1 : 0;
      if (i == tree.root_index()) {
        ++report.root_total;
        report.root_correct += correct ? 1 : 0;
      }
    }
  }
  return report;
}

std::string eval_report_csv_header() {
  return "root_correct,root_total,root_accuracy,allnode_correct,allnode_total,allnode_accuracy";
}

std::string eval_report_csv_row(const EvalReport& r) {
  return std::to_string(r.root_correct) + "," + std::to_string(r.root_total) + "," +
         format_double(r.root_accuracy()) + "," + std::to_string(r.allnode_correct) + "," +
         std::to_string(r.allnode_total) + "," + format_double(r.allnode_accuracy());
}

RunStats run_stats(std::span<const double> accuracies) {
  if (accuracies.empty()) throw ConfigError("run_stats: no accuracies given");
  RunStats stats;
  stats.accuracies.assign(accuracies.begin(), accuracies.end());
  std::vector<double> sorted = stats.accuracies;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };
  stats.min = sorted.front();
  stats.q1 = quantile(0.25);
  stats.median = quantile(0.5);
  stats.q3 = quantile(0.75);
  stats.max = sorted.back();
  return stats;
}

std::string run_stats_csv(const RunStats& stats) {
  std::string out = "run_id,accuracy\n";
  for (std::size_t i = 0; i < stats.accuracies.size(); ++i) {
    out += std::to_string(i) + "," + format_double(stats.accuracies[i]) + "\n";
  }
  out += "min," + format_double(stats.min) + "\n";
  out += "q1," + format_double(stats.q1) + "\n";
  out += "median," + format_double(stats.median) + "\n";
  out += "q3," + format_double(stats.q3) + "\n";
  out += "max," + format_double(stats.max) + "\n";
  return out;
}

}  // namespace treelstm
