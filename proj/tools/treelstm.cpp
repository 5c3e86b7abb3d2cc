// Command-line driver: prepare, train, evaluate, gradcheck, stats, complexity.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "treelstm/artifact.hpp"
#include "treelstm/config.hpp"
#include "treelstm/embeddings.hpp"
#include "treelstm/errors.hpp"
#include "treelstm/evaluation.hpp"
#include "treelstm/format.hpp"
#include "treelstm/gradient_check.hpp"
#include "treelstm/model.hpp"
#include "treelstm/training.hpp"
#include "treelstm/treebank.hpp"

namespace fs = std::filesystem;
using namespace treelstm;

namespace {

// Flags shared by the training-related subcommands. Unset flags leave the
// config-file (or default) value alone.
struct TrainFlags {
  std::string config_path;
  std::optional<std::string> model;
  std::optional<std::string> activation;
  std::optional<std::string> task;
  std::optional<std::size_t> d;
  std::optional<double> lr;
  std::optional<double> lambda;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool freeze_embeddings = false;
};

struct DataFlags {
  std::string data_dir;
  std::string embeddings;
  std::size_t embedding_dim = 100;
  bool lowercase = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value config file");
  cmd->add_option("--model", f.model, "Composition model")->check(CLI::IsMember({"rnn", "lstm"}));
  cmd->add_option("--activation", f.activation, "Activation g")
      ->check(CLI::IsMember({"sigmoid", "tanh", "softsign"}));
  cmd->add_option("--task", f.task, "Sentiment task")->check(CLI::IsMember({"fine", "binary"}));
  cmd->add_option("--d", f.d, "Inner-node dimension");
  cmd->add_option("--lr", f.lr, "AdaGrad learning rate");
  cmd->add_option("--lambda", f.lambda, "L2 regularization coefficient");
  cmd->add_option("--batch-size", f.batch_size, "Sentences per mini-batch");
  cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--seed", f.seed, "Base random seed");
  cmd->add_flag("--freeze-embeddings", f.freeze_embeddings, "Keep word vectors fixed");
}

void add_data_flags(CLI::App* cmd, DataFlags& f, bool data_required) {
  auto* data = cmd->add_option("--data", f.data_dir, "SST trees directory (train/dev/test.txt)");
  if (data_required) data->required();
  cmd->add_option("--embeddings", f.embeddings, "GloVe text file (random vectors if omitted)");
  cmd->add_option("--embedding-dim", f.embedding_dim, "Word vector dimension d_w");
  cmd->add_flag("--lowercase", f.lowercase, "Fall back to lowercased tokens on lookup");
}

TrainConfig resolve_config(const TrainFlags& f) {
  TrainConfig config;
  if (!f.config_path.empty()) config = apply_config(read_key_values(f.config_path));
  if (f.model) config.model_kind = parse_model_kind(*f.model);
  if (f.activation) config.activation = parse_activation(*f.activation);
  if (f.task) config.task = parse_task(*f.task);
  if (f.d) config.d = *f.d;
  if (f.lr) config.learning_rate = *f.lr;
  if (f.lambda) config.lambda = *f.lambda;
  if (f.batch_size) config.batch_size = *f.batch_size;
  if (f.epochs) config.epochs = *f.epochs;
  if (f.seed) config.seed = *f.seed;
  if (f.freeze_embeddings) config.embeddings_trainable = false;
  config.validate();
  return config;
}

std::vector<fs::path> split_paths(const fs::path& dir) {
  return {dir / "train.txt", dir / "dev.txt", dir / "test.txt"};
}

void require_inputs(const DataFlags& f) {
  if (!fs::is_directory(f.data_dir)) throw IoError("treebank directory not found: " + f.data_dir);
  for (const auto& path : split_paths(f.data_dir)) {
    if (!fs::is_regular_file(path)) throw IoError("treebank split not found: " + path.string());
  }
  if (!f.embeddings.empty() && !fs::is_regular_file(f.embeddings)) {
    throw IoError("embeddings file not found: " + f.embeddings);
  }
  if (f.embedding_dim == 0) throw ConfigError("embedding dimension must be positive");
}

Lexicon make_lexicon(const DataFlags& f, const std::set<std::string>& corpus_vocab,
                     std::uint64_t seed) {
  if (f.embeddings.empty()) return random_lexicon(corpus_vocab, f.embedding_dim, seed, f.lowercase);
  return load_glove(f.embeddings, f.embedding_dim, corpus_vocab, seed, f.lowercase);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,dev_accuracy\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," +
           format_double(r.dev_accuracy) + "\n";
  }
  return out;
}

int cmd_prepare(const DataFlags& f) {
  require_inputs(f);
  const Dataset fine = load_dataset(f.data_dir, TaskKind::FineGrained);
  std::vector<Tree> all;
  for (const auto* split : {&fine.train, &fine.dev, &fine.test}) {
    all.insert(all.end(), split->begin(), split->end());
  }
  const TreeStats stats = tree_stats(all);
  std::cout << "split,fine_sentences,binary_sentences\n";
  const char* names[] = {"train", "dev", "test"};
  const std::vector<Tree>* splits[] = {&fine.train, &fine.dev, &fine.test};
  for (int i = 0; i < 3; ++i) {
    std::cout << names[i] << "," << splits[i]->size() << "," << to_binary_task(*splits[i]).size()
              << "\n";
  }
  std::cout << "\nsentences," << stats.sentences << "\n"
            << "distinct_phrases," << stats.distinct_phrases << "\n"
            << "labeled_nodes," << stats.labeled_nodes << "\n"
            << "mean_length," << format_double(stats.mean_leaf_count) << "\n";
  if (!f.embeddings.empty()) {
    const auto corpus = collect_vocabulary(all);
    const Lexicon lex = load_glove(f.embeddings, f.embedding_dim, corpus, 0, f.lowercase);
    std::cout << "vocabulary," << corpus.size() << "\n"
              << "embedding_rows," << lex.vocab.size() << "\n"
              << "embedding_dim," << lex.table.dim() << "\n";
  }
  return 0;
}

int cmd_train(const TrainFlags& tf, const DataFlags& df, std::size_t runs, const std::string& out) {
  const TrainConfig base = resolve_config(tf);
  if (runs == 0) throw ConfigError("--runs must be positive");
  if (out.empty()) throw ConfigError("--out is required");
  require_inputs(df);

  const Dataset dataset = load_dataset(df.data_dir, base.task);
  std::vector<Tree> all = dataset.train;
  all.insert(all.end(), dataset.dev.begin(), dataset.dev.end());
  all.insert(all.end(), dataset.test.begin(), dataset.test.end());
  const auto corpus = collect_vocabulary(all);

  std::vector<fs::path> inputs = split_paths(df.data_dir);
  if (!df.embeddings.empty()) inputs.emplace_back(df.embeddings);
  const std::string input_hash = combined_input_hash(inputs);

  fs::create_directories(out);
  std::vector<double> test_accuracies;
  for (std::size_t run = 0; run < runs; ++run) {
    TrainConfig config = base;
    config.seed = base.seed + run;
    const fs::path run_dir = fs::path(out) / ("run_" + std::to_string(run));
    fs::create_directories(run_dir);

    TrainResult result = train(config, dataset, make_lexicon(df, corpus, config.seed),
                               [&](const EpochRecord& r) {
                                 std::cerr << "run " << run << " epoch " << r.epoch << " loss "
                                           << r.train_loss << " dev " << r.dev_accuracy << " ("
                                           << r.seconds << " s)\n";
                               });
    const EvalReport test = evaluate(result.best, dataset.test);
    test_accuracies.push_back(test.root_accuracy());

    RunManifest manifest;
    manifest.config = config;
    manifest.data_dir = df.data_dir;
    manifest.embeddings = df.embeddings;
    manifest.embedding_dim = df.embedding_dim;
    manifest.lowercase = df.lowercase;
    manifest.out_dir = run_dir.string();
    manifest.input_hash = input_hash;
    manifest.best_epoch = result.best_epoch;
    manifest.dev_accuracy = result.best_dev_accuracy;
    manifest.test_accuracy = test.root_accuracy();
    for (const auto& r : result.history) manifest.epoch_seconds.push_back(r.seconds);

    ModelArtifact artifact{std::move(result.best), result.best_epoch, result.best_dev_accuracy,
                           "manifest.txt"};
    save_model(artifact, run_dir / "model.bin");
    write_file(run_dir / "history.csv", history_csv(result.history));
    write_file(run_dir / "manifest.txt", manifest_to_text(manifest));
    std::cout << "run " << run << " seed " << config.seed << " best_epoch " << result.best_epoch
              << " dev " << format_double(result.best_dev_accuracy) << " test "
              << format_double(test.root_accuracy()) << "\n";
  }
  write_file(fs::path(out) / "stats.csv", run_stats_csv(run_stats(test_accuracies)));
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& split_path,
                 const std::optional<std::string>& task_flag) {
  const ModelArtifact artifact = load_model(model_path);
  const TaskKind task = artifact.params.shape.task;
  if (task_flag && parse_task(*task_flag) != task) {
    throw ConfigError("class-count mismatch: model predicts " +
                      std::to_string(artifact.params.shape.classes()) + " classes (" +
                      std::string(to_string(task)) + ") but the split was requested as " +
                      *task_flag);
  }
  std::vector<Tree> trees = load_split(split_path);
  if (task == TaskKind::Binary) trees = to_binary_task(trees);
  for (const Tree& tree : trees) {
    for (const auto& node : tree.nodes()) {
      if (node.label && static_cast<std::size_t>(*node.label) >= artifact.params.shape.classes()) {
        throw ConfigError("class-count mismatch: label " + std::to_string(*node.label) +
                          " outside the model's " +
                          std::to_string(artifact.params.shape.classes()) + " classes");
      }
    }
  }
  const EvalReport report = evaluate(artifact.params, trees);
  std::cout << eval_report_csv_header() << "\n" << eval_report_csv_row(report) << "\n";
  return 0;
}

int cmd_gradcheck(GradCheckOptions options, std::size_t seeds,
                  const std::optional<std::string>& fault) {
  options.seeds.clear();
  for (std::size_t s = 1; s <= seeds; ++s) options.seeds.push_back(s);
  options.tasks = {TaskKind::FineGrained, TaskKind::Binary};
  options.fault_tensor = fault;
  const GradCheckReport report = run_gradient_check(options);
  std::cout << "tensor,worst_relative_error\n";
  for (const auto& [name, err] : report.worst_by_tensor) {
    std::cout << name << "," << format_double(err) << "\n";
  }
  std::cout << "cases " << report.cases.size() << ", worst " << format_double(report.worst)
            << ", threshold " << format_double(options.threshold) << "\n";
  if (report.passed()) {
    std::cout << "PASS\n";
    return 0;
  }
  std::cout << "FAIL:";
  for (const auto& name : report.failing_tensors()) std::cout << " " << name;
  std::cout << "\n";
  return 1;
}

std::vector<double> read_accuracies(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "run_id,accuracy") continue;
    const auto comma = line.find(',');
    const std::string key = comma == std::string::npos ? "" : line.substr(0, comma);
    // Summary rows from a previous stats run are skipped.
    if (key == "min" || key == "q1" || key == "median" || key == "q3" || key == "max") continue;
    values.push_back(parse_double(comma == std::string::npos ? line : line.substr(comma + 1)));
  }
  return values;
}

int cmd_stats(const std::vector<std::string>& files) {
  std::vector<double> values;
  for (const auto& file : files) {
    const auto v = read_accuracies(file);
    values.insert(values.end(), v.begin(), v.end());
  }
  std::cout << run_stats_csv(run_stats(values));
  return 0;
}

int cmd_complexity(const std::string& path, std::size_t d, std::size_t d_w) {
  std::vector<std::pair<std::string, fs::path>> splits;
  if (fs::is_directory(path)) {
    for (const char* name : {"train", "dev", "test"}) {
      splits.emplace_back(name, fs::path(path) / (std::string(name) + ".txt"));
    }
  } else {
    splits.emplace_back(fs::path(path).stem().string(), path);
  }
  std::cout << "split,trees,mean_leaves,rnn_mean_multiplies,lstm_mean_multiplies,ratio\n";
  for (const auto& [name, file] : splits) {
    const auto trees = load_split(file);
    double rnn = 0.0, lstm = 0.0, leaves = 0.0;
    for (const Tree& tree : trees) {
      rnn += static_cast<double>(count_matvecs(tree, ModelKind::Rnn, d, d_w));
      lstm += static_cast<double>(count_matvecs(tree, ModelKind::LstmRnn, d, d_w));
      leaves += static_cast<double>(tree.leaf_count());
    }
    const double n = trees.empty() ? 1.0 : static_cast<double>(trees.size());
    std::cout << name << "," << trees.size() << "," << format_double(leaves / n) << ","
              << format_double(rnn / n) << "," << format_double(lstm / n) << ","
              << format_double(rnn > 0 ? lstm / rnn : 0.0) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-structured LSTM and RNN sentiment models"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  DataFlags data_flags;

  auto* prepare = app.add_subcommand("prepare", "Validate a treebank (and embeddings), print census");
  add_data_flags(prepare, data_flags, true);

  std::size_t runs = 1;
  std::string out_dir;
  auto* train_cmd = app.add_subcommand("train", "Train one or more seeded runs");
  add_train_flags(train_cmd, train_flags);
  add_data_flags(train_cmd, data_flags, true);
  train_cmd->add_option("--runs", runs, "Number of runs (seeds seed, seed+1, ...)");
  train_cmd->add_option("--out", out_dir, "Output directory")->required();

  std::string model_path, split_path;
  std::optional<std::string> eval_task;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on a treebank split");
  eval_cmd->add_option("model", model_path, "Model file")->required();
  eval_cmd->add_option("split", split_path, "Treebank split file")->required();
  eval_cmd->add_option("--task", eval_task, "Expected task of the split")
      ->check(CLI::IsMember({"fine", "binary"}));

  GradCheckOptions gc;
  std::size_t gc_seeds = 5;
  std::optional<std::string> gc_fault;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  gc_cmd->add_option("--threshold", gc.threshold, "Maximum relative error");
  gc_cmd->add_option("--seeds", gc_seeds, "Random instances per configuration");
  gc_cmd->add_option("--d", gc.d, "Inner dimension of the test models");
  gc_cmd->add_option("--embedding-dim", gc.d_w, "Leaf dimension of the test models");
  gc_cmd->add_option("--inject-fault", gc_fault, "Corrupt this tensor's gradient (self-test)");

  std::vector<std::string> stats_files;
  auto* stats_cmd = app.add_subcommand("stats", "Summary statistics over per-run accuracies");
  stats_cmd->add_option("files", stats_files, "CSV files (run_id,accuracy) or one number per line")
      ->required();

  std::string complexity_path;
  std::size_t cx_d = 50, cx_dw = 100;
  auto* cx_cmd = app.add_subcommand("complexity", "Forward-pass multiply counts per split");
  cx_cmd->add_option("path", complexity_path, "Treebank file or directory")->required();
  cx_cmd->add_option("--d", cx_d, "Inner dimension");
  cx_cmd->add_option("--embedding-dim", cx_dw, "Leaf dimension");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) return cmd_prepare(data_flags);
    if (*train_cmd) return cmd_train(train_flags, data_flags, runs, out_dir);
    if (*eval_cmd) return cmd_evaluate(model_path, split_path, eval_task);
    if (*gc_cmd) return cmd_gradcheck(gc, gc_seeds, gc_fault);
    if (*stats_cmd) return cmd_stats(stats_files);
    if (*cx_cmd) return cmd_complexity(complexity_path, cx_d, cx_dw);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
