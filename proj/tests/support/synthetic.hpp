#pragma once

// Synthetic sentiment treebank with SST-like shape: sentence lengths around
// 19 tokens, a Zipf-distributed vocabulary, and labels produced by a
// compositional rule (word polarities summed bottom-up, flipped by negators)
// so that the models have something learnable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "treelstm/treebank.hpp"

namespace treelstm::testing {

struct SyntheticCorpus {
  std::vector<std::string> words;
  std::vector<int> polarity;  // -2..2; 99 marks a negator
  std::discrete_distribution<std::size_t> zipf;
};

inline SyntheticCorpus make_corpus(std::size_t vocab_size, std::uint64_t seed) {
  SyntheticCorpus corpus;
  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    corpus.words.push_back("w" + std::to_string(i));
    weights.push_back(1.0 / static_cast<double>(i + 1));
    const double r = u(rng);
    int pol = 0;
    if (i % 97 == 3) {
      pol = 99;
    } else if (r < 0.08) {
      pol = -2;
    } else if (r < 0.2) {
      pol = -1;
    } else if (r < 0.32) {
      pol = 1;
    } else if (r < 0.4) {
      pol = 2;
    }
    corpus.polarity.push_back(pol);
  }
  corpus.zipf = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  return corpus;
}

struct Built {
  Tree tree;
  int score = 0;
  bool negator = false;
};

inline int score_to_label(int score) { return std::clamp(score, -2, 2) + 2; }

inline Built build_synthetic(std::size_t leaves, SyntheticCorpus& corpus, std::mt19937_64& rng) {
  if (leaves == 1) {
    const std::size_t w = corpus.zipf(rng);
    const int pol = corpus.polarity[w];
    Built b;
    b.negator = pol == 99;
    b.score = b.negator ? 0 : pol;
    b.tree = Tree::leaf(score_to_label(b.score), corpus.words[w]);
    return b;
  }
  std::uniform_int_distribution<std::size_t> split(1, leaves - 1);
  const std::size_t left = split(rng);
  Built l = build_synthetic(left, corpus, rng);
  Built r = build_synthetic(leaves - left, corpus, rng);
  Built b;
  if (l.negator) {
    b.score = -r.score;
  } else if (r.negator) {
    b.score = -l.score;
  } else {
    b.score = std::clamp(l.score + r.score, -2, 2);
  }
  b.tree = Tree::join(score_to_label(b.score), l.tree, r.tree);
  return b;
}

// Sentence lengths drawn from a shifted negative binomial with mean ~19.
inline std::vector<Tree> synthetic_split(std::size_t count, SyntheticCorpus& corpus,
                                         std::uint64_t seed, std::size_t max_len = 60) {
  std::mt19937_64 rng(seed);
  std::negative_binomial_distribution<int> length(4, 4.0 / (4.0 + 17.1));
  std::vector<Tree> trees;
  trees.reserve(count);
  while (trees.size() < count) {
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(length(rng)) + 2, max_len);
    trees.push_back(build_synthetic(n, corpus, rng).tree);
  }
  return trees;
}

}  // namespace treelstm::testing
