// Test-only helpers: naive loss oracles independent of the library's fast
// paths, a dense PageRank solve, random batch generators and a synthetic
// keyword dataset.
#pragma once

#include <unistd.h>

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mixsum/dataset.hpp"

namespace testsupport {

// ---- naive loss oracles (double/triple loops, no shared code with src/) ----

inline double oracle_self_contrastive(
    const std::vector<Eigen::VectorXd>& f, double tau) {
  const int m = static_cast<int>(f.size());
  const int n = m / 2;
  double total = 0.0;
  for (int a = 0; a < m; ++a) {
    int p = a < n ? a + n : a - n;
    double denom = 0.0;
    for (int k = 0; k < m; ++k) {
      if (k != a) denom += std::exp(f[a].dot(f[k]) / tau);
    }
    total += -std::log(std::exp(f[a].dot(f[p]) / tau) / denom);
  }
  return total / m;
}

inline double oracle_sup_contrastive(const std::vector<Eigen::VectorXd>& f,
                                     const std::vector<int>& labels,
                                     double tau) {
  const int m = static_cast<int>(f.size());
  double total = 0.0;
  int active = 0;
  for (int i = 0; i < m; ++i) {
    int positives = 0;
    for (int j = 0; j < m; ++j) {
      if (j != i && labels[j] == labels[i]) ++positives;
    }
    if (positives == 0) continue;
    ++active;
    double anchor = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == i || labels[j] != labels[i]) continue;
      double denom = 0.0;
      for (int k = 0; k < m; ++k) {
        if (k != i) denom += std::exp(f[i].dot(f[k]) / tau);
      }
      anchor += -std::log(std::exp(f[i].dot(f[j]) / tau) / denom);
    }
    total += anchor / positives;
  }
  return total / active;
}

inline double oracle_cross_entropy(const std::vector<Eigen::VectorXd>& probs,
                                   const std::vector<Eigen::VectorXd>& labels,
                                   bool paper_bce, double eps) {
  double total = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    for (long c = 0; c < probs[i].size(); ++c) {
      double p = probs[i](c);
      if (p < eps) p = eps;
      if (p > 1.0 - eps) p = 1.0 - eps;
      double y = labels[i](c);
      total -= y * std::log(p);
      if (paper_bce) total -= (1.0 - y) * std::log(1.0 - p);
    }
  }
  return total / static_cast<double>(probs.size());
}

// Expanded mixed-batch cross-entropy: soft labels on the augmented half,
// computed directly rather than via the averaged compact form.
inline double oracle_mixsum_ce_expanded(
    const std::vector<Eigen::VectorXd>& probs,
    const std::vector<Eigen::VectorXd>& labels_primary,
    const std::vector<Eigen::VectorXd>& labels_partner, bool paper_bce,
    double eps) {
  std::vector<Eigen::VectorXd> soft(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) {
    soft[i] = 0.5 * labels_primary[i] + 0.5 * labels_partner[i];
  }
  return oracle_cross_entropy(probs, soft, paper_bce, eps);
}

// ---- dense fixed-point PageRank (linear solve, not power iteration) ----

inline Eigen::VectorXd oracle_pagerank_fixed_point(
    const Eigen::MatrixXd& weights, double damping) {
  const long n = weights.rows();
  Eigen::MatrixXd transition(n, n);
  for (long i = 0; i < n; ++i) {
    double row_sum = weights.row(i).sum();
    if (row_sum > 0.0) {
      transition.row(i) = weights.row(i) / row_sum;
    } else {
      transition.row(i).setConstant(1.0 / static_cast<double>(n));
    }
  }
  // r = (1-d)/n * 1 + d * P^T r  =>  (I - d P^T) r = (1-d)/n * 1
  Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(n, n) - damping * transition.transpose();
  Eigen::VectorXd b =
      Eigen::VectorXd::Constant(n, (1.0 - damping) / static_cast<double>(n));
  return a.colPivHouseholderQr().solve(b);
}

// ---- random generators ----

inline Eigen::VectorXd random_unit_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v / v.norm();
}

inline std::vector<Eigen::VectorXd> random_unit_batch(std::mt19937_64& rng,
                                                      int count, int dim) {
  std::vector<Eigen::VectorXd> batch;
  for (int i = 0; i < count; ++i) batch.push_back(random_unit_vector(rng, dim));
  return batch;
}

inline Eigen::VectorXd random_prob_vector(std::mt19937_64& rng, int classes) {
  std::uniform_real_distribution<double> uniform(0.05, 1.0);
  Eigen::VectorXd v(classes);
  for (int i = 0; i < classes; ++i) v(i) = uniform(rng);
  return v / v.sum();
}

// ---- synthetic keyword dataset ----

// Class-indicative token distributions: each document mixes words drawn
// from its class vocabulary with shared filler words, split into a few
// sentences so the extractive summarizer has something to rank.
inline mixsum::Dataset synthetic_keyword_dataset(int num_classes,
                                                 int examples_per_class,
                                                 uint64_t seed,
                                                 int id_offset = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> words_per_sentence(5, 9);
  std::uniform_int_distribution<int> sentences_per_doc(2, 4);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> class_word(0, 9);
  std::uniform_int_distribution<int> filler_word(0, 19);

  mixsum::Dataset ds;
  ds.name = "synthetic";
  ds.num_classes = num_classes;
  int id = id_offset;
  for (int c = 0; c < num_classes; ++c) {
    for (int e = 0; e < examples_per_class; ++e) {
      std::string text;
      int sentences = sentences_per_doc(rng);
      for (int s = 0; s < sentences; ++s) {
        int words = words_per_sentence(rng);
        std::string sentence;
        for (int w = 0; w < words; ++w) {
          if (!sentence.empty()) sentence += " ";
          if (coin(rng) < 0.6) {
            sentence += "class" + std::to_string(c) + "word" +
                        std::to_string(class_word(rng));
          } else {
            sentence += "filler" + std::to_string(filler_word(rng));
          }
        }
        if (!text.empty()) text += " ";
        text += sentence + ".";
      }
      ds.examples.push_back({id++, text, c});
    }
  }
  // Interleave classes so unshuffled batches are still mixed.
  std::vector<mixsum::Example> interleaved;
  for (int e = 0; e < examples_per_class; ++e) {
    for (int c = 0; c < num_classes; ++c) {
      interleaved.push_back(ds.examples[c * examples_per_class + e]);
    }
  }
  ds.examples = std::move(interleaved);
  return ds;
}

// ---- scratch files ----

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mixsum_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace testsupport
