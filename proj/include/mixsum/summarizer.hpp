#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mixsum {

struct Sentence {
  std::string text;
  int index = 0;  // position in the source document
  std::vector<std::string> tokens;
};

enum class SummaryOrigin { external, textrank, fallback };

struct SummaryRecord {
  std::string source_hash;
  std::string summary;
  SummaryOrigin origin = SummaryOrigin::textrank;
};

/// Splits on '.', '!' or '?' followed by whitespace or end of text;
/// terminators stay with their sentence. Fragments without any alphanumeric
/// token are dropped.
std::vector<Sentence> split_sentences(const std::string& text);

/// Unique-token overlap scaled by log sentence lengths:
/// |overlap| / (ln(|a|+1) + ln(|b|+1)). Symmetric, zero without overlap.
double sentence_similarity(const Sentence& a, const Sentence& b);

/// Power iteration on the weighted PageRank recurrence. Rows with all-zero
/// weight are treated as uniformly linked. Scores sum to 1 within tol.
Eigen::VectorXd pagerank(const Eigen::MatrixXd& weights, double damping,
                         double tol, int max_iter);

/// Extractive summary: top-k sentences by PageRank score, emitted in
/// document order, ties broken toward the earlier sentence. Documents with
/// at most k sentences are returned verbatim.
SummaryRecord textrank_summarize(const std::string& text, int k = 1);

/// Degenerate-summary heuristic: too short, or dominated by one token.
bool is_junk(const std::string& summary);

/// Lowercase hex SHA-256 of the raw bytes.
std::string sha256_hex(const std::string& bytes);

/// Digest-keyed store of externally produced summaries, persisted as
/// `digest<TAB>summary` lines.
class SummaryCache {
 public:
  SummaryCache() = default;

  static SummaryCache load(const std::string& path);
  void save(const std::string& path) const;

  void put(const std::string& digest, const std::string& summary);
  std::optional<std::string> lookup(const std::string& digest) const;
  size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

/// Cache hit with a clean summary wins; junk hits fall back to TextRank
/// (origin=fallback); misses run TextRank directly (origin=textrank).
SummaryRecord summarize_with_fallback(const std::string& text,
                                      const SummaryCache& cache);

}  // namespace mixsum
