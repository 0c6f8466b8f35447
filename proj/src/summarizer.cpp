#include "mixsum/summarizer.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "mixsum/errors.hpp"

namespace mixsum {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> word_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

}  // namespace

std::vector<Sentence> split_sentences(const std::string& text) {
  std::vector<Sentence> sentences;
  std::string cur;
  auto flush = [&] {
    std::string t = trim(cur);
    cur.clear();
    if (t.empty()) return;
    Sentence s;
    s.text = std::move(t);
    s.tokens = word_tokens(s.text);
    if (s.tokens.empty()) return;  // punctuation-only fragment
    s.index = static_cast<int>(sentences.size());
    sentences.push_back(std::move(s));
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    cur.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      bool at_end = i + 1 == text.size();
      bool before_space = !at_end && std::isspace(static_cast<unsigned char>(text[i + 1]));
      if (at_end || before_space) flush();
    }
  }
  flush();
  return sentences;
}

double sentence_similarity(const Sentence& a, const Sentence& b) {
  std::unordered_set<std::string> set_a(a.tokens.begin(), a.tokens.end());
  std::unordered_set<std::string> set_b(b.tokens.begin(), b.tokens.end());
  size_t overlap = 0;
  for (const auto& t : set_a) overlap += set_b.count(t);
  if (overlap == 0) return 0.0;
  double denom = std::log(static_cast<double>(a.tokens.size()) + 1.0) +
                 std::log(static_cast<double>(b.tokens.size()) + 1.0);
  return static_cast<double>(overlap) / denom;
}

Eigen::VectorXd pagerank(const Eigen::MatrixXd& weights, double damping,
                         double tol, int max_iter) {
  if (weights.rows() != weights.cols()) {
    throw ValidationError("pagerank: weight matrix must be square");
  }
  if ((weights.array() < 0.0).any()) {
    throw ValidationError("pagerank: negative weights");
  }
  const long n = weights.rows();
  if (n == 0) return Eigen::VectorXd();

  // Row-normalized transition matrix; dangling rows link uniformly.
  Eigen::MatrixXd transition(n, n);
  for (long i = 0; i < n; ++i) {
    double row_sum = weights.row(i).sum();
    if (row_sum > 0.0) {
      transition.row(i) = weights.row(i) / row_sum;
    } else {
      transition.row(i).setConstant(1.0 / static_cast<double>(n));
    }
  }

  Eigen::VectorXd scores = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next =
        Eigen::VectorXd::Constant(n, (1.0 - damping) / n) +
        damping * transition.transpose() * scores;
    double change = (next - scores).cwiseAbs().sum();
    scores = next;
    if (change < tol) break;
  }
  return scores;
}

SummaryRecord textrank_summarize(const std::string& text, int k) {
  if (k < 1) throw ValidationError("textrank: k must be >= 1");
  auto sentences = split_sentences(text);
  if (sentences.empty()) {
    throw ValidationError("textrank: no sentences in input text");
  }
  SummaryRecord record;
  record.source_hash = sha256_hex(text);
  record.origin = SummaryOrigin::textrank;
  const int n = static_cast<int>(sentences.size());
  if (n <= k) {
    record.summary = trim(text);
    return record;
  }

  Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double s = sentence_similarity(sentences[i], sentences[j]);
      sim(i, j) = s;
      sim(j, i) = s;
    }
  }
  Eigen::VectorXd scores = pagerank(sim, 0.85, 1e-6, 100);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Stable sort keeps document order among exactly tied scores.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });
  std::vector<int> selected(order.begin(), order.begin() + k);
  std::sort(selected.begin(), selected.end());

  std::string summary;
  for (int idx : selected) {
    if (!summary.empty()) summary += " ";
    summary += sentences[idx].text;
  }
  record.summary = std::move(summary);
  return record;
}

bool is_junk(const std::string& summary) {
  if (trim(summary).size() < 10) return true;
  auto tokens = word_tokens(summary);
  if (tokens.size() >= 4) {
    std::unordered_map<std::string, size_t> counts;
    size_t top = 0;
    for (const auto& t : tokens) top = std::max(top, ++counts[t]);
    if (2 * top > tokens.size()) return true;
  }
  return false;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                  nullptr)) {
    throw RuntimeFailure("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

SummaryCache SummaryCache::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open summary cache: " + path);
  SummaryCache cache;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": expected digest<TAB>summary");
    }
    cache.entries_[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return cache;
}

void SummaryCache::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write summary cache: " + path);
  std::vector<std::pair<std::string, std::string>> sorted(entries_.begin(),
                                                          entries_.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [digest, summary] : sorted) {
    out << digest << '\t' << summary << '\n';
  }
}

void SummaryCache::put(const std::string& digest, const std::string& summary) {
  entries_[digest] = summary;
}

std::optional<std::string> SummaryCache::lookup(const std::string& digest) const {
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

SummaryRecord summarize_with_fallback(const std::string& text,
                                      const SummaryCache& cache) {
  std::string digest = sha256_hex(text);
  if (auto external = cache.lookup(digest)) {
    if (!is_junk(*external)) {
      return {digest, *external, SummaryOrigin::external};
    }
    SummaryRecord record = textrank_summarize(text);
    record.origin = SummaryOrigin::fallback;
    return record;
  }
  return textrank_summarize(text);
}

}  // namespace mixsum
