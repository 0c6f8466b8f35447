#include "mixsum/model.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "mixsum/errors.hpp"

namespace mixsum {

void EncoderConfig::validate() const {
  if (vocab_buckets <= 0) throw ValidationError("encoder.vocab_buckets must be positive");
  if (embed_dim <= 0) throw ValidationError("encoder.embed_dim must be positive");
  if (backbone_dim <= 0) throw ValidationError("encoder.backbone_dim must be positive");
  if (contrastive_dim <= 0) throw ValidationError("encoder.contrastive_dim must be positive");
  if (num_classes <= 0) throw ValidationError("encoder.num_classes must be positive");
}

Eigen::MatrixXd& ParamStore::at(std::string_view name) {
  for (auto& t : tensors_) {
    if (t.name == name) return t.value;
  }
  throw RuntimeFailure("unknown parameter tensor: " + std::string(name));
}

const Eigen::MatrixXd& ParamStore::at(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t.value;
  }
  throw RuntimeFailure("unknown parameter tensor: " + std::string(name));
}

void ParamStore::add(std::string name, Eigen::MatrixXd value) {
  tensors_.push_back({std::move(name), std::move(value)});
}

void ParamStore::set_zero() {
  for (auto& t : tensors_) t.value.setZero();
}

double ParamStore::squared_norm() const {
  double total = 0.0;
  for (const auto& t : tensors_) total += t.value.squaredNorm();
  return total;
}

namespace {
constexpr char kCheckpointMagic[4] = {'M', 'X', 'S', 'C'};
constexpr uint32_t kCheckpointVersion = 1;
}  // namespace

void ParamStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 4);
  uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  uint32_t count = static_cast<uint32_t>(tensors_.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& t : tensors_) {
    uint32_t name_len = static_cast<uint32_t>(t.name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(t.name.data(), name_len);
    uint64_t rows = static_cast<uint64_t>(t.value.rows());
    uint64_t cols = static_cast<uint64_t>(t.value.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(t.value.data()),
              static_cast<std::streamsize>(rows * cols * sizeof(double)));
  }
  if (!out) throw RuntimeFailure("short write to checkpoint: " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw ValidationError("not a checkpoint file: " + path);
  }
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version in " + path);
  }
  uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  ParamStore store;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    Eigen::MatrixXd value(static_cast<long>(rows), static_cast<long>(cols));
    in.read(reinterpret_cast<char*>(value.data()),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) throw ValidationError("truncated checkpoint: " + path);
    store.add(std::move(name), std::move(value));
  }
  return store;
}

ModelParams init_params(const EncoderConfig& config, uint64_t seed) {
  config.validate();
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> uniform(-0.05, 0.05);
  auto weights = [&](long rows, long cols) {
    Eigen::MatrixXd m(rows, cols);
    for (long c = 0; c < cols; ++c) {
      for (long r = 0; r < rows; ++r) m(r, c) = uniform(engine);
    }
    return m;
  };
  const long v = config.vocab_buckets, e = config.embed_dim;
  const long d = config.backbone_dim, n = config.contrastive_dim;
  const long c = config.num_classes;

  ModelParams params;
  params.config = config;
  params.store.add("embed", weights(v, e));
  params.store.add("embed_default", weights(e, 1));
  params.store.add("enc_w", weights(d, e));
  params.store.add("enc_b", Eigen::MatrixXd::Zero(d, 1));
  params.store.add("mlp_w1", weights(d, d));
  params.store.add("mlp_b1", Eigen::MatrixXd::Zero(d, 1));
  params.store.add("mlp_w2", weights(n, d));
  params.store.add("mlp_b2", Eigen::MatrixXd::Zero(n, 1));
  params.store.add("cls_w", weights(c, d));
  params.store.add("cls_b", Eigen::MatrixXd::Zero(c, 1));
  return params;
}

ParamStore zero_grads(const ModelParams& params) {
  ParamStore grads;
  for (const auto& t : params.store.tensors()) {
    grads.add(t.name, Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols()));
  }
  return grads;
}

uint64_t hash_token(std::string_view token) {
  // FNV-1a, 64-bit.
  uint64_t h = 14695981039346656037ULL;
  for (char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> tokenize_whitespace_lower(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) {
        tokens.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Eigen::VectorXd encode(const std::string& text, const ModelParams& params,
                       EncodeCache* cache) {
  const auto& embed = params.store.at("embed");
  const auto& enc_w = params.store.at("enc_w");
  const auto& enc_b = params.store.at("enc_b");
  auto tokens = tokenize_whitespace_lower(text);

  Eigen::VectorXd pooled;
  std::vector<int> buckets;
  if (tokens.empty()) {
    pooled = params.store.at("embed_default").col(0);
  } else {
    pooled = Eigen::VectorXd::Zero(params.config.embed_dim);
    buckets.reserve(tokens.size());
    for (const auto& token : tokens) {
      int bucket = static_cast<int>(
          hash_token(token) %
          static_cast<uint64_t>(params.config.vocab_buckets));
      buckets.push_back(bucket);
      pooled += embed.row(bucket).transpose();
    }
    pooled /= static_cast<double>(tokens.size());
  }

  Eigen::VectorXd z_pre = enc_w * pooled + enc_b.col(0);
  Eigen::VectorXd z = z_pre.array().tanh();
  if (cache) {
    cache->buckets = std::move(buckets);
    cache->pooled = pooled;
    cache->z_pre = z_pre;
    cache->z = z;
  }
  return z;
}

Eigen::VectorXd project_contrastive(const Eigen::VectorXd& z,
                                    const ModelParams& params,
                                    ProjectCache* cache) {
  const auto& w1 = params.store.at("mlp_w1");
  const auto& b1 = params.store.at("mlp_b1");
  const auto& w2 = params.store.at("mlp_w2");
  const auto& b2 = params.store.at("mlp_b2");

  Eigen::VectorXd h_pre = w1 * z + b1.col(0);
  Eigen::VectorXd h = h_pre.array().tanh();
  Eigen::VectorXd big_g = w2 * h + b2.col(0);
  double norm = big_g.norm();
  if (norm < 1e-12) norm += 1e-12;
  Eigen::VectorXd g = big_g / norm;
  if (cache) {
    cache->h_pre = h_pre;
    cache->h = h;
    cache->big_g = big_g;
    cache->norm = norm;
    cache->g = g;
  }
  return g;
}

ClassifyResult classify(const Eigen::VectorXd& z, const ModelParams& params) {
  const auto& w = params.store.at("cls_w");
  const auto& b = params.store.at("cls_b");
  ClassifyResult result;
  result.logits = w * z + b.col(0);
  Eigen::VectorXd shifted =
      result.logits.array() - result.logits.maxCoeff();
  Eigen::VectorXd exps = shifted.array().exp();
  result.probs = exps / exps.sum();
  return result;
}

void encode_backward(const EncodeCache& cache, const Eigen::VectorXd& dz,
                     const ModelParams& params, ParamStore& grads) {
  const auto& enc_w = params.store.at("enc_w");
  Eigen::VectorXd dz_pre =
      dz.array() * (1.0 - cache.z.array().square());
  grads.at("enc_w") += dz_pre * cache.pooled.transpose();
  grads.at("enc_b").col(0) += dz_pre;
  Eigen::VectorXd dpooled = enc_w.transpose() * dz_pre;
  if (cache.buckets.empty()) {
    grads.at("embed_default").col(0) += dpooled;
  } else {
    auto& dembed = grads.at("embed");
    double scale = 1.0 / static_cast<double>(cache.buckets.size());
    for (int bucket : cache.buckets) {
      dembed.row(bucket) += scale * dpooled.transpose();
    }
  }
}

void project_backward(const ProjectCache& cache, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& dg, const ModelParams& params,
                      ParamStore& grads, Eigen::VectorXd& dz) {
  const auto& w1 = params.store.at("mlp_w1");
  const auto& w2 = params.store.at("mlp_w2");
  // Through g = G/||G||: dG = (dg - g (g . dg)) / ||G||.
  Eigen::VectorXd d_big_g =
      (dg - cache.g * cache.g.dot(dg)) / cache.norm;
  grads.at("mlp_w2") += d_big_g * cache.h.transpose();
  grads.at("mlp_b2").col(0) += d_big_g;
  Eigen::VectorXd dh = w2.transpose() * d_big_g;
  Eigen::VectorXd dh_pre = dh.array() * (1.0 - cache.h.array().square());
  grads.at("mlp_w1") += dh_pre * z.transpose();
  grads.at("mlp_b1").col(0) += dh_pre;
  dz += w1.transpose() * dh_pre;
}

void classify_backward(const Eigen::VectorXd& z,
                       const Eigen::VectorXd& dlogits,
                       const ModelParams& params, ParamStore& grads,
                       Eigen::VectorXd& dz) {
  const auto& w = params.store.at("cls_w");
  grads.at("cls_w") += dlogits * z.transpose();
  grads.at("cls_b").col(0) += dlogits;
  dz += w.transpose() * dlogits;
}

Eigen::VectorXd softmax_backward(const Eigen::VectorXd& probs,
                                 const Eigen::VectorXd& dprobs) {
  double inner = probs.dot(dprobs);
  return (probs.array() * (dprobs.array() - inner)).matrix();
}

}  // namespace mixsum
