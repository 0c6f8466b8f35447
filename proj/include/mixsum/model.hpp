#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mixsum {

struct EncoderConfig {
  int vocab_buckets = 16384;
  int embed_dim = 64;
  int backbone_dim = 64;     // d
  int contrastive_dim = 128; // n
  int num_classes = 0;       // C

  void validate() const;
};

/// Named dense tensors in a fixed order; the unit of checkpointing and of
/// the Adam moment accumulators.
class ParamStore {
 public:
  struct Tensor {
    std::string name;
    Eigen::MatrixXd value;
  };

  Eigen::MatrixXd& at(std::string_view name);
  const Eigen::MatrixXd& at(std::string_view name) const;
  void add(std::string name, Eigen::MatrixXd value);

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  void set_zero();
  double squared_norm() const;

  /// Bit-exact binary round trip.
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  std::vector<Tensor> tensors_;
};

struct ModelParams {
  EncoderConfig config;
  ParamStore store;
};

/// Weights uniform in [-0.05, 0.05], biases zero; deterministic per seed.
ModelParams init_params(const EncoderConfig& config, uint64_t seed);

/// Zero gradients shaped like the parameters.
ParamStore zero_grads(const ModelParams& params);

uint64_t hash_token(std::string_view token);
std::vector<std::string> tokenize_whitespace_lower(const std::string& text);

/// Forward-pass caches retained for backpropagation.
struct EncodeCache {
  std::vector<int> buckets;  // one entry per token occurrence
  Eigen::VectorXd pooled;    // mean bucket embedding (or the learned default)
  Eigen::VectorXd z_pre;     // before tanh
  Eigen::VectorXd z;
};

struct ProjectCache {
  Eigen::VectorXd h_pre;
  Eigen::VectorXd h;
  Eigen::VectorXd big_g;
  double norm = 0.0;  // ||G|| after the near-zero guard
  Eigen::VectorXd g;
};

struct ClassifyResult {
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;
};

/// Toy backbone: hash tokens into buckets, mean-pool the bucket embeddings,
/// one affine map + tanh. Empty token lists use a learned default vector.
Eigen::VectorXd encode(const std::string& text, const ModelParams& params,
                       EncodeCache* cache = nullptr);

/// MLP head (affine, tanh, affine) followed by l2 normalization.
Eigen::VectorXd project_contrastive(const Eigen::VectorXd& z,
                                    const ModelParams& params,
                                    ProjectCache* cache = nullptr);

/// Softmax classifier over the backbone feature z (the projection head
/// serves only the contrastive loss).
ClassifyResult classify(const Eigen::VectorXd& z, const ModelParams& params);

void encode_backward(const EncodeCache& cache, const Eigen::VectorXd& dz,
                     const ModelParams& params, ParamStore& grads);

/// Accumulates parameter gradients and adds the contribution to dz.
void project_backward(const ProjectCache& cache, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& dg, const ModelParams& params,
                      ParamStore& grads, Eigen::VectorXd& dz);

void classify_backward(const Eigen::VectorXd& z,
                       const Eigen::VectorXd& dlogits,
                       const ModelParams& params, ParamStore& grads,
                       Eigen::VectorXd& dz);

/// d(loss)/d(logits) from d(loss)/d(probs) through the softmax Jacobian.
Eigen::VectorXd softmax_backward(const Eigen::VectorXd& probs,
                                 const Eigen::VectorXd& dprobs);

}  // namespace mixsum
