#include "mixsum/losses.hpp"

#include <cmath>

#include "mixsum/errors.hpp"

namespace mixsum {

void LossConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ValidationError("loss.lambda must be in [0, 1]");
  }
  if (!(tau > 0.0)) throw ValidationError("loss.tau must be positive");
  if (!(epsilon > 0.0) || epsilon > 1e-3) {
    throw ValidationError("loss.epsilon must be in (0, 1e-3]");
  }
}

CeForm parse_ce_form(const std::string& name) {
  if (name == "paper-bce") return CeForm::paper_bce;
  if (name == "standard-ce") return CeForm::standard_ce;
  throw ValidationError("loss.ce_form: unknown value '" + name + "'");
}

std::string ce_form_name(CeForm form) {
  return form == CeForm::paper_bce ? "paper-bce" : "standard-ce";
}

namespace {

void check_unit_norm(const std::vector<Eigen::VectorXd>& features) {
  for (size_t i = 0; i < features.size(); ++i) {
    if (std::abs(features[i].norm() - 1.0) > 1e-3) {
      throw ValidationError("contrastive feature " + std::to_string(i) +
                            " is not unit-norm");
    }
  }
}

// Pairwise dot products; diagonal left at zero (never read).
Eigen::MatrixXd similarity_matrix(const std::vector<Eigen::VectorXd>& features) {
  const int m = static_cast<int>(features.size());
  Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double s = features[i].dot(features[j]);
      sim(i, j) = s;
      sim(j, i) = s;
    }
  }
  return sim;
}

// Feature gradients from d(loss)/d(similarity entries), where entry (a,b)
// is the coefficient written for anchor a. Both orientations contribute
// since S_ab = S_ba = g_a . g_b.
void similarity_backward(const Eigen::MatrixXd& dsim,
                         const std::vector<Eigen::VectorXd>& features,
                         std::vector<Eigen::VectorXd>* grad) {
  if (!grad) return;
  const int m = static_cast<int>(features.size());
  grad->assign(m, Eigen::VectorXd::Zero(features[0].size()));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      double coeff = dsim(a, b) + dsim(b, a);
      if (coeff != 0.0) (*grad)[a] += coeff * features[b];
    }
  }
}

}  // namespace

double self_contrastive_loss(const std::vector<Eigen::VectorXd>& features,
                             double tau,
                             std::vector<Eigen::VectorXd>* grad) {
  const int m = static_cast<int>(features.size());
  if (m < 4 || m % 2 != 0) {
    throw ValidationError("self-contrastive loss needs an even batch of >= 4");
  }
  check_unit_norm(features);
  const int n = m / 2;
  Eigen::MatrixXd sim = similarity_matrix(features);
  Eigen::MatrixXd dsim = Eigen::MatrixXd::Zero(m, m);

  double loss = 0.0;
  for (int a = 0; a < m; ++a) {
    int positive = a < n ? a + n : a - n;
    // Stable log-sum-exp over k != a.
    double max_s = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
      if (k != a) max_s = std::max(max_s, sim(a, k) / tau);
    }
    double denom = 0.0;
    for (int k = 0; k < m; ++k) {
      if (k != a) denom += std::exp(sim(a, k) / tau - max_s);
    }
    loss += -sim(a, positive) / tau + max_s + std::log(denom);
    if (grad) {
      dsim(a, positive) -= 1.0 / (m * tau);
      for (int k = 0; k < m; ++k) {
        if (k == a) continue;
        double softmax = std::exp(sim(a, k) / tau - max_s) / denom;
        dsim(a, k) += softmax / (m * tau);
      }
    }
  }
  loss /= m;
  if (grad) similarity_backward(dsim, features, grad);
  return loss;
}

double sup_contrastive_loss(const std::vector<Eigen::VectorXd>& features,
                            const std::vector<int>& labels, double tau,
                            std::vector<Eigen::VectorXd>* grad) {
  const int m = static_cast<int>(features.size());
  if (m < 2) throw ValidationError("supervised contrastive loss needs >= 2 samples");
  if (labels.size() != features.size()) {
    throw ValidationError("supervised contrastive loss: label count mismatch");
  }
  check_unit_norm(features);

  std::vector<int> positives(m, 0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j != i && labels[j] == labels[i]) ++positives[i];
    }
  }
  int active = 0;
  for (int i = 0; i < m; ++i) {
    if (positives[i] > 0) ++active;
  }
  if (active == 0) {
    throw DegenerateBatchError(
        "supervised contrastive loss: every class is a batch singleton");
  }

  Eigen::MatrixXd sim = similarity_matrix(features);
  Eigen::MatrixXd dsim = Eigen::MatrixXd::Zero(m, m);
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    if (positives[i] == 0) continue;  // skipped anchor
    double max_s = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
      if (k != i) max_s = std::max(max_s, sim(i, k) / tau);
    }
    double denom = 0.0;
    for (int k = 0; k < m; ++k) {
      if (k != i) denom += std::exp(sim(i, k) / tau - max_s);
    }
    double lse = max_s + std::log(denom);
    double anchor_loss = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == i || labels[j] != labels[i]) continue;
      anchor_loss += -sim(i, j) / tau + lse;
      if (grad) dsim(i, j) -= 1.0 / (active * positives[i] * tau);
    }
    loss += anchor_loss / positives[i];
    if (grad) {
      for (int k = 0; k < m; ++k) {
        if (k == i) continue;
        double softmax = std::exp(sim(i, k) / tau - max_s) / denom;
        dsim(i, k) += softmax / (active * tau);
      }
    }
  }
  loss /= active;
  if (grad) similarity_backward(dsim, features, grad);
  return loss;
}

double cross_entropy_loss(const std::vector<Eigen::VectorXd>& probs,
                          const std::vector<Eigen::VectorXd>& labels,
                          const LossConfig& config,
                          std::vector<Eigen::VectorXd>* grad_probs) {
  config.validate();
  const int m = static_cast<int>(probs.size());
  if (m == 0) throw ValidationError("cross-entropy: empty batch");
  if (labels.size() != probs.size()) {
    throw ValidationError("cross-entropy: label count mismatch");
  }
  const double eps = config.epsilon;
  if (grad_probs) grad_probs->assign(m, Eigen::VectorXd());

  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd& p = probs[i];
    const Eigen::VectorXd& y = labels[i];
    if (p.size() != y.size()) {
      throw ValidationError("cross-entropy: dimension mismatch at sample " +
                            std::to_string(i));
    }
    if ((p.array() < 0.0).any()) {
      throw ValidationError("cross-entropy: negative probability at sample " +
                            std::to_string(i));
    }
    if (std::abs(p.sum() - 1.0) > 1e-6) {
      throw ValidationError("cross-entropy: probabilities at sample " +
                            std::to_string(i) + " do not sum to 1");
    }
    Eigen::VectorXd dp = Eigen::VectorXd::Zero(p.size());
    for (long c = 0; c < p.size(); ++c) {
      double pc = std::clamp(p(c), eps, 1.0 - eps);
      bool clamped = p(c) < eps || p(c) > 1.0 - eps;
      loss -= y(c) * std::log(pc);
      if (!clamped) dp(c) -= y(c) / pc;
      if (config.ce_form == CeForm::paper_bce) {
        loss -= (1.0 - y(c)) * std::log(1.0 - pc);
        if (!clamped) dp(c) += (1.0 - y(c)) / (1.0 - pc);
      }
    }
    if (grad_probs) (*grad_probs)[i] = dp / m;
  }
  return loss / m;
}

LossBreakdown total_loss(double ce, double supcon, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ValidationError("lambda must be in [0, 1]");
  }
  return {lambda * ce + (1.0 - lambda) * supcon, ce, supcon};
}

double mixsum_ce_loss(const std::vector<Eigen::VectorXd>& probs,
                      const std::vector<Eigen::VectorXd>& labels_primary,
                      const std::vector<Eigen::VectorXd>& labels_partner,
                      const LossConfig& config,
                      std::vector<Eigen::VectorXd>* grad_probs) {
  if (labels_partner.size() != probs.size()) {
    throw ValidationError("mixsum cross-entropy: partner labels absent");
  }
  std::vector<Eigen::VectorXd> grad_a, grad_b;
  double a = cross_entropy_loss(probs, labels_primary, config,
                                grad_probs ? &grad_a : nullptr);
  double b = cross_entropy_loss(probs, labels_partner, config,
                                grad_probs ? &grad_b : nullptr);
  if (grad_probs) {
    grad_probs->resize(probs.size());
    for (size_t i = 0; i < probs.size(); ++i) {
      (*grad_probs)[i] = 0.5 * grad_a[i] + 0.5 * grad_b[i];
    }
  }
  return 0.5 * a + 0.5 * b;
}

double mixsum_supcon_loss(const std::vector<Eigen::VectorXd>& features,
                          const std::vector<Eigen::VectorXd>& labels_primary,
                          const std::vector<Eigen::VectorXd>& labels_partner,
                          double tau,
                          std::vector<Eigen::VectorXd>* grad) {
  if (labels_partner.size() != features.size()) {
    throw ValidationError("mixsum supcon: partner labels absent");
  }
  std::vector<int> primary, partner;
  primary.reserve(features.size());
  partner.reserve(features.size());
  for (const auto& y : labels_primary) primary.push_back(one_hot_index(y));
  for (const auto& y : labels_partner) partner.push_back(one_hot_index(y));

  std::vector<Eigen::VectorXd> grad_a, grad_b;
  double a = sup_contrastive_loss(features, primary, tau,
                                  grad ? &grad_a : nullptr);
  double b = sup_contrastive_loss(features, partner, tau,
                                  grad ? &grad_b : nullptr);
  if (grad) {
    grad->resize(features.size());
    for (size_t i = 0; i < features.size(); ++i) {
      (*grad)[i] = 0.5 * grad_a[i] + 0.5 * grad_b[i];
    }
  }
  return 0.5 * a + 0.5 * b;
}

LossBreakdown mixsum_total_loss(double ce_mix, double supcon_mix,
                                double lambda) {
  return total_loss(ce_mix, supcon_mix, lambda);
}

int one_hot_index(const Eigen::VectorXd& label) {
  int index = -1;
  for (long c = 0; c < label.size(); ++c) {
    if (std::abs(label(c) - 1.0) <= 1e-12) {
      if (index >= 0) throw ValidationError("label vector is not one-hot");
      index = static_cast<int>(c);
    } else if (std::abs(label(c)) > 1e-12) {
      throw ValidationError("label vector is not one-hot");
    }
  }
  if (index < 0) throw ValidationError("label vector is not one-hot");
  return index;
}

}  // namespace mixsum
