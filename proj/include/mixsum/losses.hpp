#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mixsum {

enum class CeForm { paper_bce, standard_ce };

struct LossConfig {
  double lambda = 0.9;   // trade-off between cross-entropy and contrastive
  double tau = 0.3;      // temperature
  CeForm ce_form = CeForm::paper_bce;
  double epsilon = 1e-7; // log clamp

  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double ce = 0.0;
  double supcon = 0.0;
};

CeForm parse_ce_form(const std::string& name);
std::string ce_form_name(CeForm form);

/// Self-supervised contrastive objective over 2N unit features paired as
/// (i, i+N); mean of -log softmax(anchor, positive) over all 2N anchors.
double self_contrastive_loss(const std::vector<Eigen::VectorXd>& features,
                             double tau,
                             std::vector<Eigen::VectorXd>* grad = nullptr);

/// Supervised contrastive loss: every same-label sample is a positive.
/// Anchors without positives are skipped and excluded from the averaging
/// denominator; a batch of only singletons raises DegenerateBatchError.
double sup_contrastive_loss(const std::vector<Eigen::VectorXd>& features,
                            const std::vector<int>& labels, double tau,
                            std::vector<Eigen::VectorXd>* grad = nullptr);

/// Per-sample label/prediction loss, averaged over the batch. paper_bce sums
/// both the label and complement terms per class; standard_ce is the usual
/// -sum y*log(p). Soft labels enter linearly in both forms. Probabilities
/// are clamped to [epsilon, 1-epsilon] inside the logs.
double cross_entropy_loss(const std::vector<Eigen::VectorXd>& probs,
                          const std::vector<Eigen::VectorXd>& labels,
                          const LossConfig& config,
                          std::vector<Eigen::VectorXd>* grad_probs = nullptr);

LossBreakdown total_loss(double ce, double supcon, double lambda);

/// Compact mixed-batch cross-entropy: the average of the plain loss under
/// the primary and partner label sets. Equals the expanded soft-label form
/// exactly, by linearity in the label argument.
double mixsum_ce_loss(const std::vector<Eigen::VectorXd>& probs,
                      const std::vector<Eigen::VectorXd>& labels_primary,
                      const std::vector<Eigen::VectorXd>& labels_partner,
                      const LossConfig& config,
                      std::vector<Eigen::VectorXd>* grad_probs = nullptr);

/// Compact mixed-batch supervised contrastive loss: average of the plain
/// loss under the two one-hot label sets.
double mixsum_supcon_loss(const std::vector<Eigen::VectorXd>& features,
                          const std::vector<Eigen::VectorXd>& labels_primary,
                          const std::vector<Eigen::VectorXd>& labels_partner,
                          double tau,
                          std::vector<Eigen::VectorXd>* grad = nullptr);

LossBreakdown mixsum_total_loss(double ce_mix, double supcon_mix,
                                double lambda);

/// Index of the single 1 in an exactly one-hot vector; throws otherwise.
int one_hot_index(const Eigen::VectorXd& label);

}  // namespace mixsum
