#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tnc/eval/encode.hpp"

namespace tnc::eval {

struct ProbeOptions {
  double l2 = 1e-4;
  int max_iter = 5000;
  double gradient_tolerance = 1e-6;
};

/// Multinomial logistic regression on standardized features, fitted by
/// full-batch gradient descent with a backtracking line search. The L2
/// penalty applies to weights, not biases.
class LinearProbe {
 public:
  void fit(const Matrix& x, std::span<const int> labels, int n_classes, std::uint64_t seed,
           const ProbeOptions& options = {});
  /// n x C class probabilities.
  Matrix predict_proba(const Matrix& x) const;
  std::vector<int> predict(const Matrix& x) const;

  int iterations() const { return iterations_; }
  double objective() const { return objective_; }
  const Matrix& weights() const { return weights_; }

 private:
  Eigen::RowVectorXd mean_, scale_;
  Matrix weights_;  // (M + 1) x C, last row is the bias
  int iterations_ = 0;
  double objective_ = 0.0;
};

struct PrCurve {
  std::vector<double> precision;
  std::vector<double> recall;
};

/// Area under the precision-recall step function: sum over distinct score
/// thresholds (descending) of (R_k - R_{k-1}) * P_k. Tied scores form one
/// threshold. Throws ContractError when there are no positives.
double average_precision(std::span<const double> scores, std::span<const bool> positive,
                         PrCurve* curve = nullptr);

/// Macro average of one-vs-rest average precision over classes that occur
/// in `labels`.
double macro_auprc(const Matrix& scores, std::span<const int> labels,
                   std::vector<PrCurve>* curves = nullptr);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

struct ClassifierEval {
  double accuracy = 0.0;
  double auprc = 0.0;
  std::vector<PrCurve> curves;
  std::vector<int> predictions;
};

/// Trains on `train`, evaluates on `test`. Throws ContractError when the
/// training labels cover fewer than two classes.
ClassifierEval linear_probe(const EncodedSet& train, const EncodedSet& test, std::uint64_t seed,
                            const ProbeOptions& options = {});

}  // namespace tnc::eval
