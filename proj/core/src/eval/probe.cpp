#include "tnc/eval/probe.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <set>

#include "tnc/error.hpp"
#include "tnc/rng.hpp"

namespace tnc::eval {

namespace {

Matrix with_bias(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

void softmax_rows(Matrix& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - m).exp();
    logits.row(i) /= logits.row(i).sum();
  }
}

struct Problem {
  const Matrix& x;  // standardized, with bias column
  const Matrix& y;  // one-hot
  double l2;

  double value(const Matrix& w, Matrix* grad) const {
    Matrix p = x * w;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double m = p.row(i).maxCoeff();
      const double lse = m + std::log((p.row(i).array() - m).exp().sum());
      nll += lse - p.row(i).dot(y.row(i));
    }
    const double n = static_cast<double>(x.rows());
    const auto weights = w.topRows(w.rows() - 1);
    const double f = nll / n + 0.5 * l2 * weights.squaredNorm();
    if (grad) {
      softmax_rows(p);
      *grad = x.transpose() * (p - y) / n;
      grad->topRows(w.rows() - 1) += l2 * weights;
    }
    return f;
  }
};

}  // namespace

void LinearProbe::fit(const Matrix& x, std::span<const int> labels, int n_classes,
                      std::uint64_t seed, const ProbeOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() || x.rows() == 0)
    throw ContractError("linear probe: features and labels disagree or are empty");
  if (std::set<int>(labels.begin(), labels.end()).size() < 2)
    throw ContractError("linear probe: training labels cover a single class");
  if (!x.allFinite()) throw ContractError("linear probe: non-finite features");

  mean_ = x.colwise().mean();
  scale_ = ((x.rowwise() - mean_).array().square().colwise().sum() / static_cast<double>(x.rows()))
               .sqrt()
               .matrix();
  for (Eigen::Index j = 0; j < scale_.size(); ++j)
    if (scale_(j) == 0.0) scale_(j) = 1.0;
  const Matrix xs = with_bias((x.rowwise() - mean_).array().rowwise() / scale_.array());
  Matrix y = Matrix::Zero(x.rows(), n_classes);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= n_classes) throw ContractError("linear probe: label outside [0, n_classes)");
    y(i, c) = 1.0;
  }

  Rng rng = derive_rng(seed, 0x9f0be);
  std::normal_distribution<double> init(0.0, 0.01);
  weights_.resize(xs.cols(), n_classes);
  for (Eigen::Index i = 0; i < weights_.size(); ++i) weights_.data()[i] = init(rng);

  const Problem problem{xs, y, options.l2};
  Matrix grad;
  double f = problem.value(weights_, &grad);
  double step = 1.0;
  for (iterations_ = 0; iterations_ < options.max_iter; ++iterations_) {
    if (grad.cwiseAbs().maxCoeff() < options.gradient_tolerance) break;
    const double g2 = grad.squaredNorm();
    step *= 2.0;
    Matrix candidate;
    double fc = 0.0;
    for (;;) {
      candidate = weights_ - step * grad;
      fc = problem.value(candidate, nullptr);
      if (fc <= f - 0.5 * step * g2 || step < 1e-12) break;
      step *= 0.5;
    }
    weights_ = std::move(candidate);
    f = problem.value(weights_, &grad);
  }
  objective_ = f;
}

Matrix LinearProbe::predict_proba(const Matrix& x) const {
  if (x.cols() != mean_.size()) throw ContractError("linear probe: feature width differs from training");
  Matrix p = with_bias((x.rowwise() - mean_).array().rowwise() / scale_.array()) * weights_;
  softmax_rows(p);
  return p;
}

std::vector<int> LinearProbe::predict(const Matrix& x) const {
  const Matrix p = predict_proba(x);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index c = 0;
    p.row(i).maxCoeff(&c);
    out[static_cast<std::size_t>(i)] = static_cast<int>(c);
  }
  return out;
}

double average_precision(std::span<const double> scores, std::span<const bool> positive, PrCurve* curve) {
  if (scores.size() != positive.size()) throw ContractError("average_precision: size mismatch");
  const auto total_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  if (total_pos == 0) throw ContractError("average_precision: no positive examples");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  double ap = 0.0, tp = 0.0, seen = 0.0, prev_recall = 0.0;
  if (curve) *curve = {};
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += positive[order[j]] ? 1.0 : 0.0;
      seen += 1.0;
      ++j;
    }
    const double precision = tp / seen;
    const double recall = tp / total_pos;
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    if (curve) {
      curve->precision.push_back(precision);
      curve->recall.push_back(recall);
    }
    i = j;
  }
  return ap;
}

double macro_auprc(const Matrix& scores, std::span<const int> labels, std::vector<PrCurve>* curves) {
  if (static_cast<std::size_t>(scores.rows()) != labels.size())
    throw ContractError("macro_auprc: size mismatch");
  const std::set<int> present(labels.begin(), labels.end());
  if (present.empty()) throw ContractError("macro_auprc: no labels");
  if (curves) curves->assign(static_cast<std::size_t>(scores.cols()), {});
  double total = 0.0;
  for (int c : present) {
    if (c < 0 || c >= scores.cols()) throw ContractError("macro_auprc: label without a score column");
    std::vector<double> s(labels.size());
    auto pos = std::make_unique<bool[]>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      s[i] = scores(static_cast<Eigen::Index>(i), c);
      pos[i] = labels[i] == c;
    }
    const std::span<const bool> flags(pos.get(), labels.size());
    total += average_precision(s, flags, curves ? &(*curves)[static_cast<std::size_t>(c)] : nullptr);
  }
  return total / static_cast<double>(present.size());
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw ContractError("accuracy: size mismatch or empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

ClassifierEval linear_probe(const EncodedSet& train, const EncodedSet& test, std::uint64_t seed,
                            const ProbeOptions& options) {
  if (!train.labeled() || !test.labeled()) throw ContractError("linear probe: labels required");
  const int classes = std::max(train.n_classes(), test.n_classes());
  LinearProbe probe;
  probe.fit(train.encodings, train.labels, classes, seed, options);
  ClassifierEval out;
  const Matrix p = probe.predict_proba(test.encodings);
  out.predictions = probe.predict(test.encodings);
  out.accuracy = accuracy(out.predictions, test.labels);
  out.auprc = macro_auprc(p, test.labels, &out.curves);
  return out;
}

}  // namespace tnc::eval
