#include "subq/fitters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace subq {

double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }

namespace {

std::vector<double> scalar_outputs(const TrainingDataset& data) {
  std::vector<double> xs;
  xs.reserve(data.size());
  for (const auto& r : data.records) xs.push_back(r.output.at(0));
  return xs;
}

NormalParams fit_normal(std::span<const double> xs) {
  const double m = static_cast<double>(xs.size());
  double mu = 0.0;
  for (double x : xs) mu += x;
  mu /= m;
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  const double sd = std::sqrt(ss / m);  // 1/m divisor (MLE)
  if (sd == 0.0)
    throw DegenerateData("NormalMLE: zero variance in training data");
  return {mu, sd};
}

PiecewiseRateParams fit_piecewise(const Fitter& f, const TrainingDataset& data) {
  std::vector<double> counts(static_cast<std::size_t>(f.periods), 0.0);
  for (const auto& r : data.records) {
    const double t = r.output.at(0);
    const auto period =
        static_cast<std::size_t>(std::floor(t)) % static_cast<std::size_t>(f.periods);
    counts[period] += 1.0;
  }
  PiecewiseRateParams p;
  p.rates.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    p.rates[i] = counts[i] / f.exposure_per_period;
  return p;
}

/// Normal scores of the ranks, midpoint convention.
std::vector<double> normal_scores(std::span<const double> xs) {
  const std::size_t m = xs.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  static const boost::math::normal_distribution<double> std_normal;
  std::vector<double> z(m);
  for (std::size_t rank = 0; rank < m; ++rank) {
    const double u = (static_cast<double>(rank) + 0.5) / static_cast<double>(m);
    z[order[rank]] = boost::math::quantile(std_normal, u);
  }
  return z;
}

CopulaParams fit_copula(const TrainingDataset& data) {
  std::vector<double> a, b;
  a.reserve(data.size());
  b.reserve(data.size());
  for (const auto& r : data.records) {
    a.push_back(r.output.at(0));
    b.push_back(r.output.at(1));
  }
  CopulaParams p;
  p.first = fit_gamma_mle(a);
  p.second = fit_gamma_mle(b);
  const auto za = normal_scores(a);
  const auto zb = normal_scores(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < za.size(); ++i) {
    sab += za[i] * zb[i];
    saa += za[i] * za[i];
    sbb += zb[i] * zb[i];
  }
  p.rho = sab / std::sqrt(saa * sbb);
  p.rho = std::clamp(p.rho, -0.999, 0.999);
  return p;
}

KnnParams fit_knn(const Fitter& f, const TrainingDataset& data) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(data.size());
  for (const auto& r : data.records) {
    if (!r.input) throw DegenerateData("KNNRegressor: records lack inputs");
    pairs.emplace_back(r.input->at(0), r.output.at(0));
  }
  std::sort(pairs.begin(), pairs.end());
  KnnParams p;
  p.k = f.knn_k;
  p.x.reserve(pairs.size());
  p.y.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    p.x.push_back(x);
    p.y.push_back(y);
  }
  return p;
}

PolyParams fit_poly_ls(const Fitter& f, const TrainingDataset& data) {
  const int d = f.poly_degree;
  if (d < 0) throw DegenerateData("PolyLS: negative degree");
  const int n = static_cast<int>(data.size());
  if (n < d + 1) throw DegenerateData("PolyLS: fewer records than coefficients");
  Eigen::MatrixXd V(n, d + 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const auto& r = data.records[static_cast<std::size_t>(i)];
    if (!r.input) throw DegenerateData("PolyLS: records lack inputs");
    const double x = r.input->at(0);
    double pw = 1.0;
    for (int j = 0; j <= d; ++j) {
      V(i, j) = pw;
      pw *= x;
    }
    y(i) = r.output.at(0);
  }
  const Eigen::VectorXd beta = V.colPivHouseholderQr().solve(y);
  PolyParams p;
  p.coeffs.assign(beta.data(), beta.data() + d + 1);
  return p;
}

struct LogisticFitResult {
  LogisticParams params;
  bool diverged = false;
};

LogisticFitResult fit_logistic_newton(const TrainingDataset& data, int classes,
                                      int features, double ridge,
                                      bool want_cov) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int n = static_cast<int>(data.size());
  const int d = features;
  const int dim = (classes - 1) * (d + 1);

  MatrixXd X(n, d + 1);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& r = data.records[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) X(i, j) = r.input->at(static_cast<std::size_t>(j));
    X(i, d) = 1.0;
    y[static_cast<std::size_t>(i)] = static_cast<int>(r.output.at(0));
  }

  VectorXd w = VectorXd::Zero(dim);
  MatrixXd H(dim, dim);
  LogisticFitResult res;
  for (int iter = 0; iter < 100; ++iter) {
    // class probabilities
    MatrixXd logits = MatrixXd::Zero(n, classes);
    for (int c = 1; c < classes; ++c)
      logits.col(c) = X * w.segment((c - 1) * (d + 1), d + 1);
    MatrixXd probs(n, classes);
    for (int i = 0; i < n; ++i) {
      const double zmax = logits.row(i).maxCoeff();
      probs.row(i) = (logits.row(i).array() - zmax).exp();
      probs.row(i) /= probs.row(i).sum();
    }

    VectorXd grad = VectorXd::Zero(dim);
    H.setZero();
    for (int c = 1; c < classes; ++c) {
      VectorXd resid = VectorXd::Zero(n);
      for (int i = 0; i < n; ++i)
        resid(i) = (y[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0) - probs(i, c);
      grad.segment((c - 1) * (d + 1), d + 1) = X.transpose() * resid;
      for (int c2 = 1; c2 < classes; ++c2) {
        VectorXd wdiag(n);
        for (int i = 0; i < n; ++i)
          wdiag(i) = probs(i, c) * ((c == c2 ? 1.0 : 0.0) - probs(i, c2));
        H.block((c - 1) * (d + 1), (c2 - 1) * (d + 1), d + 1, d + 1) =
            X.transpose() * wdiag.asDiagonal() * X;
      }
    }
    grad -= ridge * w;
    H += ridge * MatrixXd::Identity(dim, dim);

    const VectorXd step = H.ldlt().solve(grad);
    w += step;
    if (w.lpNorm<Eigen::Infinity>() > 1e3) {
      res.diverged = true;
      break;
    }
    if (grad.lpNorm<Eigen::Infinity>() < 1e-8) break;
  }

  res.params.classes = classes;
  res.params.features = d;
  res.params.weights.assign(w.data(), w.data() + dim);
  if (want_cov && !res.diverged) {
    const MatrixXd cov = H.ldlt().solve(MatrixXd::Identity(dim, dim));
    res.params.cov.assign(cov.data(), cov.data() + dim * dim);
  }
  return res;
}

LogisticParams fit_logistic(const Fitter& f, const TrainingDataset& data,
                            bool want_cov) {
  if (data.records.empty()) throw EmptyDataset("LogisticMLE: empty dataset");
  auto res = fit_logistic_newton(data, f.logistic_classes, f.logistic_features,
                                 f.ridge, want_cov);
  if (res.diverged) {
    // separation in small resamples: refit with a light ridge penalty
    res = fit_logistic_newton(data, f.logistic_classes, f.logistic_features,
                              std::max(f.ridge, 1e-3), want_cov);
    if (res.diverged)
      throw DegenerateData("LogisticMLE: separation persists under ridge refit");
  }
  return res.params;
}

}  // namespace

GammaParams fit_gamma_mle(std::span<const double> xs) {
  const double m = static_cast<double>(xs.size());
  double sum = 0.0, sumlog = 0.0;
  for (double x : xs) {
    if (x <= 0.0)
      throw DegenerateData("GammaMLE: non-positive observation");
    sum += x;
    sumlog += std::log(x);
  }
  const double mean_x = sum / m;
  const double s = std::log(mean_x) - sumlog / m;  // >= 0, 0 iff all equal
  if (s <= 0.0) throw DegenerateData("GammaMLE: zero dispersion");

  // Minka closed-form initialization, then Newton on the digamma score.
  double shape = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int iter = 0; iter < 100; ++iter) {
    const double score = std::log(shape) - digamma(shape) - s;
    if (std::abs(score) < 1e-10) break;
    shape -= score / (1.0 / shape - trigamma(shape));
    if (shape <= 0.0) shape = 1e-8;
  }
  return {shape, shape / mean_x};
}

SubmodelInstance fit(const Fitter& fitter, const TrainingDataset& data) {
  if (data.records.empty()) throw EmptyDataset("fit: empty dataset");

  SubmodelInstance inst;
  inst.submodel_id = fitter.submodel_id;
  inst.instance_id = 1;
  inst.provenance = {ProvenanceTag::Estimated, 0};

  switch (fitter.family) {
    case FitterFamily::NormalMLE:
      inst.kind = SubmodelKind::UnconditionalStochastic;
      inst.params = fit_normal(scalar_outputs(data));
      break;
    case FitterFamily::GammaMLE:
      inst.kind = SubmodelKind::UnconditionalStochastic;
      inst.params = fit_gamma_mle(scalar_outputs(data));
      break;
    case FitterFamily::PiecewiseRateMLE:
      inst.kind = SubmodelKind::Deterministic;  // period -> rate lookup
      inst.params = fit_piecewise(fitter, data);
      break;
    case FitterFamily::GaussianCopula:
      inst.kind = SubmodelKind::UnconditionalStochastic;
      inst.params = fit_copula(data);
      break;
    case FitterFamily::KNNRegressor:
      inst.kind = SubmodelKind::Deterministic;
      inst.params = fit_knn(fitter, data);
      break;
    case FitterFamily::PolyLS:
      inst.kind = SubmodelKind::Deterministic;
      inst.params = fit_poly_ls(fitter, data);
      break;
    case FitterFamily::LogisticMLE:
      inst.kind = SubmodelKind::ConditionalStochastic;
      inst.params = fit_logistic(fitter, data, /*want_cov=*/false);
      break;
    case FitterFamily::LogisticLaplace:
      inst.kind = SubmodelKind::ConditionalStochastic;
      inst.params = fit_logistic(fitter, data, /*want_cov=*/true);
      break;
  }
  return inst;
}

}  // namespace subq
