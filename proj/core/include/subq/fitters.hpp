#pragma once

#include "subq/submodel.hpp"

namespace subq {

enum class FitterFamily {
  NormalMLE,
  GammaMLE,
  PiecewiseRateMLE,
  GaussianCopula,
  KNNRegressor,
  PolyLS,
  LogisticMLE,
  LogisticLaplace,
};

/// Family-specific estimator configuration for one submodel slot.
struct Fitter {
  int submodel_id = 0;
  FitterFamily family = FitterFamily::NormalMLE;

  // KNNRegressor
  int knn_k = 5;

  // PolyLS: least-squares polynomial response surface of this degree
  int poly_degree = 3;

  // PiecewiseRateMLE: records hold event timestamps (in period units);
  // rate_k = count in period k / exposure.
  int periods = 9;
  double exposure_per_period = 1.0;

  // LogisticMLE / LogisticLaplace
  int logistic_classes = 2;
  int logistic_features = 0;
  double ridge = 0.0;  // applied up front; separation fallback uses 1e-3
};

/// Fit an Estimated instance from data. Throws DegenerateData when a required
/// scale is zero or a logistic fit separates even under the ridge fallback.
SubmodelInstance fit(const Fitter& fitter, const TrainingDataset& data);

// Exposed for posterior sampling and tests.
GammaParams fit_gamma_mle(std::span<const double> xs);
double digamma(double x);
double trigamma(double x);

}  // namespace subq
