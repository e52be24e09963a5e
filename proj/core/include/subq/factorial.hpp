#pragma once

#include <functional>
#include <vector>

#include "subq/fitters.hpp"
#include "subq/harness.hpp"

namespace subq {

/// One cell of the 2^L true-vs-estimated study. Bit l of `mask` set means
/// submodel l+1 is estimated from a fresh training set; clear means the true
/// submodel is used.
struct FactorialCell {
  unsigned mask = 0;
  double bias = 0.0;      // mean of per-dataset means minus the true mean
  double variance = 0.0;  // variance of the per-dataset means under common
                          // random numbers (estimation variability only)
  double mc_se = 0.0;     // Monte Carlo s.e. of the bias estimate
};

struct FactorialStudyResult {
  std::vector<FactorialCell> cells;
};

using DatasetGenerator =
    std::function<std::vector<TrainingDataset>(RandomStream&)>;

struct FactorialOptions {
  int R = 100;  // fresh training sets per mask
  int n = 500;  // replications per training set
  int threads = 1;
};

/// Benchmark-mode bias/variance study over all 2^L combinations of true and
/// estimated submodels.
FactorialStudyResult factorial_study(const SimulationModel& model,
                                     const std::vector<SubmodelInstance>& true_instances,
                                     const std::vector<Fitter>& fitters,
                                     const DatasetGenerator& data_generator,
                                     double true_mean,
                                     const FactorialOptions& options,
                                     RandomStream stream);

}  // namespace subq
