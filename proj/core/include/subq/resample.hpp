#pragma once

#include <map>
#include <vector>

#include "subq/fitters.hpp"
#include "subq/submodel.hpp"

namespace subq {

enum class ResampleMode {
  BootstrapIID,
  BootstrapPaired,
  PosteriorNormalApprox,
  PosteriorExactConjugate,
  PointEstimate,  // degenerate B-copies of the MLE fit
};

/// How to generate the B plausible instances of each submodel. `joint_groups`
/// must partition {1..L}; submodels in a group are bootstrapped from a shared
/// set of resample indices so cross-submodel dependence is preserved.
struct ResamplePlan {
  ResampleMode mode = ResampleMode::BootstrapPaired;
  int B = 2;
  std::vector<std::vector<int>> joint_groups;
  std::uint64_t seed = 0;
  // per-submodel deviations from `mode` (e.g. a copula submodel that lacks a
  // conjugate posterior falls back to the normal approximation)
  std::map<int, ResampleMode> mode_overrides;
};

/// Resample a dataset with replacement to the same size; records are atomic,
/// so (input, output) pairs stay together.
TrainingDataset bootstrap_dataset(const TrainingDataset& data,
                                  RandomStream& stream);

/// Generate the L x B instance matrix, result[l-1][b-1] holding instance b of
/// submodel l. Bootstrap modes refit on resampled data (one resample per
/// joint group per b); posterior modes draw parameters around the single fit.
std::vector<std::vector<SubmodelInstance>> sample_instances(
    const ResamplePlan& plan, const std::vector<Fitter>& fitters,
    const std::vector<TrainingDataset>& data, RandomStream stream);

}  // namespace subq
