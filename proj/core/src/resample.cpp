#include "subq/resample.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace subq {

namespace {

std::vector<std::size_t> resample_indices(std::size_t m, RandomStream& stream) {
  std::vector<std::size_t> idx(m);
  for (auto& i : idx)
    i = static_cast<std::size_t>(stream.next_uniform() * static_cast<double>(m));
  return idx;
}

TrainingDataset take(const TrainingDataset& data,
                     const std::vector<std::size_t>& idx) {
  TrainingDataset out;
  out.submodel_id = data.submodel_id;
  out.records.reserve(idx.size());
  for (std::size_t i : idx) out.records.push_back(data.records[i]);
  return out;
}

struct ScalarStats {
  std::size_t m = 0;
  double mean = 0.0;
  double ss = 0.0;  // sum of squared deviations
};

ScalarStats scalar_stats(const TrainingDataset& data) {
  ScalarStats st;
  st.m = data.size();
  for (const auto& r : data.records) st.mean += r.output.at(0);
  st.mean /= static_cast<double>(st.m);
  for (const auto& r : data.records) {
    const double d = r.output.at(0) - st.mean;
    st.ss += d * d;
  }
  return st;
}

NormalParams draw_normal_conjugate(const ScalarStats& st, RandomStream& s) {
  // reference prior p(mu, sigma^2) ~ 1/sigma^2:
  // sigma^2 | data = SS / chisq_{m-1}, mu | sigma^2 = N(xbar, sigma^2/m)
  const double df = static_cast<double>(st.m - 1);
  const double chisq = s.next_gamma(df / 2.0, 0.5);
  const double var = st.ss / chisq;
  const double mu = s.next_normal(st.mean, std::sqrt(var / static_cast<double>(st.m)));
  return {mu, std::sqrt(var)};
}

NormalParams draw_normal_approx(const NormalParams& mle, std::size_t m,
                                RandomStream& s) {
  const double dm = static_cast<double>(m);
  const double mu = s.next_normal(mle.mean, mle.sd / std::sqrt(dm));
  double sd = s.next_normal(mle.sd, mle.sd / std::sqrt(2.0 * dm));
  sd = std::max(sd, 1e-12);
  return {mu, sd};
}

GammaParams draw_gamma_approx(const GammaParams& mle, std::size_t m,
                              RandomStream& s) {
  // observed information per observation: [[psi'(a), -1/b], [-1/b, a/b^2]]
  Eigen::Matrix2d info;
  info << trigamma(mle.shape), -1.0 / mle.rate, -1.0 / mle.rate,
      mle.shape / (mle.rate * mle.rate);
  info *= static_cast<double>(m);
  const Eigen::Matrix2d cov = info.inverse();
  const Eigen::LLT<Eigen::Matrix2d> llt(cov);
  Eigen::Vector2d z(s.next_normal(), s.next_normal());
  Eigen::Vector2d draw =
      Eigen::Vector2d(mle.shape, mle.rate) + llt.matrixL() * z;
  return {std::max(draw(0), 1e-8), std::max(draw(1), 1e-8)};
}

CopulaParams draw_copula_approx(const CopulaParams& mle, std::size_t m,
                                RandomStream& s) {
  CopulaParams out;
  out.first = draw_gamma_approx(mle.first, m, s);
  out.second = draw_gamma_approx(mle.second, m, s);
  // Fisher z for the normal-scores correlation
  const double z = s.next_normal(std::atanh(mle.rho),
                                 1.0 / std::sqrt(static_cast<double>(m) - 3.0));
  out.rho = std::clamp(std::tanh(z), -0.999, 0.999);
  return out;
}

PiecewiseRateParams draw_rates_conjugate(const PiecewiseRateParams& mle,
                                         double exposure, RandomStream& s) {
  // Jeffreys prior for the Poisson rate: Gamma(count + 1/2, exposure)
  PiecewiseRateParams out;
  out.rates.reserve(mle.rates.size());
  for (double r : mle.rates) {
    const double count = r * exposure;
    out.rates.push_back(s.next_gamma(count + 0.5, exposure));
  }
  return out;
}

PiecewiseRateParams draw_rates_approx(const PiecewiseRateParams& mle,
                                      double exposure, RandomStream& s) {
  PiecewiseRateParams out;
  out.rates.reserve(mle.rates.size());
  for (double r : mle.rates)
    out.rates.push_back(std::max(0.0, s.next_normal(r, std::sqrt(r / exposure))));
  return out;
}

LogisticParams draw_logistic_laplace(const LogisticParams& mode,
                                     RandomStream& s) {
  if (mode.cov.empty())
    throw IncompatibleMode("posterior draw requires a LogisticLaplace fit");
  const int dim = mode.weight_count();
  Eigen::Map<const Eigen::MatrixXd> cov(mode.cov.data(), dim, dim);
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) z(i) = s.next_normal();
  Eigen::Map<const Eigen::VectorXd> w0(mode.weights.data(), dim);
  const Eigen::VectorXd w = w0 + llt.matrixL() * z;
  LogisticParams out = mode;
  out.weights.assign(w.data(), w.data() + dim);
  out.cov.clear();
  return out;
}

SubmodelInstance posterior_draw(ResampleMode mode, const Fitter& fitter,
                                const SubmodelInstance& mle,
                                const TrainingDataset& data, RandomStream& s) {
  SubmodelInstance inst = mle;
  const bool conjugate = mode == ResampleMode::PosteriorExactConjugate;
  switch (fitter.family) {
    case FitterFamily::NormalMLE: {
      const auto st = scalar_stats(data);
      inst.params = conjugate
                        ? draw_normal_conjugate(st, s)
                        : draw_normal_approx(std::get<NormalParams>(mle.params),
                                             st.m, s);
      break;
    }
    case FitterFamily::GammaMLE:
      if (conjugate)
        throw IncompatibleMode("GammaMLE has no exact conjugate posterior");
      inst.params =
          draw_gamma_approx(std::get<GammaParams>(mle.params), data.size(), s);
      break;
    case FitterFamily::PiecewiseRateMLE: {
      const auto& p = std::get<PiecewiseRateParams>(mle.params);
      inst.params = conjugate
                        ? draw_rates_conjugate(p, fitter.exposure_per_period, s)
                        : draw_rates_approx(p, fitter.exposure_per_period, s);
      break;
    }
    case FitterFamily::GaussianCopula:
      if (conjugate)
        throw IncompatibleMode("GaussianCopula has no exact conjugate posterior");
      inst.params = draw_copula_approx(std::get<CopulaParams>(mle.params),
                                       data.size(), s);
      break;
    case FitterFamily::LogisticLaplace:
      inst.params =
          draw_logistic_laplace(std::get<LogisticParams>(mle.params), s);
      break;
    case FitterFamily::KNNRegressor:
    case FitterFamily::PolyLS:
    case FitterFamily::LogisticMLE:
      throw IncompatibleMode("fitter family lacks the requested posterior form");
  }
  return inst;
}

}  // namespace

TrainingDataset bootstrap_dataset(const TrainingDataset& data,
                                  RandomStream& stream) {
  if (data.records.empty()) throw EmptyDataset("bootstrap_dataset: empty dataset");
  return take(data, resample_indices(data.size(), stream));
}

std::vector<std::vector<SubmodelInstance>> sample_instances(
    const ResamplePlan& plan, const std::vector<Fitter>& fitters,
    const std::vector<TrainingDataset>& data, RandomStream stream) {
  const int L = static_cast<int>(fitters.size());
  if (plan.B < 2) throw SubqError("sample_instances: B must be >= 2");
  if (data.size() != fitters.size())
    throw SubqError("sample_instances: one dataset per submodel required");

  // default joint groups: every submodel in its own group
  std::vector<std::vector<int>> groups = plan.joint_groups;
  if (groups.empty())
    for (int l = 1; l <= L; ++l) groups.push_back({l});
  std::vector<bool> covered(static_cast<std::size_t>(L), false);
  for (const auto& g : groups)
    for (int id : g) {
      if (id < 1 || id > L || covered[static_cast<std::size_t>(id - 1)])
        throw SubqError("sample_instances: joint_groups must partition 1..L");
      covered[static_cast<std::size_t>(id - 1)] = true;
    }
  if (std::find(covered.begin(), covered.end(), false) != covered.end())
    throw SubqError("sample_instances: joint_groups must partition 1..L");

  auto slot = [&](int submodel_id) -> std::size_t {
    for (std::size_t i = 0; i < fitters.size(); ++i)
      if (fitters[i].submodel_id == submodel_id) return i;
    throw SubqError("sample_instances: no fitter for submodel id");
  };

  auto mode_for = [&](int submodel_id) {
    auto it = plan.mode_overrides.find(submodel_id);
    return it == plan.mode_overrides.end() ? plan.mode : it->second;
  };

  std::vector<std::vector<SubmodelInstance>> out(
      static_cast<std::size_t>(L),
      std::vector<SubmodelInstance>(static_cast<std::size_t>(plan.B)));

  // reject incompatible posterior requests before touching the data
  for (std::size_t i = 0; i < fitters.size(); ++i) {
    const ResampleMode mode = mode_for(fitters[i].submodel_id);
    if (mode != ResampleMode::PosteriorNormalApprox &&
        mode != ResampleMode::PosteriorExactConjugate)
      continue;
    const bool conjugate = mode == ResampleMode::PosteriorExactConjugate;
    switch (fitters[i].family) {
      case FitterFamily::GammaMLE:
        if (conjugate)
          throw IncompatibleMode("GammaMLE has no exact conjugate posterior");
        break;
      case FitterFamily::GaussianCopula:
        if (conjugate)
          throw IncompatibleMode(
              "GaussianCopula has no exact conjugate posterior");
        break;
      case FitterFamily::KNNRegressor:
      case FitterFamily::PolyLS:
      case FitterFamily::LogisticMLE:
        throw IncompatibleMode("fitter family lacks the requested posterior form");
      default:
        break;
    }
  }

  // MLE fits, reused by the posterior and point-estimate paths
  std::vector<SubmodelInstance> mles(static_cast<std::size_t>(L));
  for (std::size_t i = 0; i < fitters.size(); ++i)
    mles[i] = fit(fitters[i], data[i]);

  for (int b = 0; b < plan.B; ++b) {
    RandomStream bstream = stream.derive(static_cast<std::uint64_t>(b));
    for (std::size_t g = 0; g < groups.size(); ++g) {
      RandomStream gstream = bstream.derive(g);
      // one resample per joint group per b; reused for every member
      std::vector<std::size_t> idx;
      for (int id : groups[g]) {
        const std::size_t i = slot(id);
        const ResampleMode mode = mode_for(id);
        SubmodelInstance inst;
        switch (mode) {
          case ResampleMode::BootstrapIID:
          case ResampleMode::BootstrapPaired: {
            if (idx.empty()) {
              if (data[i].records.empty())
                throw EmptyDataset("sample_instances: empty dataset");
              idx = resample_indices(data[i].size(), gstream);
            }
            if (idx.size() != data[i].size())
              throw SubqError(
                  "sample_instances: joint group members need equal-size data");
            inst = fit(fitters[i], take(data[i], idx));
            inst.provenance = {ProvenanceTag::Bootstrap, plan.seed};
            break;
          }
          case ResampleMode::PosteriorNormalApprox:
          case ResampleMode::PosteriorExactConjugate: {
            RandomStream dstream = gstream.derive(static_cast<std::uint64_t>(id));
            inst = posterior_draw(mode, fitters[i], mles[i], data[i], dstream);
            inst.provenance = {ProvenanceTag::Posterior, plan.seed};
            break;
          }
          case ResampleMode::PointEstimate:
            inst = mles[i];
            break;
        }
        inst.submodel_id = id;
        inst.instance_id = b + 1;
        out[i][static_cast<std::size_t>(b)] = std::move(inst);
      }
    }
  }
  return out;
}

}  // namespace subq
