#include <doctest.h>

#include <cmath>

#include "subq/harness.hpp"
#include "subq/synthetic.hpp"

using namespace subq;

TEST_CASE("analytic mean matches the closed-form value") {
  const SyntheticTruth truth;
  CHECK(truth.analytic_mean() == doctest::Approx(49.13).epsilon(0.01 / 49.13));
}

TEST_CASE("analytic mean agrees with Monte Carlo") {
  const SyntheticTruth truth;
  SyntheticModel model;
  const int n = 200000;
  const auto table =
      run_true_baseline(model, truth.true_instances(), n, RandomStream(1),
                        nullptr, {.threads = 4});
  const double se =
      std::sqrt(sample_variance(table.outputs[0]) / static_cast<double>(n));
  CHECK(std::abs(table.grand_mean - truth.analytic_mean()) < 3.0 * se);
}

TEST_CASE("training data pairs are generated from the true mechanisms") {
  RandomStream s(2);
  const SyntheticTruth truth;
  const auto data = generate_training(50, s, truth);
  REQUIRE(data.per_submodel.size() == 4);
  REQUIRE(data.y.size() == 50);
  for (int l = 0; l < 4; ++l)
    CHECK(data.per_submodel[static_cast<std::size_t>(l)].size() == 50);

  const auto insts = truth.true_instances();
  RandomStream dummy(0);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& px = data.per_submodel[2].records[i];
    const auto& qx = data.per_submodel[3].records[i];
    REQUIRE(px.input.has_value());
    // responses are noiseless evaluations of p and q at the sampled inputs
    CHECK(px.output[0] ==
          doctest::Approx(invoke(insts[2], &*px.input, dummy)[0]).epsilon(1e-12));
    CHECK(data.y[i] == doctest::Approx(px.output[0] + qx.output[0]).epsilon(1e-12));
    // inputs recorded jointly with the unconditional input submodels
    CHECK((*px.input)[0] == data.per_submodel[0].records[i].output[0]);
    CHECK((*qx.input)[0] == data.per_submodel[1].records[i].output[0]);
  }
}

TEST_CASE("a single-record training set bootstraps to itself downstream") {
  RandomStream s(3);
  const auto data = generate_training(1, s);
  CHECK(data.per_submodel[0].size() == 1);
}

TEST_CASE("sample mean of y approaches the analytic value") {
  RandomStream s(4);
  const auto data = generate_training(200000, s);
  const SyntheticTruth truth;
  const double m = mean(data.y);
  const double se = std::sqrt(sample_variance(data.y) / 200000.0);
  CHECK(std::abs(m - truth.analytic_mean()) < 4.0 * se);
}

TEST_CASE("small coverage experiment returns one interval per macro-rep") {
  SyntheticOptions opt;
  opt.macro = 6;
  opt.m = 30;
  opt.B = 20;
  opt.n = 10;
  opt.threads = 2;
  const auto res = coverage_experiment(Scenario::FullSU, opt, RandomStream(5));
  REQUIRE(res.intervals.size() == 6);
  CHECK(res.coverage >= 0.0);
  CHECK(res.coverage <= 1.0);
  for (const auto& ci : res.intervals) CHECK(ci.width() >= 0.0);
}

TEST_CASE("coverage experiments are deterministic across thread counts") {
  SyntheticOptions opt;
  opt.macro = 4;
  opt.m = 25;
  opt.B = 10;
  opt.n = 8;
  opt.threads = 1;
  const auto a = coverage_experiment(Scenario::InputOnly, opt, RandomStream(6));
  opt.threads = 4;
  const auto b = coverage_experiment(Scenario::InputOnly, opt, RandomStream(6));
  REQUIRE(a.intervals.size() == b.intervals.size());
  for (std::size_t i = 0; i < a.intervals.size(); ++i) {
    CHECK(a.intervals[i].lower == b.intervals[i].lower);
    CHECK(a.intervals[i].upper == b.intervals[i].upper);
  }
}

TEST_CASE("tiny factorial study brackets the all-true mask at zero bias") {
  FactorialOptions opt;
  opt.R = 8;
  opt.n = 200;
  opt.threads = 4;
  const auto study = synthetic_factorial(opt, 30, RandomStream(7));
  REQUIRE(study.cells.size() == 16);
  const auto& all_true = study.cells[0];
  CHECK(all_true.mask == 0);
  CHECK(std::abs(all_true.bias) < 4.0 * all_true.mc_se + 1e-9);
  // the variance column uses common random numbers, so the all-true cell is
  // constant up to float rounding and every other cell sits above it
  CHECK(all_true.variance < 1e-18);
  for (const auto& cell : study.cells)
    CHECK(cell.variance >= all_true.variance);
}
