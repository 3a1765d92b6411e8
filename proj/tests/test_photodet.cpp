#include <doctest.h>

#include <cmath>

#include "twophoto/photodet.hpp"

using namespace twophoto;

namespace {

DensityOperator thermal_like(int cutoff, double q) {
  Eigen::VectorXd pops(cutoff);
  double norm = 0.0;
  for (int n = 0; n < cutoff; ++n) {
    pops(n) = std::pow(q, n);
    norm += pops(n);
  }
  return DensityOperator::diagonal(pops / norm);
}

}  // namespace

TEST_CASE("efficiency range") {
  CHECK_THROWS_AS(Efficiency(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Efficiency(1.2), std::invalid_argument);
  CHECK(Efficiency(1.0).value() == 1.0);
}

TEST_CASE("ideal counts") {
  SUBCASE("vacuum counts nothing") {
    const auto p = ideal_counts(DensityOperator::from_pure(vacuum_state({4})));
    CHECK(p.probs(0) == doctest::Approx(1.0));
    CHECK(p.probs.tail(3).maxCoeff() == 0.0);
  }
  SUBCASE("number state counts itself") {
    const auto p = ideal_counts(DensityOperator::from_pure(fock_state(2, 5)));
    CHECK(p.probs(2) == doctest::Approx(1.0));
  }
  SUBCASE("coherent beam is Poissonian") {
    const auto p = ideal_counts(DensityOperator::from_pure(coherent_vector(1.0, 20)));
    CHECK(p.probs(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    double fact = 1.0;
    for (int m = 1; m < 8; ++m) {
      fact *= m;
      CHECK(p.probs(m) == doctest::Approx(std::exp(-1.0) / fact).epsilon(1e-8));
    }
    CHECK(p.total() + p.deficit == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("multimode input is reduced first") {
    const auto joint = tensor(std::vector<DensityOperator>{
        DensityOperator::from_pure(fock_state(1, 3)),
        DensityOperator::from_pure(vacuum_state({3}))});
    CHECK(ideal_counts(joint, 0).probs(1) == doctest::Approx(1.0));
    CHECK(ideal_counts(joint, 1).probs(0) == doctest::Approx(1.0));
  }
}

TEST_CASE("binomial loss model") {
  SUBCASE("unit efficiency is the identity") {
    const auto p = ideal_counts(DensityOperator::from_pure(coherent_vector(0.7, 12)));
    const auto q = lossy_counts_binomial(p, Efficiency(1.0));
    CHECK((q.probs - p.probs).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single photon splits as a coin toss") {
    const auto q = lossy_counts_binomial(
        ideal_counts(DensityOperator::from_pure(fock_state(1, 2))), Efficiency(0.6));
    CHECK(q.probs(0) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(q.probs(1) == doctest::Approx(0.6).epsilon(1e-14));
  }
  SUBCASE("photon pair at half transmission") {
    const auto q = lossy_counts_binomial(
        ideal_counts(DensityOperator::from_pure(fock_state(2, 3))), Efficiency(0.5));
    CHECK(q.probs(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(q.probs(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(q.probs(2) == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("losses compose as a semigroup") {
    const auto p = ideal_counts(thermal_like(20, 0.55));
    const auto two_step =
        lossy_counts_binomial(lossy_counts_binomial(p, Efficiency(0.8)), Efficiency(0.6));
    const auto one_step = lossy_counts_binomial(p, Efficiency(0.48));
    CHECK((two_step.probs - one_step.probs).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("mean scales linearly") {
    const auto p = ideal_counts(DensityOperator::from_pure(coherent_vector(1.4, 24)));
    for (double eta : {0.25, 0.5, 0.9}) {
      const auto q = lossy_counts_binomial(p, Efficiency(eta));
      CHECK(q.mean() == doctest::Approx(eta * p.mean()).epsilon(1e-10));
    }
  }
}

TEST_CASE("beam-splitter loss model") {
  SUBCASE("full transmission matches ideal counting") {
    const DensityOperator rho = DensityOperator::from_pure(coherent_vector(0.9, 12));
    const auto direct = ideal_counts(rho);
    const auto split = lossy_counts_beamsplitter(rho, 1.0);
    CHECK((direct.probs - split.probs).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("single photon splits as a coin toss") {
    const auto q = lossy_counts_beamsplitter(DensityOperator::from_pure(fock_state(1, 2)), 0.6);
    CHECK(q.probs(0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(q.probs(1) == doctest::Approx(0.6).epsilon(1e-12));
  }
  SUBCASE("attenuated coherent beam stays Poissonian") {
    const auto q = lossy_counts_beamsplitter(DensityOperator::from_pure(coherent_vector(2.0, 30)), 0.5);
    double fact = 1.0;
    for (int m = 0; m < 10; ++m) {
      if (m > 0) fact *= m;
      CHECK(q.probs(m) == doctest::Approx(std::exp(-2.0) * std::pow(2.0, m) / fact).epsilon(1e-6));
    }
  }
}

TEST_CASE("the two loss models coincide") {
  std::vector<DensityOperator> states;
  states.push_back(DensityOperator::from_pure(vacuum_state({12})));
  states.push_back(DensityOperator::from_pure(fock_state(1, 12)));
  states.push_back(DensityOperator::from_pure(fock_state(2, 12)));
  states.push_back(DensityOperator::from_pure(coherent_vector(0.5, 12)));
  states.push_back(DensityOperator::from_pure(coherent_vector(1.0, 12)));
  states.push_back(thermal_like(12, 0.5));
  for (const auto& rho : states) {
    for (double eta : {0.3, 0.6, 0.9}) {
      CHECK(loss_equivalence_check(rho, Efficiency(eta)).max_abs_difference <= 1e-10);
    }
    CHECK(loss_equivalence_check(rho, Efficiency(1.0)).max_abs_difference <= 1e-13);
  }
}

TEST_CASE("count sampling") {
  SUBCASE("deterministic point mass") {
    CountDistribution p{Eigen::VectorXd::Zero(3), 0.0};
    p.probs(0) = 1.0;
    RngStream rng(3);
    for (auto k : sample_counts(p, rng, 100)) CHECK(k == 0);
  }
  SUBCASE("fair coin empirical mean") {
    CountDistribution p{Eigen::VectorXd::Zero(2), 0.0};
    p.probs << 0.5, 0.5;
    RngStream rng(4);
    const auto draws = sample_counts(p, rng, 100000);
    double mean = 0.0;
    for (auto k : draws) mean += static_cast<double>(k);
    mean /= static_cast<double>(draws.size());
    CHECK(std::fabs(mean - 0.5) < 0.005);
  }
  SUBCASE("same seed reproduces the sequence") {
    CountDistribution p{Eigen::VectorXd::Zero(4), 0.0};
    p.probs << 0.1, 0.2, 0.3, 0.4;
    RngStream r1(99), r2(99);
    CHECK(sample_counts(p, r1, 500) == sample_counts(p, r2, 500));
  }
  SUBCASE("a visible deficit is refused") {
    CountDistribution p{Eigen::VectorXd::Zero(2), 1e-3};
    p.probs << 0.5, 0.4990;
    RngStream rng(5);
    CHECK_THROWS_AS(sample_counts(p, rng, 10), std::invalid_argument);
  }
}

TEST_CASE("poisson count sampling") {
  RngStream rng(6);
  for (auto k : sample_poisson(0.0, rng, 50)) CHECK(k == 0);
  const auto draws = sample_poisson(4.0, rng, 100000);
  double mean = 0.0;
  for (auto k : draws) mean += static_cast<double>(k);
  mean /= static_cast<double>(draws.size());
  CHECK(std::fabs(mean - 4.0) < 3.0 * 2.0 / std::sqrt(1e5));
}
