#include <doctest.h>

#include <cmath>

#include "twophoto/phasespace.hpp"
#include "twophoto/rng.hpp"

using namespace twophoto;
using detail_phasespace::characteristic_to_density;
using detail_phasespace::chi_at;
using detail_phasespace::conjugate_step;

namespace {

DensityOperator vacuum_rho(int c = 12) { return DensityOperator::from_pure(vacuum_state({c})); }

DensityOperator random_mixed(int c, unsigned seed) {
  RngStream rng(seed);
  Mat g(c, c);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  }
  Mat rho = g * g.adjoint();
  rho /= rho.trace();
  return {{c}, rho};
}

}  // namespace

TEST_CASE("characteristic function closed forms") {
  const GridGeometry g{3.0, 16};
  SUBCASE("vacuum is a symmetric gaussian") {
    const PhaseSpaceGrid chi = characteristic_function(vacuum_rho(), g);
    for (int i = 0; i < g.points; i += 3) {
      for (int j = 0; j < g.points; j += 3) {
        const double r2 = g.axis(i) * g.axis(i) + g.axis(j) * g.axis(j);
        CHECK(std::abs(chi.values(i, j) - std::exp(-0.5 * r2)) < 1e-10);
      }
    }
    CHECK(chi.values(g.points / 2, g.points / 2).real() == doctest::Approx(1.0));
  }
  SUBCASE("origin value is the trace for any state") {
    CHECK(std::abs(chi_at(random_mixed(8, 21), 0.0) - Complex(1.0)) < 1e-12);
  }
  SUBCASE("displacement covariance: coherent states share the vacuum envelope") {
    const DensityOperator rho = DensityOperator::from_pure(coherent_vector(Complex(0.9, -0.4), 24));
    for (Complex gamma : {Complex(0.3, 0.2), Complex(-1.0, 0.8), Complex(0.0, 1.5)}) {
      CHECK(std::abs(chi_at(rho, gamma)) ==
            doctest::Approx(std::exp(-0.5 * std::norm(gamma))).epsilon(1e-8));
    }
  }
}

TEST_CASE("laguerre path matches the dense displacement trace") {
  // The exponential route needs headroom above the occupied levels, so pad
  // the state before tracing against the dense displacement.
  const DensityOperator small = random_mixed(6, 5);
  const DensityOperator padded = [&] {
    Mat m = Mat::Zero(24, 24);
    m.topLeftCorner(6, 6) = small.matrix;
    return DensityOperator{{24}, m};
  }();
  for (Complex gamma :
       {Complex(0.5, 0.3), Complex(-0.2, -0.9), Complex(1.1, -0.6), Complex(0.4, 0.0)}) {
    const Complex direct = (padded.matrix * displacement(gamma, 24).matrix).trace();
    CHECK(std::abs(chi_at(small, gamma) - direct) < 1e-10);
    CHECK(std::abs(chi_at(padded, gamma) - direct) < 1e-10);
  }
}

TEST_CASE("transform agrees with the direct double sum") {
  const GridGeometry g{4.0, 16};
  const int n = g.points;
  const double dg = conjugate_step(g);
  RngStream rng(8);
  Eigen::MatrixXcd chi(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const double r2 = std::pow((j - n / 2) * dg, 2) + std::pow((k - n / 2) * dg, 2);
      chi(j, k) = Complex(rng.normal(), rng.normal()) * std::exp(-0.25 * r2);
    }
  }
  const Eigen::MatrixXcd fast = characteristic_to_density(chi, g);
  for (int p = 0; p < n; p += 5) {
    for (int q = 0; q < n; q += 3) {
      Complex direct = 0.0;
      const Complex alpha(g.axis(p), g.axis(q));
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const Complex gamma((j - n / 2) * dg, (k - n / 2) * dg);
          direct += chi(j, k) * std::exp(std::conj(gamma) * alpha - gamma * std::conj(alpha));
        }
      }
      direct *= dg * dg / (M_PI * M_PI);
      CHECK(std::abs(fast(p, q) - direct) < 1e-10);
    }
  }
}

TEST_CASE("wigner function") {
  const GridGeometry g{6.0, 256};
  SUBCASE("vacuum peak and normalization") {
    const PhaseSpaceGrid w = wigner_function(vacuum_rho(), g);
    CHECK(w.value_at_origin() == doctest::Approx(2.0 / M_PI).epsilon(1e-8));
    CHECK(w.integral() == doctest::Approx(1.0).epsilon(0.005));
    CHECK(w.max_imag_residue() < 1e-9);
  }
  SUBCASE("one-photon state is negative at the origin") {
    const PhaseSpaceGrid w = wigner_function(DensityOperator::from_pure(fock_state(1, 12)), g);
    CHECK(w.value_at_origin() < 0.0);
    // Parity oracle: W(0) = (2/pi) sum_n (-1)^n rho_nn.
    CHECK(w.value_at_origin() == doctest::Approx(-2.0 / M_PI).epsilon(1e-7));
    CHECK(w.integral() == doctest::Approx(1.0).epsilon(0.005));
  }
  SUBCASE("coherent state is a displaced vacuum") {
    const Complex a0(1.5, -0.5);
    const PhaseSpaceGrid w =
        wigner_function(DensityOperator::from_pure(coherent_vector(a0, 24)), g);
    const Eigen::Vector2d c = w.centroid();
    CHECK(c(0) == doctest::Approx(a0.real()).epsilon(1e-6));
    CHECK(c(1) == doctest::Approx(a0.imag()).epsilon(1e-6));
    const Eigen::Vector2d v = w.marginal_variance();
    CHECK(v(0) == doctest::Approx(0.25).epsilon(0.01));
    CHECK(v(1) == doctest::Approx(0.25).epsilon(0.01));
  }
}

TEST_CASE("propensity of vacuum signal and probe") {
  const GridGeometry g{6.0, 256};
  const PhaseSpaceGrid k1 = propensity(vacuum_rho(), vacuum_rho(), g, Efficiency(1.0));
  CHECK(k1.value_at_origin() == doctest::Approx(1.0 / M_PI).epsilon(0.01));
  CHECK(k1.integral() == doctest::Approx(1.0).epsilon(0.005));
  CHECK(k1.min_real_value() > -1e-6);
  const Eigen::Vector2d v = k1.marginal_variance();
  CHECK(v(0) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(v(1) == doctest::Approx(0.5).epsilon(0.01));

  SUBCASE("rotation invariance on the unit circle") {
    const double k0 = k1.value_at_origin();
    const double h = g.step();
    auto bilinear = [&](double x, double y) {
      const double fx = x / h + g.points / 2;
      const double fy = y / h + g.points / 2;
      const int i = static_cast<int>(std::floor(fx));
      const int j = static_cast<int>(std::floor(fy));
      const double tx = fx - i, ty = fy - j;
      return (1 - tx) * (1 - ty) * k1.values(i, j).real() +
             tx * (1 - ty) * k1.values(i + 1, j).real() +
             (1 - tx) * ty * k1.values(i, j + 1).real() +
             tx * ty * k1.values(i + 1, j + 1).real();
    };
    double lo = 1e300, hi = -1e300;
    for (int t = 0; t < 64; ++t) {
      const double phi = 2.0 * M_PI * t / 64;
      const double val = bilinear(std::cos(phi), std::sin(phi));
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
    CHECK((hi - lo) / k0 < 0.01);
  }

  SUBCASE("efficiency widens the gaussian to 1/(2 eta)") {
    const PhaseSpaceGrid k5 = propensity(vacuum_rho(), vacuum_rho(), g, Efficiency(0.5));
    const Eigen::Vector2d v5 = k5.marginal_variance();
    CHECK(v5(0) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(v5(1) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(k5.integral() == doctest::Approx(1.0).epsilon(0.005));
  }
}

TEST_CASE("propensity centering follows a + b^dag") {
  const GridGeometry g{8.0, 256};
  const Complex alpha(1.0, 0.5);
  const Complex beta(0.6, -0.9);
  const DensityOperator sig = DensityOperator::from_pure(coherent_vector(alpha, 24));
  const DensityOperator prb = DensityOperator::from_pure(coherent_vector(beta, 24));
  const PhaseSpaceGrid k = propensity(sig, prb, g, Efficiency(1.0));
  const Eigen::Vector2d c = k.centroid();
  // The probe enters conjugated: the peak sits at alpha + conj(beta).
  CHECK(c(0) == doctest::Approx((alpha + std::conj(beta)).real()).epsilon(1e-5));
  CHECK(c(1) == doctest::Approx((alpha + std::conj(beta)).imag()).epsilon(1e-5));
  const Eigen::Vector2d v = k.marginal_variance();
  CHECK(v(0) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(v(1) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("characteristic-domain shortcut equals the direct convolutions") {
  const GridGeometry g{6.0, 64};
  const Complex alpha(0.7, 0.3);
  const DensityOperator sig = DensityOperator::from_pure(coherent_vector(alpha, 16));
  const DensityOperator prb = DensityOperator::from_pure(fock_state(1, 12));

  SUBCASE("signal Wigner convolved with the reflected probe Wigner") {
    const PhaseSpaceGrid k = propensity(sig, prb, g, Efficiency(1.0));
    const PhaseSpaceGrid wa = wigner_function(sig, g);
    const PhaseSpaceGrid wb = wigner_function(prb, g);
    const int n = g.points;
    const double h = g.step();
    double worst = 0.0;
    for (int p = 8; p < n - 8; p += 5) {
      for (int q = 8; q < n - 8; q += 5) {
        double direct = 0.0;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            // Probe Wigner sampled at conj(z - beta); index form.
            const int bi = p - i + n / 2;
            const int bj = n / 2 - (q - j);
            if (bi < 0 || bi >= n || bj < 0 || bj >= n) continue;
            direct += wa.values(i, j).real() * wb.values(bi, bj).real();
          }
        }
        direct *= h * h;
        worst = std::max(worst, std::fabs(direct - k.values(p, q).real()));
      }
    }
    CHECK(worst < 1e-3);
  }

  SUBCASE("efficiency acts as one extra gaussian convolution") {
    const double eta = 0.6;
    const PhaseSpaceGrid k_eta = propensity(sig, prb, g, Efficiency(eta));
    const PhaseSpaceGrid k_one = propensity(sig, prb, g, Efficiency(1.0));
    const int n = g.points;
    const double h = g.step();
    const double coef = eta / (1.0 - eta);
    double worst = 0.0;
    for (int p = 10; p < n - 10; p += 7) {
      for (int q = 10; q < n - 10; q += 7) {
        double direct = 0.0;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const double dx = g.axis(p) - g.axis(i);
            const double dy = g.axis(q) - g.axis(j);
            direct += k_one.values(i, j).real() * std::exp(-coef * (dx * dx + dy * dy));
          }
        }
        direct *= h * h * coef / M_PI;
        worst = std::max(worst, std::fabs(direct - k_eta.values(p, q).real()));
      }
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("empirical densities") {
  const GridGeometry g{6.0, 64};
  SUBCASE("point mass lands in one bin") {
    std::vector<std::pair<double, double>> pts(100, {0.0, 0.0});
    const PhaseSpaceGrid e = empirical_density(pts, g);
    CHECK(e.values(g.points / 2, g.points / 2).real() ==
          doctest::Approx(1.0 / (g.step() * g.step())));
    CHECK(e.outside_samples == 0);
    CHECK(e.integral() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("out-of-extent samples are reported") {
    std::vector<std::pair<double, double>> pts = {{0.0, 0.0}, {100.0, 0.0}, {0.0, -50.0}};
    const PhaseSpaceGrid e = empirical_density(pts, g);
    CHECK(e.outside_samples == 2);
    CHECK(e.total_samples == 3);
  }
  SUBCASE("standard normal pairs center at the origin") {
    RngStream rng(23);
    const std::size_t n = 100000;
    std::vector<std::pair<double, double>> pts(n);
    for (auto& p : pts) p = {rng.normal(), rng.normal()};
    const PhaseSpaceGrid e = empirical_density(pts, g);
    const Eigen::Vector2d c = e.centroid();
    const double bound = 3.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(c(0)) < bound + g.step());
    CHECK(std::fabs(c(1)) < bound + g.step());
  }
}

TEST_CASE("distribution distance") {
  const GridGeometry g{6.0, 64};
  const PhaseSpaceGrid analytic = propensity(vacuum_rho(), vacuum_rho(), g, Efficiency(1.0));
  RngStream rng(31);

  SUBCASE("null self test") {
    const auto pts = sample_from_grid(analytic, rng, 100000);
    const auto report = distribution_distance(analytic, empirical_density(pts, g));
    CHECK(report.p_value > 0.01);
    CHECK(report.total_variation < 0.05);
  }
  SUBCASE("a wrong efficiency is rejected hard") {
    const PhaseSpaceGrid wrong = propensity(vacuum_rho(), vacuum_rho(), g, Efficiency(0.5));
    const auto pts = sample_from_grid(wrong, rng, 100000);
    const auto report = distribution_distance(analytic, empirical_density(pts, g));
    CHECK(report.p_value < 1e-6);
  }
  SUBCASE("geometry mismatch is rejected") {
    const GridGeometry other{5.0, 64};
    std::vector<std::pair<double, double>> pts(10, {0.0, 0.0});
    CHECK_THROWS_AS(distribution_distance(analytic, empirical_density(pts, other)),
                    std::invalid_argument);
  }
}

TEST_CASE("default grid policy") {
  CHECK(default_grid(Complex(0.0, 0.0)).half_extent == doctest::Approx(6.0));
  CHECK(default_grid(Complex(3.0, 4.0)).half_extent == doctest::Approx(10.0));
  CHECK_THROWS_AS(characteristic_function(vacuum_rho(), GridGeometry{6.0, 100}),
                  std::invalid_argument);
}
