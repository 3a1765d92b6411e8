#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

namespace twophoto::stats {

/// Regularized lower incomplete gamma P(a, x).
double lower_regularized_gamma(double a, double x);

/// Survival function of the chi-squared distribution with `dof` degrees.
double chi_squared_sf(double x, double dof);

/// Survival function of the Kolmogorov distribution, Q(lambda).
double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct MeanCov {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  std::size_t n = 0;
};

MeanCov mean_covariance(const std::vector<std::pair<double, double>>& xy);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace twophoto::stats
