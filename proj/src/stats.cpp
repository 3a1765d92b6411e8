#include "twophoto/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twophoto::stats {

namespace {

// Series expansion of P(a,x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x), valid for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double lower_regularized_gamma(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("lower_regularized_gamma: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chi_squared_sf(double x, double dof) {
  if (dof <= 0.0) throw std::invalid_argument("chi_squared_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  if (x < dof / 2.0 + 1.0) return 1.0 - gamma_p_series(dof / 2.0, x / 2.0);
  return gamma_q_contfrac(dof / 2.0, x / 2.0);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    double va = a[ia], vb = b[ib];
    double v = std::min(va, vb);
    while (ia < a.size() && a[ia] <= v) ++ia;
    while (ib < b.size() && b[ib] <= v) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  double ne = std::sqrt(na * nb / (na + nb));
  // Small-sample correction from Stephens keeps the tail usable at modest n.
  double lambda = (ne + 0.12 + 0.11 / ne) * d;
  return {d, kolmogorov_sf(lambda)};
}

MeanCov mean_covariance(const std::vector<std::pair<double, double>>& xy) {
  MeanCov out;
  out.n = xy.size();
  if (xy.empty()) return out;
  double sx = 0, sy = 0;
  for (const auto& [x, y] : xy) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(xy.size());
  out.mean << sx / n, sy / n;
  double cxx = 0, cyy = 0, cxy = 0;
  for (const auto& [x, y] : xy) {
    double dx = x - out.mean(0), dy = y - out.mean(1);
    cxx += dx * dx;
    cyy += dy * dy;
    cxy += dx * dy;
  }
  double denom = xy.size() > 1 ? n - 1.0 : 1.0;
  out.cov << cxx / denom, cxy / denom, cxy / denom, cyy / denom;
  return out;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace twophoto::stats
