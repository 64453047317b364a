#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "planlearn/errors.hpp"

namespace planlearn {

enum class PdfKind { gaussian, beta, gamma };

inline std::string to_string(PdfKind k) {
  switch (k) {
    case PdfKind::gaussian: return "gaussian";
    case PdfKind::beta: return "beta";
    case PdfKind::gamma: return "gamma";
  }
  return "?";
}

namespace detail {

// Fit floors: one observation must not collapse a family to a Dirac.
inline constexpr double sigma_floor = 1e-3;
inline constexpr double variance_floor = 1e-6;
inline constexpr double shape_min = 1e-3;
inline constexpr double shape_max = 1e7;
inline constexpr double support_eps = 1e-6;   // quantile clamp for unbounded modes
inline constexpr double sample_eps = 1e-9;    // keeps log terms finite

inline double digamma(double x) {
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

inline double trigamma(double x) {
  double result = 0.0;
  while (x < 6.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
                   inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
  return result;
}

inline double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace detail

// One parametric density. Parameter slots: gaussian (mu, sigma),
// beta (alpha, beta), gamma (shape k, scale theta).
struct Pdf {
  PdfKind kind = PdfKind::gaussian;
  double a = 0.0;
  double b = 1.0;

  static Pdf gaussian(double mu, double sigma) { return {PdfKind::gaussian, mu, sigma}; }
  static Pdf beta(double alpha, double beta_p) { return {PdfKind::beta, alpha, beta_p}; }
  static Pdf gamma(double shape, double scale) { return {PdfKind::gamma, shape, scale}; }

  void validate() const {
    switch (kind) {
      case PdfKind::gaussian:
        if (!(b > 0.0)) throw parameter_error("gaussian sigma must be positive");
        break;
      case PdfKind::beta:
        if (!(a > 0.0) || !(b > 0.0)) throw parameter_error("beta parameters must be positive");
        break;
      case PdfKind::gamma:
        if (!(a > 0.0) || !(b > 0.0)) throw parameter_error("gamma parameters must be positive");
        break;
    }
  }

  // Evaluated in log space so extreme readings underflow to zero instead of
  // producing inf * 0. Endpoint densities that are unbounded (shape parameters
  // below one) are capped at the value a support_eps step inside the support.
  double density(double x) const {
    validate();
    switch (kind) {
      case PdfKind::gaussian: {
        const double z = (x - a) / b;
        return std::exp(-0.5 * z * z) / (b * std::sqrt(2.0 * std::numbers::pi));
      }
      case PdfKind::beta: {
        if (x < 0.0 || x > 1.0) return 0.0;
        if (x == 0.0) {
          if (a > 1.0) return 0.0;
          if (a == 1.0) return b;  // (1-x)^(b-1)/B(1,b) at zero
          return density(detail::support_eps);
        }
        if (x == 1.0) {
          if (b > 1.0) return 0.0;
          if (b == 1.0) return a;
          return density(1.0 - detail::support_eps);
        }
        return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                        detail::log_beta_fn(a, b));
      }
      case PdfKind::gamma: {
        if (x < 0.0) return 0.0;
        if (x == 0.0) {
          if (a > 1.0) return 0.0;
          if (a == 1.0) return 1.0 / b;
          return density(detail::support_eps);
        }
        return std::exp((a - 1.0) * (std::log(x) - std::log(b)) - x / b - std::lgamma(a) -
                        std::log(b));
      }
    }
    return 0.0;
  }

  // Supremum of the density. Families with an unbounded endpoint density
  // (beta with a parameter below 1, gamma with shape below 1) are capped by
  // evaluating at a point offset support_eps from the endpoint.
  double mode_density() const {
    validate();
    switch (kind) {
      case PdfKind::gaussian:
        return 1.0 / (b * std::sqrt(2.0 * std::numbers::pi));
      case PdfKind::beta: {
        if (a > 1.0 && b > 1.0) return density((a - 1.0) / (a + b - 2.0));
        double best = 0.0;
        if (a <= 1.0) best = std::max(best, density(a < 1.0 ? detail::support_eps : 0.0));
        if (b <= 1.0) best = std::max(best, density(b < 1.0 ? 1.0 - detail::support_eps : 1.0));
        return best;
      }
      case PdfKind::gamma: {
        if (a > 1.0) return density((a - 1.0) * b);
        if (a == 1.0) return 1.0 / b;
        return density(detail::support_eps);
      }
    }
    return 0.0;
  }

  double mean() const {
    switch (kind) {
      case PdfKind::gaussian: return a;
      case PdfKind::beta: return a / (a + b);
      case PdfKind::gamma: return a * b;
    }
    return 0.0;
  }

  friend bool operator==(const Pdf&, const Pdf&) = default;
};

// Maximum-likelihood fit. Gaussian is closed form; beta and gamma start from
// method-of-moments and take up to 50 Newton steps on the log-likelihood.
inline Pdf fit_mle(PdfKind kind, const std::vector<double>& samples) {
  if (samples.empty()) throw parameter_error("fit_mle requires at least one sample");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= n;

  switch (kind) {
    case PdfKind::gaussian:
      return Pdf::gaussian(mean, std::max(std::sqrt(var), detail::sigma_floor));

    case PdfKind::beta: {
      const double m = std::clamp(mean, detail::sample_eps, 1.0 - detail::sample_eps);
      const bool degenerate = var < detail::variance_floor;
      double v = std::clamp(var, detail::variance_floor, m * (1.0 - m) * (1.0 - 1e-9));
      const double common = m * (1.0 - m) / v - 1.0;
      double alpha = std::clamp(m * common, detail::shape_min, detail::shape_max);
      double beta_p = std::clamp((1.0 - m) * common, detail::shape_min, detail::shape_max);
      if (degenerate) return Pdf::beta(alpha, beta_p);  // moments only

      double slog_x = 0.0, slog_1mx = 0.0;
      for (double x : samples) {
        const double xc = std::clamp(x, detail::sample_eps, 1.0 - detail::sample_eps);
        slog_x += std::log(xc);
        slog_1mx += std::log(1.0 - xc);
      }
      auto loglik = [&](double a, double b) {
        return (a - 1.0) * slog_x + (b - 1.0) * slog_1mx - n * detail::log_beta_fn(a, b);
      };
      double cur = loglik(alpha, beta_p);
      for (int it = 0; it < 50; ++it) {
        const double psi_ab = detail::digamma(alpha + beta_p);
        const double g1 = n * (psi_ab - detail::digamma(alpha)) + slog_x;
        const double g2 = n * (psi_ab - detail::digamma(beta_p)) + slog_1mx;
        const double tri_ab = detail::trigamma(alpha + beta_p);
        const double h11 = n * (tri_ab - detail::trigamma(alpha));
        const double h22 = n * (tri_ab - detail::trigamma(beta_p));
        const double h12 = n * tri_ab;
        const double det = h11 * h22 - h12 * h12;
        if (std::abs(det) < 1e-30) break;
        double da = (h22 * g1 - h12 * g2) / det;
        double db = (h11 * g2 - h12 * g1) / det;
        bool moved = false;
        for (int halving = 0; halving < 20; ++halving) {
          const double na = std::clamp(alpha - da, detail::shape_min, detail::shape_max);
          const double nb = std::clamp(beta_p - db, detail::shape_min, detail::shape_max);
          const double next = loglik(na, nb);
          if (next >= cur) {
            moved = std::abs(na - alpha) > 1e-12 || std::abs(nb - beta_p) > 1e-12;
            alpha = na;
            beta_p = nb;
            cur = next;
            break;
          }
          da *= 0.5;
          db *= 0.5;
        }
        if (!moved) break;
      }
      return Pdf::beta(alpha, beta_p);
    }

    case PdfKind::gamma: {
      const double m = std::max(mean, detail::sample_eps);
      double slog = 0.0;
      for (double x : samples) slog += std::log(std::max(x, detail::sample_eps));
      const double s = std::log(m) - slog / n;
      double k;
      if (s <= 1e-12) {
        k = detail::shape_max;  // essentially identical samples
      } else {
        k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
        for (int it = 0; it < 50; ++it) {
          const double g = std::log(k) - detail::digamma(k) - s;
          const double gp = 1.0 / k - detail::trigamma(k);
          const double nk = std::clamp(k - g / gp, detail::shape_min, detail::shape_max);
          if (std::abs(nk - k) < 1e-12) {
            k = nk;
            break;
          }
          k = nk;
        }
      }
      const double v = std::max(var, detail::variance_floor);
      if (k >= detail::shape_max) k = std::clamp(m * m / v, detail::shape_min, detail::shape_max);
      return Pdf::gamma(k, m / k);
    }
  }
  throw parameter_error("unknown family");
}

// Convex parameter blend theta' = w*old + (1-w)*fitted, clamped back into the
// family's valid range.
inline Pdf blend_update(const Pdf& old, const Pdf& fitted, double w) {
  if (old.kind != fitted.kind) throw parameter_error("blend_update across families");
  Pdf out = old;
  out.a = w * old.a + (1.0 - w) * fitted.a;
  out.b = w * old.b + (1.0 - w) * fitted.b;
  switch (out.kind) {
    case PdfKind::gaussian:
      out.b = std::max(out.b, detail::sigma_floor);
      break;
    case PdfKind::beta:
    case PdfKind::gamma:
      out.a = std::clamp(out.a, detail::shape_min, detail::shape_max);
      out.b = std::clamp(out.b, detail::shape_min, detail::shape_max);
      break;
  }
  return out;
}

// Rule that produces a fresh conditional from a single observed scalar.
//   gaussian: mean at the observation, fixed spread.
//   beta: mode matched at the observation with fixed total concentration.
//   gamma: shape chosen so the mode sits at the observation with fixed scale.
struct PdfInitializer {
  PdfKind kind = PdfKind::gaussian;
  double param = 0.25;  // gaussian: sigma; beta: concentration alpha+beta; gamma: theta

  Pdf make(double x) const {
    switch (kind) {
      case PdfKind::gaussian:
        return Pdf::gaussian(x, param);
      case PdfKind::beta: {
        const double c = std::max(param, 2.0 + detail::shape_min);
        const double m = std::clamp(x, 0.0, 1.0);
        return Pdf::beta(1.0 + m * (c - 2.0), 1.0 + (1.0 - m) * (c - 2.0));
      }
      case PdfKind::gamma: {
        if (x <= detail::support_eps) return Pdf::gamma(1.0, param);
        return Pdf::gamma(1.0 + x / param, param);
      }
    }
    throw parameter_error("unknown family");
  }

  double mode_density(double x) const { return make(x).mode_density(); }

  friend bool operator==(const PdfInitializer&, const PdfInitializer&) = default;
};

}  // namespace planlearn
