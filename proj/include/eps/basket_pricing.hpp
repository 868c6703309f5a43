#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "eps/eps_core.hpp"
#include "eps/errors.hpp"
#include "eps/market_model.hpp"
#include "eps/monte_carlo.hpp"
#include "eps/numerics.hpp"
#include "eps/vanilla_pricing.hpp"

namespace eps {

// Foreign leg of the basket: AUD-converted equity at the market rate, or the
// foreign equity at a guaranteed rate.
enum class BasketVariant { Effective, Quanto };

enum class BasketMethod { Geometric, Moments, MonteCarlo };

constexpr std::string_view to_string(BasketVariant v) noexcept {
  return v == BasketVariant::Effective ? "effective" : "quanto";
}

constexpr std::string_view to_string(BasketMethod m) noexcept {
  switch (m) {
    case BasketMethod::Geometric: return "geometric";
    case BasketMethod::Moments: return "moments";
    case BasketMethod::MonteCarlo: return "mc";
  }
  return "unknown";
}

namespace detail {

struct BasketLegs {
  VolVector foreign_vol;
  double foreign_drift;  // extra discounted drift of the foreign leg
};

inline BasketLegs basket_legs(BasketVariant v, const MarketParams& m) {
  if (v == BasketVariant::Effective) return {m.sigma_f + m.sigma_q, 0.0};
  return {m.sigma_f, delta_q(m)};
}

}  // namespace detail

// Normalized basket w * S_d/S_d0 + (1 - w) * S_x/S_x0 approximated by the
// geometric mean of the two legs, shifted so the first moment is kept.
inline double geometric_basket(OptionKind kind, BasketVariant variant, double w, double K,
                               const MarketParams& m, double T) {
  require(w >= 0.0 && w <= 1.0, "weight must lie in [0, 1]");
  require(K > 0.0 && T > 0.0, "strike and maturity must be positive");
  const auto legs = detail::basket_legs(variant, m);
  const VolVector mixed = w * m.sigma_d + (1.0 - w) * legs.foreign_vol;
  const VolVector spread = m.sigma_d - legs.foreign_vol;
  const double v = mixed.norm();
  const double lambda =
      std::exp(-0.5 * w * (1.0 - w) * spread.dot(spread) * T + (1.0 - w) * legs.foreign_drift * T);
  const double kappa = w + (1.0 - w) * std::exp(legs.foreign_drift * T);
  const double k_disc = K * std::exp(-m.r_d * T);
  const double k_hat = k_disc + lambda - kappa;

  double call;
  if (k_hat <= 0.0) {
    call = lambda - k_hat;
  } else if (v == 0.0) {
    call = std::max(lambda - k_hat, 0.0);
  } else {
    const double sd = v * std::sqrt(T);
    const double d_plus = (std::log(lambda / k_hat) + 0.5 * sd * sd) / sd;
    call = lambda * std_normal_cdf(d_plus) - k_hat * std_normal_cdf(d_plus - sd);
  }
  if (kind == OptionKind::Call) return call;
  if (k_hat <= 0.0) return 0.0;
  return call - (kappa - k_disc);
}

inline double geometric_basket_effective(OptionKind kind, double w, double K, const MarketParams& m,
                                         double T) {
  return geometric_basket(kind, BasketVariant::Effective, w, K, m, T);
}

inline double geometric_basket_quanto(OptionKind kind, double w, double K, const MarketParams& m,
                                      double T) {
  return geometric_basket(kind, BasketVariant::Quanto, w, K, m, T);
}

struct MomentSummary {
  double m1;
  double m2;
  double m3;
  double mu;
  double sigma;
  double eta;
};

inline MomentSummary summarize_moments(double m1, double m2, double m3) {
  const double var = m2 - m1 * m1;
  if (!(var > 0.0)) throw NumericError("basket has zero variance");
  const double sigma = std::sqrt(var);
  const double eta = (m3 - 3.0 * m1 * var - m1 * m1 * m1) / (var * sigma);
  return {m1, m2, m3, m1, sigma, eta};
}

// Raw moments of the discounted normalized basket.
inline MomentSummary basket_moments(BasketVariant variant, double w, const MarketParams& m, double T) {
  require(w >= 0.0 && w <= 1.0, "weight must lie in [0, 1]");
  require(T > 0.0, "maturity must be positive");
  const auto legs = detail::basket_legs(variant, m);
  const double w1 = w;
  const double w2 = (1.0 - w) * std::exp(legs.foreign_drift * T);
  const double a = m.sigma_d.dot(m.sigma_d) * T;
  const double b = legs.foreign_vol.dot(legs.foreign_vol) * T;
  const double c = m.sigma_d.dot(legs.foreign_vol) * T;
  const double m1 = w1 + w2;
  const double m2 = w1 * w1 * std::exp(a) + 2.0 * w1 * w2 * std::exp(c) + w2 * w2 * std::exp(b);
  const double m3 = w1 * w1 * w1 * std::exp(3.0 * a) + 3.0 * w1 * w1 * w2 * std::exp(a + 2.0 * c) +
                    3.0 * w1 * w2 * w2 * std::exp(b + 2.0 * c) + w2 * w2 * w2 * std::exp(3.0 * b);
  return summarize_moments(m1, m2, m3);
}

// Law of sign * (exp(shape * Z + log_scale) + shift).
struct ShiftedLognormalParams {
  double sign;
  double shape;
  double log_scale;
  double shift;
};

inline ShiftedLognormalParams fit_shifted_lognormal(const MomentSummary& ms) {
  if (!(ms.sigma > 0.0)) throw NumericError("cannot fit a degenerate distribution");
  if (std::abs(ms.eta) < 1e-12) {
    // no skew to match: plain two-moment lognormal
    if (!(ms.mu > 0.0)) throw NumericError("two-moment lognormal fit needs a positive mean");
    const double s2 = std::log1p((ms.sigma / ms.mu) * (ms.sigma / ms.mu));
    return {1.0, std::sqrt(s2), std::log(ms.mu) - 0.5 * s2, 0.0};
  }
  const double c = sign_of(ms.eta);
  const double e = std::abs(ms.eta);
  const double big = 1.0 + 0.5 * e * e + e * std::sqrt(1.0 + 0.25 * e * e);
  // x - 1 = cbrt(big) + cbrt(1/big) - 2, written as a square to avoid cancellation
  const double u = std::pow(big, 1.0 / 6.0);
  const double x_minus_1 = (u - 1.0 / u) * (u - 1.0 / u);
  const double x = 1.0 + x_minus_1;
  const double s = std::sqrt(std::log1p(x_minus_1));
  const double log_scale = 0.5 * std::log(ms.sigma * ms.sigma / (x * x_minus_1));
  const double shift = c * ms.mu - ms.sigma / std::sqrt(x_minus_1);
  return {c, s, log_scale, shift};
}

// Raw moments of the fitted law.
inline std::array<double, 3> shifted_lognormal_moments(const ShiftedLognormalParams& p) {
  const double s2 = p.shape * p.shape;
  const double e1 = std::exp(p.log_scale + 0.5 * s2);
  const double e2 = std::exp(2.0 * p.log_scale + 2.0 * s2);
  const double e3 = std::exp(3.0 * p.log_scale + 4.5 * s2);
  const double t = p.shift;
  return {p.sign * (e1 + t), e2 + 2.0 * t * e1 + t * t,
          p.sign * (e3 + 3.0 * t * e2 + 3.0 * t * t * e1 + t * t * t)};
}

// Call on the fitted law, strike discounted at r_d.
inline double mm_basket_call(const ShiftedLognormalParams& p, double K, double r_d, double T) {
  require(K > 0.0 && T > 0.0, "strike and maturity must be positive");
  const double k = K * std::exp(-r_d * T);
  const double s = p.shape;
  const double m = p.log_scale;
  const double tau = p.shift;
  const double fwd = std::exp(m + 0.5 * s * s);
  if (p.sign > 0.0) {
    if (k <= tau) return fwd + tau - k;
    const double d11 = (-std::log(k - tau) + m + s * s) / s;
    const double d12 = (-std::log(k - tau) + m) / s;
    return fwd * std_normal_cdf(d11) - (k - tau) * std_normal_cdf(d12);
  }
  if (k > -tau) return 0.0;
  const double d21 = (std::log(-k - tau) - m - s * s) / s;
  const double d22 = (std::log(-k - tau) - m) / s;
  return -fwd * std_normal_cdf(d21) + (-k - tau) * std_normal_cdf(d22);
}

// Put taken from the call by parity on the basket's true mean.
inline double mm_basket_price(OptionKind kind, const ShiftedLognormalParams& p, double mean, double K,
                              double r_d, double T) {
  const double call = mm_basket_call(p, K, r_d, T);
  if (kind == OptionKind::Call) return call;
  return call - (mean - K * std::exp(-r_d * T));
}

// Return of the normalized basket for a given draw of factor shocks.
class BasketReturnSampler {
 public:
  BasketReturnSampler(BasketVariant variant, double w, const MarketParams& m, double T)
      : variant_(variant), w_(w), law_(m, T) {
    require(w >= 0.0 && w <= 1.0, "weight must lie in [0, 1]");
  }

  struct Legs {
    double domestic;  // S_d(T) / S_d(0)
    double foreign;   // effective or nominal foreign growth
  };

  Legs legs(const std::array<double, 3>& z) const noexcept {
    const auto g = law_.growth(z);
    return {g.d, variant_ == BasketVariant::Effective ? g.f * g.q : g.f};
  }

  double basket_return(const Legs& l) const noexcept {
    return w_ * (l.domestic - 1.0) + (1.0 - w_) * (l.foreign - 1.0);
  }

 private:
  BasketVariant variant_;
  double w_;
  TerminalLaw law_;
};

// Discounted expected hedge payoff -psi(R) of the aggregated EPS.
inline McEstimate mc_basket_eps(const EpsStructure& s, BasketVariant variant, double w,
                                const MarketParams& m, double T, const McConfig& cfg) {
  const BasketReturnSampler sampler(variant, w, m, T);
  const double df = std::exp(-m.r_d * T);
  return mc_expectation(cfg, [&](const std::array<double, 3>& z) {
    const double r = sampler.basket_return(sampler.legs(z));
    return -df * psi(s, std::max(r, std::nextafter(-1.0, 0.0)));
  });
}

inline EpsQuote price_eps_aggregated(const EpsStructure& s, BasketVariant variant, double w,
                                     const MarketParams& m, double T, BasketMethod method,
                                     const McConfig& cfg = {}) {
  const ReturnKind kind =
      variant == BasketVariant::Effective ? ReturnKind::AggregatedEffective : ReturnKind::AggregatedQuanto;
  switch (method) {
    case BasketMethod::Geometric: {
      const double v = assemble_eps(
          s, [&](double k) { return geometric_basket(OptionKind::Put, variant, w, k, m, T); },
          [&](double k) { return geometric_basket(OptionKind::Call, variant, w, k, m, T); });
      return {v, kind};
    }
    case BasketMethod::Moments: {
      const auto ms = basket_moments(variant, w, m, T);
      const auto fit = fit_shifted_lognormal(ms);
      const double v = assemble_eps(
          s, [&](double k) { return mm_basket_price(OptionKind::Put, fit, ms.mu, k, m.r_d, T); },
          [&](double k) { return mm_basket_price(OptionKind::Call, fit, ms.mu, k, m.r_d, T); });
      return {v, kind};
    }
    case BasketMethod::MonteCarlo: {
      const auto est = mc_basket_eps(s, variant, w, m, T, cfg);
      return {est.value, kind, Currency::Domestic, est.std_error};
    }
  }
  throw InvalidInput("unknown basket method");
}

}  // namespace eps
