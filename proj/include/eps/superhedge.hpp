#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "eps/basket_pricing.hpp"
#include "eps/eps_core.hpp"
#include "eps/errors.hpp"
#include "eps/market_model.hpp"
#include "eps/monte_carlo.hpp"
#include "eps/numerics.hpp"
#include "eps/vanilla_pricing.hpp"

namespace eps {

inline Correlation cosine(const VolVector& a, const VolVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  require(na > 0.0 && nb > 0.0, "correlation of a zero volatility vector is undefined");
  return Correlation(std::clamp(a.dot(b) / (na * nb), -1.0, 1.0));
}

inline Correlation rho_effective(const MarketParams& m) { return cosine(m.sigma_f + m.sigma_q, m.sigma_d); }
inline Correlation rho_quanto(const MarketParams& m) { return cosine(m.sigma_f, m.sigma_d); }

// Which asset pays; the indicator always sits on the other one.
enum class PayerLeg { Domestic, Foreign };

struct DualDigitalSpec {
  PayerLeg payer_leg;
  OptionKind kind;
  double strike;  // normalized, shared by payoff and indicator
  double maturity;
  double quanto_scale = 1.0;
};

// Price of (X_T - K)^+ 1{Y_T >= K} or (K - X_T)^+ 1{Y_T <= K} on the
// normalized domestic equity and foreign leg, discounted at r_d.
inline double dual_digital_price(const DualDigitalSpec& spec, BasketVariant variant,
                                 const MarketParams& m) {
  require(spec.strike > 0.0 && spec.maturity > 0.0, "strike and maturity must be positive");
  const double T = spec.maturity;
  const auto legs = detail::basket_legs(variant, m);
  const double n1 = m.sigma_d.norm();
  const double n2 = legs.foreign_vol.norm();
  require(n1 > 0.0 && n2 > 0.0, "dual digitals need non-zero volatilities");
  const double c12 = m.sigma_d.dot(legs.foreign_vol);
  const Correlation rho(std::clamp(c12 / (n1 * n2), -1.0, 1.0));
  const double drift = legs.foreign_drift;
  const double k_disc = spec.strike * std::exp(-m.r_d * T);
  const double lk = -std::log(k_disc);
  const double rt = std::sqrt(T);

  const double d1 = (lk - 0.5 * n1 * n1 * T) / (n1 * rt);
  const double d2 = (lk + drift * T - 0.5 * n2 * n2 * T) / (n2 * rt);
  auto phi2 = [&](double a, double b) { return bivariate_normal_cdf(a, b, rho); };

  if (spec.payer_leg == PayerLeg::Domestic) {
    const double g1 = (lk + 0.5 * n1 * n1 * T) / (n1 * rt);
    const double g2 = (lk + drift * T + c12 * T - 0.5 * n2 * n2 * T) / (n2 * rt);
    if (spec.kind == OptionKind::Call) return phi2(g1, g2) - k_disc * phi2(d1, d2);
    return k_disc * phi2(-d1, -d2) - phi2(-g1, -g2);
  }
  const double h1 = (lk + c12 * T - 0.5 * n1 * n1 * T) / (n1 * rt);
  const double h2 = (lk + drift * T + 0.5 * n2 * n2 * T) / (n2 * rt);
  const double growth = std::exp(drift * T);
  if (spec.kind == OptionKind::Call) return spec.quanto_scale * (growth * phi2(h1, h2) - k_disc * phi2(d1, d2));
  return spec.quanto_scale * (k_disc * phi2(-d1, -d2) - growth * phi2(-h1, -h2));
}

inline double dual_digital_call_dom(double K, const MarketParams& m, double T) {
  return dual_digital_price({PayerLeg::Domestic, OptionKind::Call, K, T}, BasketVariant::Effective, m);
}
inline double dual_digital_call_for(double K, const MarketParams& m, double T) {
  return dual_digital_price({PayerLeg::Foreign, OptionKind::Call, K, T}, BasketVariant::Effective, m);
}
inline double dual_digital_put_dom(double K, const MarketParams& m, double T) {
  return dual_digital_price({PayerLeg::Domestic, OptionKind::Put, K, T}, BasketVariant::Effective, m);
}
inline double dual_digital_put_for(double K, const MarketParams& m, double T) {
  return dual_digital_price({PayerLeg::Foreign, OptionKind::Put, K, T}, BasketVariant::Effective, m);
}

struct DualDigitalSet {
  double call_dom;
  double call_for;
  double put_dom;
  double put_for;
};

// q_bar scales only the legs paid by the foreign equity.
inline DualDigitalSet quanto_dual_digitals(double K, const MarketParams& m, double T, double q_bar) {
  require(q_bar > 0.0, "guaranteed exchange rate must be positive");
  auto price = [&](PayerLeg leg, OptionKind kind) {
    return dual_digital_price({leg, kind, K, T, q_bar}, BasketVariant::Quanto, m);
  };
  return {price(PayerLeg::Domestic, OptionKind::Call), price(PayerLeg::Foreign, OptionKind::Call),
          price(PayerLeg::Domestic, OptionKind::Put), price(PayerLeg::Foreign, OptionKind::Put)};
}

enum class StructureKind { Buffer, Floor };

struct SimpleTerms {
  StructureKind kind;
  double l1;
  double g1;
  double p;  // p2 for a buffer, p1 for a floor
  double f2;
};

// Recognizes the single-break buffer and floor shapes.
inline SimpleTerms classify(const EpsStructure& s) {
  const auto& l = s.loss_breaks();
  const auto& p = s.protection_rates();
  const auto& g = s.gain_breaks();
  const auto& f = s.fee_rates();
  if (l.size() == 1 && g.size() == 1 && f[0] == 0.0) {
    if (p[0] == 0.0) return {StructureKind::Buffer, l[0], g[0], p[1], f[1]};
    if (p[1] == 0.0) return {StructureKind::Floor, l[0], g[0], p[0], f[1]};
  }
  throw InvalidInput("superhedges are only defined for buffer and floor structures");
}

struct CostComponent {
  std::string label;
  double weight;    // w or 1 - w
  double quantity;  // signed rate multiplier
  double price;
};

struct SuperhedgeCost {
  double value = 0.0;
  std::vector<CostComponent> components;
};

// Cost of the dominating claim built from the two single-asset legs. At
// w = 0 or 1 the indicators are always on, so the legs revert to vanillas and
// the cost equals the single-asset EPS price.
inline SuperhedgeCost superhedge_cost(const EpsStructure& s, BasketVariant variant, double w,
                                      const MarketParams& m, double T, double quanto_scale = 1.0) {
  require(w >= 0.0 && w <= 1.0, "weight must lie in [0, 1]");
  require(quanto_scale > 0.0, "quanto scale must be positive");
  const SimpleTerms t = classify(s);
  const bool gated = w > 0.0 && w < 1.0;
  const double scale = variant == BasketVariant::Quanto ? quanto_scale : 1.0;
  const double foreign_vol =
      variant == BasketVariant::Effective ? (m.sigma_f + m.sigma_q).norm() : m.sigma_f.norm();
  const double foreign_carry = variant == BasketVariant::Effective ? 0.0 : delta_q(m);

  auto vanilla = [&](PayerLeg leg, OptionKind kind, double k) {
    if (leg == PayerLeg::Domestic) return bs_option(kind, 1.0, k, m.r_d, 0.0, m.sigma_d.norm(), T).value;
    return scale * bs_option(kind, 1.0, k, m.r_d, foreign_carry, foreign_vol, T).value;
  };
  auto gated_price = [&](PayerLeg leg, OptionKind kind, double k) {
    if (!gated) return vanilla(leg, kind, k);
    return dual_digital_price({leg, kind, k, T, scale}, variant, m);
  };

  SuperhedgeCost out;
  auto add = [&](std::string label, double weight, double qty, double price) {
    out.value += weight * qty * price;
    out.components.push_back({std::move(label), weight, qty, price});
  };
  const double kl = 1.0 + t.l1;
  const double kg = 1.0 + t.g1;
  for (PayerLeg leg : {PayerLeg::Domestic, PayerLeg::Foreign}) {
    const bool dom = leg == PayerLeg::Domestic;
    const double weight = dom ? w : 1.0 - w;
    const std::string asset = dom ? "S_d" : (variant == BasketVariant::Effective ? "S_fe" : "S_f");
    if (t.kind == StructureKind::Buffer) {
      add("put " + asset, weight, t.p, vanilla(leg, OptionKind::Put, kl));
    } else {
      add("put " + asset, weight, t.p, vanilla(leg, OptionKind::Put, 1.0));
      add("gated put " + asset, weight, -t.p, gated_price(leg, OptionKind::Put, kl));
    }
    add("gated call " + asset, weight, -t.f2, gated_price(leg, OptionKind::Call, kg));
  }
  return out;
}

// Separate single-asset hedges at the aggregated strike levels.
inline double approx_hedge_cost(BasketVariant variant, double w, const EpsStructure& s,
                                const MarketParams& m, double T, double q_bar = 1.0) {
  require(w >= 0.0 && w <= 1.0, "weight must lie in [0, 1]");
  const double dom = price_eps_domestic(s, m, T).value;
  const double foreign = variant == BasketVariant::Effective ? price_eps_effective(s, m, T).value
                                                             : price_eps_quanto(s, m, T, q_bar).value;
  return w * dom + (1.0 - w) * foreign;
}

struct DominanceReport {
  std::size_t violations = 0;
  double max_gap = -std::numeric_limits<double>::infinity();
  double mean_gap = 0.0;
  std::size_t n_paths = 0;
};

// Terminal value of the dominating claim on normalized legs (x, y).
inline double superhedge_payoff(const SimpleTerms& t, double w, double x, double y) {
  const double kl = 1.0 + t.l1;
  const double kg = 1.0 + t.g1;
  auto pos = [](double v) { return std::max(v, 0.0); };
  // (a + b)^+ >= a^+ 1{b >= 0} + b^+ 1{a >= 0}
  auto split_lower = [&](double a, double b) { return pos(a) * (b >= 0.0) + pos(b) * (a >= 0.0); };
  const double call_part = split_lower(w * (x - kg), (1.0 - w) * (y - kg));
  if (t.kind == StructureKind::Buffer) {
    return t.p * (w * pos(kl - x) + (1.0 - w) * pos(kl - y)) - t.f2 * call_part;
  }
  const double atm_puts = w * pos(1.0 - x) + (1.0 - w) * pos(1.0 - y);
  const double low_puts = split_lower(w * (kl - x), (1.0 - w) * (kl - y));
  return t.p * atm_puts - t.p * low_puts - t.f2 * call_part;
}

// Compares the dominating claim with the EPS liability -psi(R) path by path.
inline DominanceReport dominance_check(const EpsStructure& s, BasketVariant variant, double w,
                                       const MarketParams& m, double T, std::size_t n_paths,
                                       std::uint64_t seed, std::size_t partitions = 64,
                                       unsigned workers = 0) {
  require(n_paths >= 1, "need at least one path");
  const SimpleTerms t = classify(s);
  const BasketReturnSampler sampler(variant, w, m, T);
  struct Part {
    std::size_t violations = 0;
    double max_gap = -std::numeric_limits<double>::infinity();
    RunningStats gaps;
  };
  const auto parts = run_partitions(n_paths, seed, partitions, workers, [&](const PartitionRange& r) {
    Part p;
    GaussianCursor cursor(r.stream);
    for (std::size_t i = 0; i < r.count; ++i) {
      const auto legs = sampler.legs(next_triple(cursor));
      const double liability = -psi(s, std::max(sampler.basket_return(legs), std::nextafter(-1.0, 0.0)));
      const double gap = superhedge_payoff(t, w, legs.domestic, legs.foreign) - liability;
      if (gap < -1e-12) ++p.violations;
      p.max_gap = std::max(p.max_gap, gap);
      p.gaps.add(gap);
    }
    return p;
  });
  DominanceReport rep;
  RunningStats all;
  for (const auto& p : parts) {
    rep.violations += p.violations;
    rep.max_gap = std::max(rep.max_gap, p.max_gap);
    all.merge(p.gaps);
  }
  rep.mean_gap = all.mean;
  rep.n_paths = n_paths;
  return rep;
}

}  // namespace eps
