#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "eps/eps_core.hpp"
#include "eps/errors.hpp"
#include "eps/market_model.hpp"
#include "eps/numerics.hpp"

namespace eps {

enum class Currency { Domestic, Foreign };

struct VanillaQuote {
  double value;
  Currency currency;
};

struct EpsQuote {
  EpsQuote(double v, ReturnKind k, Currency c = Currency::Domestic, std::optional<double> se = std::nullopt)
      : value(v), kind(k), currency(c), std_error(se) {}

  double value;  // fraction of notional; the provider's fair premium
  ReturnKind kind;
  Currency currency;
  std::optional<double> std_error;

  double per_100() const noexcept { return 100.0 * value; }
};

// Lognormal price with forward spot * exp((rate + carry) T), discounted at rate.
inline VanillaQuote bs_option(OptionKind kind, double spot, double strike, double rate, double carry,
                              double vol, double T, Currency currency = Currency::Domestic) {
  require(spot > 0.0 && strike > 0.0, "spot and strike must be positive");
  require(T > 0.0, "maturity must be positive");
  require(vol >= 0.0, "volatility must be non-negative");
  const double df = std::exp(-rate * T);
  const double fwd = spot * std::exp((rate + carry) * T);
  if (vol == 0.0) {
    const double intrinsic = kind == OptionKind::Call ? fwd - strike : strike - fwd;
    return {df * std::max(intrinsic, 0.0), currency};
  }
  const double sd = vol * std::sqrt(T);
  const double d_plus = (std::log(fwd / strike) + 0.5 * sd * sd) / sd;
  const double d_minus = d_plus - sd;
  const double v = kind == OptionKind::Call
                       ? df * (fwd * std_normal_cdf(d_plus) - strike * std_normal_cdf(d_minus))
                       : df * (strike * std_normal_cdf(-d_minus) - fwd * std_normal_cdf(-d_plus));
  return {v, currency};
}

// Sum over the replicating strikes: sum dp_i Put(1 + l_i) - sum df_j Call(1 + g_j).
template <class PutFn, class CallFn>
double assemble_eps(const EpsStructure& s, PutFn&& put, CallFn&& call) {
  double v = 0.0;
  for (const auto& h : replication_weights(s).positions) {
    v += h.quantity * (h.kind == OptionKind::Put ? put(h.strike) : call(h.strike));
  }
  return v;
}

// Closed form on a normalized lognormal asset: protection puts minus fee calls,
// written out tier by tier with the textbook d+/d- terms.
inline double normalized_eps_value(const EpsStructure& s, double rate, double vol, double T) {
  require(T > 0.0, "maturity must be positive");
  const double df = std::exp(-rate * T);
  const double sd = vol * std::sqrt(T);
  auto put = [&](double x) {
    if (sd == 0.0) return std::max(x * df - 1.0, 0.0);
    const double dp = (std::log(1.0 / x) + (rate + 0.5 * vol * vol) * T) / sd;
    return x * df * std_normal_cdf(-(dp - sd)) - std_normal_cdf(-dp);
  };
  auto call = [&](double x) {
    if (sd == 0.0) return std::max(1.0 - x * df, 0.0);
    const double dp = (std::log(1.0 / x) + (rate + 0.5 * vol * vol) * T) / sd;
    return std_normal_cdf(dp) - x * df * std_normal_cdf(dp - sd);
  };
  const auto& l = s.loss_breaks();
  const auto& p = s.protection_rates();
  const auto& g = s.gain_breaks();
  const auto& f = s.fee_rates();
  double v = 0.0;
  for (std::size_t i = 0; i <= l.size(); ++i) {
    const double dp = p[i] - (i == 0 ? 0.0 : p[i - 1]);
    if (dp != 0.0) v += dp * put(1.0 + (i == 0 ? 0.0 : l[i - 1]));
  }
  for (std::size_t j = 0; j <= g.size(); ++j) {
    const double dfee = f[j] - (j == 0 ? 0.0 : f[j - 1]);
    if (dfee != 0.0) v -= dfee * call(1.0 + (j == 0 ? 0.0 : g[j - 1]));
  }
  return v;
}

inline EpsQuote price_eps_domestic(const EpsStructure& s, const MarketParams& m, double T) {
  return {normalized_eps_value(s, m.r_d, m.sigma_d.norm(), T), ReturnKind::Domestic};
}

// Value in USD per unit foreign notional; multiply by q0 for AUD.
inline EpsQuote price_eps_nominal_foreign(const EpsStructure& s, const MarketParams& m, double T) {
  return {normalized_eps_value(s, m.r_f, m.sigma_f.norm(), T), ReturnKind::NominalForeign,
          Currency::Foreign};
}

// Foreign equity call/put struck in AUD, i.e. an option on Q * S_f.
inline VanillaQuote effective_option(OptionKind kind, const MarketParams& m, double strike_domestic,
                                     double T) {
  return bs_option(kind, m.s_fe0(), strike_domestic, m.r_d, 0.0, (m.sigma_f + m.sigma_q).norm(), T);
}

inline EpsQuote price_eps_effective(const EpsStructure& s, const MarketParams& m, double T) {
  return {normalized_eps_value(s, m.r_d, (m.sigma_f + m.sigma_q).norm(), T),
          ReturnKind::EffectiveForeign};
}

// Foreign equity option paid in AUD at the guaranteed rate q_bar.
inline VanillaQuote quanto_option(OptionKind kind, const MarketParams& m, double strike_foreign,
                                  double T, double q_bar) {
  require(q_bar > 0.0, "guaranteed exchange rate must be positive");
  const auto v = bs_option(kind, m.s_f0, strike_foreign, m.r_d, delta_q(m), m.sigma_f.norm(), T);
  return {q_bar * v.value, Currency::Domestic};
}

inline EpsQuote price_eps_quanto(const EpsStructure& s, const MarketParams& m, double T, double q_bar) {
  require(q_bar > 0.0, "guaranteed exchange rate must be positive");
  const double carry = delta_q(m);
  const double vol = m.sigma_f.norm();
  const double v = assemble_eps(
      s, [&](double k) { return bs_option(OptionKind::Put, 1.0, k, m.r_d, carry, vol, T).value; },
      [&](double k) { return bs_option(OptionKind::Call, 1.0, k, m.r_d, carry, vol, T).value; });
  return {q_bar * v, ReturnKind::QuantoForeign};
}

// w * domestic + (1 - w) * foreign; the foreign quote must already be in AUD.
inline EpsQuote net_weighted_cost(double w, const EpsQuote& domestic, const EpsQuote& foreign) {
  require(w >= 0.0 && w <= 1.0, "weight must lie in [0, 1]");
  require(foreign.currency == Currency::Domestic, "foreign quote must be converted to AUD first");
  return {w * domestic.value + (1.0 - w) * foreign.value, foreign.kind};
}

// Fee rate on `tier` that makes the quote zero. Quotes are affine in each
// fee rate, so two evaluations pin the line down.
inline double fair_fee(const EpsStructure& s, const std::function<double(const EpsStructure&)>& pricer,
                       std::size_t tier = 1) {
  const double at_zero = pricer(s.with_fee_rate(tier, 0.0));
  const double at_one = pricer(s.with_fee_rate(tier, 1.0));
  const double slope = at_one - at_zero;
  if (!(std::abs(slope) > 1e-15)) throw NumericError("fee leg has zero value, fair fee undefined");
  const double fee = -at_zero / slope;
  return fee == 0.0 ? 0.0 : fee;
}

}  // namespace eps
