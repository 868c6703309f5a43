#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "eps/errors.hpp"

namespace eps {

enum class RateCheck { Strict, AllowAboveOne };

// Piecewise-linear adjusted-return profile. Loss tier k (k = 0..n) covers
// returns in [l_{k+1}, l_k) with l_0 = 0, l_{n+1} = -1 and pays protection
// rate p_{k+1}; gain tier j covers [g_j, g_{j+1}) with g_0 = 0 and charges f_{j+1}.
class EpsStructure {
 public:
  EpsStructure(std::vector<double> loss_breaks, std::vector<double> protection_rates,
               std::vector<double> gain_breaks, std::vector<double> fee_rates,
               RateCheck check = RateCheck::Strict)
      : loss_(std::move(loss_breaks)),
        prot_(std::move(protection_rates)),
        gain_(std::move(gain_breaks)),
        fee_(std::move(fee_rates)) {
    require(prot_.size() == loss_.size() + 1, "need one protection rate per loss tier");
    require(fee_.size() == gain_.size() + 1, "need one fee rate per gain tier");
    double prev = 0.0;
    for (double l : loss_) {
      require(l < prev && l > -1.0, "loss breaks must be strictly decreasing inside (-1, 0)");
      prev = l;
    }
    prev = 0.0;
    for (double g : gain_) {
      require(g > prev && std::isfinite(g), "gain breaks must be strictly increasing and positive");
      prev = g;
    }
    bool above_one = false;
    for (const auto* rates : {&prot_, &fee_}) {
      for (double r : *rates) {
        require(r >= 0.0 && std::isfinite(r), "participation rates must be non-negative");
        above_one = above_one || r > 1.0;
      }
    }
    if (above_one) {
      require(check == RateCheck::AllowAboveOne,
              "participation rates above 1 need the explicit override");
      std::clog << "warning: participation rate above 1 accepted by override\n";
    }
    check_ = check;
  }

  const std::vector<double>& loss_breaks() const noexcept { return loss_; }
  const std::vector<double>& protection_rates() const noexcept { return prot_; }
  const std::vector<double>& gain_breaks() const noexcept { return gain_; }
  const std::vector<double>& fee_rates() const noexcept { return fee_; }

  EpsStructure with_fee_rate(std::size_t tier, double rate) const {
    require(tier < fee_.size(), "fee tier out of range");
    auto fee = fee_;
    fee[tier] = rate;
    return {loss_, prot_, gain_, std::move(fee), rate > 1.0 ? RateCheck::AllowAboveOne : check_};
  }

  bool operator==(const EpsStructure& o) const {
    return loss_ == o.loss_ && prot_ == o.prot_ && gain_ == o.gain_ && fee_ == o.fee_;
  }

 private:
  std::vector<double> loss_;
  std::vector<double> prot_;
  std::vector<double> gain_;
  std::vector<double> fee_;
  RateCheck check_ = RateCheck::Strict;
};

inline EpsStructure make_buffer(double l1, double g1, double p2, double f2,
                                RateCheck check = RateCheck::Strict) {
  require(-1.0 < l1 && l1 < 0.0 && 0.0 < g1, "buffer needs -1 < l1 < 0 < g1");
  require(p2 > 0.0 && f2 > 0.0, "buffer rates must be positive");
  return {{l1}, {0.0, p2}, {g1}, {0.0, f2}, check};
}

inline EpsStructure make_floor(double l1, double g1, double p1, double f2,
                               RateCheck check = RateCheck::Strict) {
  require(-1.0 < l1 && l1 < 0.0 && 0.0 < g1, "floor needs -1 < l1 < 0 < g1");
  require(p1 > 0.0 && f2 > 0.0, "floor rates must be positive");
  require(p1 <= 1.0 || check == RateCheck::AllowAboveOne, "floor protection rate must be at most 1");
  return {{l1}, {p1, 0.0}, {g1}, {0.0, f2}, check};
}

// Non-positive part: what the provider pays out on losses.
inline double protection_leg(const EpsStructure& s, double r) {
  require(r > -1.0, "return must exceed -100%");
  if (r >= 0.0) return 0.0;
  const auto& l = s.loss_breaks();
  const auto& p = s.protection_rates();
  double total = 0.0;
  double upper = 0.0;
  for (std::size_t k = 0; k <= l.size(); ++k) {
    const double lower = k < l.size() ? l[k] : -1.0;
    if (r < upper) total -= p[k] * (upper - std::max(r, lower));
    if (r >= lower) break;
    upper = lower;
  }
  return total;
}

// Non-negative part: fees charged on gains.
inline double fee_leg(const EpsStructure& s, double r) {
  require(r > -1.0, "return must exceed -100%");
  if (r <= 0.0) return 0.0;
  const auto& g = s.gain_breaks();
  const auto& f = s.fee_rates();
  double total = 0.0;
  double lower = 0.0;
  for (std::size_t j = 0; j <= g.size(); ++j) {
    const double upper = j < g.size() ? g[j] : std::numeric_limits<double>::infinity();
    if (r > lower) total += f[j] * (std::min(r, upper) - lower);
    if (r <= upper) break;
    lower = upper;
  }
  return total;
}

inline double psi(const EpsStructure& s, double r) { return protection_leg(s, r) + fee_leg(s, r); }

enum class OptionKind { Put, Call };

enum class Underlying { DomesticEquity, ForeignEquity, EffectiveForeign, QuantoForeign, BasketEffective, BasketQuanto };

struct HedgePosition {
  OptionKind kind;
  Underlying underlying;
  double strike;
  double quantity;  // negative = short
};

struct HedgePortfolio {
  std::vector<HedgePosition> positions;

  // Terminal value when the underlying ends at `level`.
  double payoff(double level) const noexcept {
    double v = 0.0;
    for (const auto& h : positions) {
      v += h.quantity * (h.kind == OptionKind::Put ? std::max(h.strike - level, 0.0)
                                                   : std::max(level - h.strike, 0.0));
    }
    return v;
  }
};

// Static hedge on a normalized underlying (initial level 1). Its terminal
// value at level 1 + R is -psi(R): the provider's net liability.
inline HedgePortfolio replication_weights(const EpsStructure& s,
                                          Underlying underlying = Underlying::DomesticEquity) {
  HedgePortfolio h;
  const auto& l = s.loss_breaks();
  const auto& p = s.protection_rates();
  const auto& g = s.gain_breaks();
  const auto& f = s.fee_rates();
  // put at 1 + l_i with quantity p_{i+1} - p_i, p_0 = 0, l_0 = 0
  for (std::size_t i = 0; i <= l.size(); ++i) {
    const double prev = i == 0 ? 0.0 : p[i - 1];
    const double q = p[i] - prev;
    const double strike = 1.0 + (i == 0 ? 0.0 : l[i - 1]);
    if (q != 0.0) h.positions.push_back({OptionKind::Put, underlying, strike, q});
  }
  for (std::size_t j = 0; j <= g.size(); ++j) {
    const double prev = j == 0 ? 0.0 : f[j - 1];
    const double q = f[j] - prev;
    const double strike = 1.0 + (j == 0 ? 0.0 : g[j - 1]);
    if (q != 0.0) h.positions.push_back({OptionKind::Call, underlying, strike, -q});
  }
  return h;
}

inline double effective_return(double r_f, double r_q) {
  require(r_f > -1.0 && r_q > -1.0, "returns must exceed -100%");
  return r_f + r_q + r_f * r_q;
}

inline double aggregated_return(double w, double r_d, double r_foreign) {
  require(w >= 0.0 && w <= 1.0, "weight must lie in [0, 1]");
  return w * r_d + (1.0 - w) * r_foreign;
}

enum class ReturnKind {
  Domestic,
  NominalForeign,
  EffectiveForeign,
  QuantoForeign,
  AggregatedEffective,
  AggregatedQuanto
};

constexpr std::string_view to_string(ReturnKind k) noexcept {
  switch (k) {
    case ReturnKind::Domestic: return "domestic";
    case ReturnKind::NominalForeign: return "nominal";
    case ReturnKind::EffectiveForeign: return "effective";
    case ReturnKind::QuantoForeign: return "quanto";
    case ReturnKind::AggregatedEffective: return "aggregated-effective";
    case ReturnKind::AggregatedQuanto: return "aggregated-quanto";
  }
  return "unknown";
}

// Initial holdings of a portfolio split between the two equity markets.
struct PortfolioSplit {
  double notional;
  double w;
  double alpha0;  // units of the domestic equity
  double beta0;   // units of the foreign equity

  static PortfolioSplit make(double notional, double w, double s_d0, double s_f0, double q0) {
    require(w >= 0.0 && w <= 1.0, "weight must lie in [0, 1]");
    require(s_d0 > 0.0 && s_f0 > 0.0 && q0 > 0.0, "spot levels must be positive");
    return {notional, w, w * notional / s_d0, (1.0 - w) * notional / (q0 * s_f0)};
  }
};

}  // namespace eps
