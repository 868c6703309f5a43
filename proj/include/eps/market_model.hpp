#pragma once

#include <array>
#include <cmath>
#include <tuple>
#include <vector>

#include "eps/errors.hpp"
#include "eps/numerics.hpp"

namespace eps {

// Loadings of one asset's log-return on the three Brownian factors, per sqrt(year).
struct VolVector {
  std::array<double, 3> c{};

  constexpr double dot(const VolVector& o) const noexcept {
    return c[0] * o.c[0] + c[1] * o.c[1] + c[2] * o.c[2];
  }
  double norm() const noexcept { return std::sqrt(dot(*this)); }
  constexpr double dot_z(const std::array<double, 3>& z) const noexcept {
    return c[0] * z[0] + c[1] * z[1] + c[2] * z[2];
  }

  friend constexpr VolVector operator+(const VolVector& a, const VolVector& b) noexcept {
    return {{a.c[0] + b.c[0], a.c[1] + b.c[1], a.c[2] + b.c[2]}};
  }
  friend constexpr VolVector operator-(const VolVector& a, const VolVector& b) noexcept {
    return {{a.c[0] - b.c[0], a.c[1] - b.c[1], a.c[2] - b.c[2]}};
  }
  friend constexpr VolVector operator*(double s, const VolVector& a) noexcept {
    return {{s * a.c[0], s * a.c[1], s * a.c[2]}};
  }
  friend constexpr bool operator==(const VolVector&, const VolVector&) = default;
};

struct MarketParams {
  double r_d = 0.0435;
  double r_f = 0.0525;
  VolVector sigma_d{{0.10, 0.0, 0.0}};
  VolVector sigma_f{{0.015, 0.1493, 0.0}};
  VolVector sigma_q{{0.0045, -0.005, 0.0898}};
  double q0 = 1.48;     // AUD per USD
  double s_d0 = 76.5;   // AUD
  double s_f0 = 52.5;   // USD

  // Effective foreign equity level in AUD.
  double s_fe0() const noexcept { return q0 * s_f0; }

  void validate() const {
    require(q0 > 0.0 && s_d0 > 0.0 && s_f0 > 0.0, "spot levels must be positive");
    require(std::isfinite(r_d) && std::isfinite(r_f), "rates must be finite");
    const auto& a = sigma_d.c;
    const auto& b = sigma_f.c;
    const auto& q = sigma_q.c;
    const double det = a[0] * (b[1] * q[2] - b[2] * q[1]) - a[1] * (b[0] * q[2] - b[2] * q[0]) +
                       a[2] * (b[0] * q[1] - b[1] * q[0]);
    require(det != 0.0, "volatility matrix is singular");
  }
};

struct CorrelationInputs {
  double vol_d = 0.10;
  double vol_f = 0.15;
  double vol_q = 0.09;
  Correlation rho_df{0.10};
  Correlation rho_dq{0.05};
  Correlation rho_fq{-0.05};
};

struct VolVectors {
  VolVector d;
  VolVector f;
  VolVector q;
};

// Lower-triangular construction: the domestic equity loads on factor 1 only,
// the foreign equity on factors 1-2, the FX rate on all three.
inline VolVectors build_vol_vectors(const CorrelationInputs& in) {
  require(in.vol_d > 0.0 && in.vol_f > 0.0 && in.vol_q > 0.0, "volatilities must be positive");
  const double r12 = in.rho_df.value();
  const double r13 = in.rho_dq.value();
  const double r23 = in.rho_fq.value();
  const double c12 = std::sqrt((1.0 - r12) * (1.0 + r12));
  require(c12 > 0.0, "equity correlation of +-1 leaves the model incomplete");
  const double a1 = r13;
  const double a2 = (r23 - r12 * r13) / c12;
  const double a3_sq = 1.0 - a1 * a1 - a2 * a2;
  require(a3_sq >= 0.0, "correlation inputs are not positive semi-definite");
  return {VolVector{{in.vol_d, 0.0, 0.0}}, VolVector{{in.vol_f * r12, in.vol_f * c12, 0.0}},
          VolVector{{in.vol_q * a1, in.vol_q * a2, in.vol_q * std::sqrt(a3_sq)}}};
}

// Quanto drift adjustment r_f - r_d - sigma_f . sigma_q.
inline double delta_q(const MarketParams& p) noexcept {
  return p.r_f - p.r_d - p.sigma_f.dot(p.sigma_q);
}

struct TerminalSample {
  double s_d_T;
  double s_f_T;
  double q_T;
};

// Exact terminal law under the domestic martingale measure, expressed as
// gross growth factors X_T / X_0 so callers can work on normalized assets.
class TerminalLaw {
 public:
  TerminalLaw(const MarketParams& p, double T) : p_(p), sqrt_t_(std::sqrt(T)) {
    require(T > 0.0, "maturity must be positive");
    drift_d_ = (p.r_d - 0.5 * p.sigma_d.dot(p.sigma_d)) * T;
    drift_f_ = (p.r_f - p.sigma_f.dot(p.sigma_q) - 0.5 * p.sigma_f.dot(p.sigma_f)) * T;
    drift_q_ = (p.r_d - p.r_f - 0.5 * p.sigma_q.dot(p.sigma_q)) * T;
  }

  struct Growth {
    double d;
    double f;
    double q;
  };

  Growth growth(const std::array<double, 3>& z) const noexcept {
    return {std::exp(drift_d_ + p_.sigma_d.dot_z(z) * sqrt_t_),
            std::exp(drift_f_ + p_.sigma_f.dot_z(z) * sqrt_t_),
            std::exp(drift_q_ + p_.sigma_q.dot_z(z) * sqrt_t_)};
  }

  TerminalSample sample(const std::array<double, 3>& z) const noexcept {
    const Growth g = growth(z);
    return {p_.s_d0 * g.d, p_.s_f0 * g.f, p_.q0 * g.q};
  }

 private:
  MarketParams p_;
  double sqrt_t_;
  double drift_d_ = 0.0;
  double drift_f_ = 0.0;
  double drift_q_ = 0.0;
};

inline std::array<double, 3> next_triple(GaussianCursor& cursor) noexcept {
  std::array<double, 3> z;
  z[0] = cursor.next();
  z[1] = cursor.next();
  z[2] = cursor.next();
  return z;
}

inline std::vector<TerminalSample> simulate_terminal(const MarketParams& p, double T, std::size_t n,
                                                     GaussianStream stream) {
  require(n >= 1, "need at least one sample");
  const TerminalLaw law(p, T);
  GaussianCursor cursor(stream);
  std::vector<TerminalSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(law.sample(next_triple(cursor)));
  return out;
}

struct PathGrid {
  std::vector<double> t;
  std::vector<double> s_d;
  std::vector<double> s_f;
  std::vector<double> q;
  std::vector<double> s_fe;
};

inline PathGrid simulate_path(const MarketParams& p, double T, std::size_t steps,
                              GaussianStream stream) {
  require(steps >= 1, "need at least one step");
  require(T > 0.0, "maturity must be positive");
  const double dt = T / static_cast<double>(steps);
  const TerminalLaw law(p, dt);
  GaussianCursor cursor(stream);

  PathGrid g;
  for (auto* v : {&g.t, &g.s_d, &g.s_f, &g.q, &g.s_fe}) v->reserve(steps + 1);
  double sd = p.s_d0;
  double sf = p.s_f0;
  double q = p.q0;
  auto push = [&](double t) {
    g.t.push_back(t);
    g.s_d.push_back(sd);
    g.s_f.push_back(sf);
    g.q.push_back(q);
    g.s_fe.push_back(q * sf);
  };
  push(0.0);
  for (std::size_t i = 1; i <= steps; ++i) {
    const auto growth = law.growth(next_triple(cursor));
    sd *= growth.d;
    sf *= growth.f;
    q *= growth.q;
    push(i == steps ? T : dt * static_cast<double>(i));
  }
  return g;
}

}  // namespace eps
