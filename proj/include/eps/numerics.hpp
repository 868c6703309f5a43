#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "eps/errors.hpp"

namespace eps {

class Correlation {
 public:
  constexpr Correlation() = default;
  explicit Correlation(double value) : value_(value) {
    require(value >= -1.0 && value <= 1.0, "correlation must lie in [-1, 1]");
  }
  constexpr double value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

// sgn with sgn(0) = +1
constexpr double sign_of(double x) noexcept { return x < 0.0 ? -1.0 : 1.0; }

inline double std_normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

// erfc keeps relative accuracy in the lower tail, so no cancellation for large |x|.
inline double std_normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Acklam's rational approximation followed by one Halley step against
// std_normal_cdf; the result is accurate to a few ulps over (0, 1).
inline double std_normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "quantile probability must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // refine on the tail that erfc resolves accurately
  const double e = x <= 0.0 ? std_normal_cdf(x) - p : (1.0 - p) - std_normal_cdf(-x);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

namespace detail {

// Upper orthant probability P(X > dh, Y > dk), Genz (2004) BVND.
inline double bvn_upper(double dh, double dk, double r) {
  static constexpr std::array<std::array<double, 10>, 3> w = {{
      {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
      {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
       0.2031674267230659, 0.2334925365383547, 0.2491470458134029},
      {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
       0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
       0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
       0.1527533871307259},
  }};
  static constexpr std::array<std::array<double, 10>, 3> x = {{
      {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970},
      {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
       -0.5873179542866171, -0.3678314989981802, -0.1252334085114692},
      {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
       -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
       -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
       -0.07652652113719733},
  }};
  constexpr double two_pi = 2.0 * std::numbers::pi;

  int ng;
  int lg;
  if (std::abs(r) < 0.3) {
    ng = 0;
    lg = 3;
  } else if (std::abs(r) < 0.75) {
    ng = 1;
    lg = 6;
  } else {
    ng = 2;
    lg = 10;
  }

  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (int i = 0; i < lg; ++i) {
      double sn = std::sin(asr * (x[ng][i] + 1.0) / 2.0);
      bvn += w[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 - x[ng][i]) / 2.0);
      bvn += w[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * two_pi) + std_normal_cdf(-h) * std_normal_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * std_normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      double xs = (a * (x[ng][i] + 1.0)) * (a * (x[ng][i] + 1.0));
      double rs = std::sqrt(1.0 - xs);
      bvn += a * w[ng][i] *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
      xs = as * (1.0 - x[ng][i]) * (1.0 - x[ng][i]) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * w[ng][i] * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
              (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + std_normal_cdf(-std::max(h, k));
  return -bvn + std::max(0.0, std_normal_cdf(-h) - std_normal_cdf(-k));
}

}  // namespace detail

// P(X <= a, Y <= b) for standard normals with correlation rho.
inline double bivariate_normal_cdf(double a, double b, Correlation rho) {
  if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (a == -inf || b == -inf) return 0.0;
  if (a == inf) return std_normal_cdf(b);
  if (b == inf) return std_normal_cdf(a);
  const double p = detail::bvn_upper(-a, -b, rho.value());
  return std::clamp(p, 0.0, 1.0);
}

inline double bivariate_normal_cdf(double a, double b, double rho) {
  return bivariate_normal_cdf(a, b, Correlation(rho));
}

// Philox4x32-10 (Salmon et al., Random123) counter-based bijection.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept {
  constexpr std::uint32_t m0 = 0xD2511F53u;
  constexpr std::uint32_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

// Immutable descriptor of one Gaussian substream. Sample i depends only on
// (seed, stream_index, i), so partitions can be evaluated in any order.
struct GaussianStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;

  // Two normals per Philox block.
  std::array<double, 2> block(std::uint64_t block_index) const noexcept {
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
         static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    const std::uint64_t hi = (std::uint64_t{out[0]} << 32) | out[1];
    const std::uint64_t lo = (std::uint64_t{out[2]} << 32) | out[3];
    return {std_normal_quantile(to_open_unit(hi)), std_normal_quantile(to_open_unit(lo))};
  }

  double at(std::uint64_t i) const noexcept { return block(i / 2)[i % 2]; }

  // 52 bits keep the largest value at 1 - 2^-53, which is exact; 53 would round up to 1.
  static double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
  }
};

// Sequential reader over a stream, starting at a given sample offset.
class GaussianCursor {
 public:
  explicit GaussianCursor(GaussianStream stream, std::uint64_t offset = 0)
      : stream_(stream), next_(offset) {}

  double next() noexcept {
    const std::uint64_t blk = next_ / 2;
    if (blk != cached_block_) {
      cache_ = stream_.block(blk);
      cached_block_ = blk;
    }
    return cache_[next_++ % 2];
  }

 private:
  GaussianStream stream_;
  std::uint64_t next_;
  std::uint64_t cached_block_ = std::numeric_limits<std::uint64_t>::max();
  std::array<double, 2> cache_{};
};

inline std::vector<double> gaussian_samples(GaussianStream stream, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  GaussianCursor cursor(stream);
  for (std::size_t i = 0; i < n; ++i) out.push_back(cursor.next());
  return out;
}

}  // namespace eps
