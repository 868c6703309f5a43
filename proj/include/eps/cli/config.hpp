#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eps/eps_core.hpp"
#include "eps/market_model.hpp"
#include "eps/monte_carlo.hpp"
#include "eps/superhedge.hpp"

namespace eps::cli {

// Anything wrong with the configuration or the command line.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

struct EpsRow {
  StructureKind kind = StructureKind::Buffer;
  double w = 0.5;
  double l1 = -0.05;
  double g1 = 0.05;
  double p_rate = 0.5;
  double f_rate = 0.5;
  std::optional<double> q_bar;  // defaults to q0

  // Zero rates are allowed here so fee solving can start from p = 0 or f = 0.
  EpsStructure structure() const {
    if (kind == StructureKind::Buffer) return {{l1}, {0.0, p_rate}, {g1}, {0.0, f_rate}};
    return {{l1}, {p_rate, 0.0}, {g1}, {0.0, f_rate}};
  }
};

struct RunConfig {
  MarketParams market;
  std::optional<CorrelationInputs> correlations;  // set when the market came from scalar vols
  std::vector<EpsRow> rows;
  double maturity = 1.0;
  double notional = 1'000'000.0;
  McConfig mc;
  std::optional<std::string> output_path;
  std::optional<OutputFormat> format;

  double q_bar(const EpsRow& row) const { return row.q_bar.value_or(market.q0); }
};

inline constexpr std::string_view default_config_text = R"(# Cross-currency market, AUD domestic / USD foreign
[market]
r_d = 0.0435
r_f = 0.0525
sigma_d = 0.10, 0.00, 0.00
sigma_f = 0.015, 0.1493, 0.00
sigma_q = 0.0045, -0.005, 0.0898
q0 = 1.48
s_d0 = 76.5
s_f0 = 52.5

[contract]
maturity = 1
notional = 1000000

[mc]
paths = 1000000
seed = 20240917
partitions = 64

[row]
kind = buffer
w = 0.5
l1 = -0.05
g1 = 0.05
p = 0.5
f = 0.5

[row]
kind = buffer
w = 0.5
l1 = -0.05
g1 = 0.05
p = 0.8
f = 0.5

[row]
kind = buffer
w = 0.2
l1 = -0.05
g1 = 0.10
p = 0.5
f = 0.5

[row]
kind = buffer
w = 0.5
l1 = -0.05
g1 = 0.10
p = 0.5
f = 0.5

[row]
kind = buffer
w = 0.8
l1 = -0.05
g1 = 0.10
p = 0.5
f = 0.5

[row]
kind = buffer
w = 0.2
l1 = -0.05
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = buffer
w = 0.5
l1 = -0.05
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = buffer
w = 0.8
l1 = -0.05
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = buffer
w = 0.5
l1 = -0.05
g1 = 0.10
p = 0.8
f = 0.8

[row]
kind = buffer
w = 0.2
l1 = -0.10
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = buffer
w = 0.5
l1 = -0.10
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = buffer
w = 0.8
l1 = -0.10
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.5
l1 = -0.05
g1 = 0.05
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.5
l1 = -0.05
g1 = 0.10
p = 0.5
f = 0.5

[row]
kind = floor
w = 0.2
l1 = -0.05
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.5
l1 = -0.05
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.8
l1 = -0.05
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.5
l1 = -0.05
g1 = 0.10
p = 0.8
f = 0.8

[row]
kind = floor
w = 0.5
l1 = -0.10
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.2
l1 = -0.15
g1 = 0.10
p = 0.5
f = 0.5

[row]
kind = floor
w = 0.5
l1 = -0.15
g1 = 0.10
p = 0.5
f = 0.5

[row]
kind = floor
w = 0.8
l1 = -0.15
g1 = 0.10
p = 0.5
f = 0.5

[row]
kind = floor
w = 0.2
l1 = -0.15
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.5
l1 = -0.15
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.8
l1 = -0.15
g1 = 0.10
p = 0.8
f = 0.5

[row]
kind = floor
w = 0.5
l1 = -0.15
g1 = 0.10
p = 0.8
f = 0.8
)";

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view text, const std::string& where) {
  text = trim(text);
  // from_chars for double is missing on older libstdc++, so go through strtod
  const std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) {
    throw ConfigError(where + ": expected a number, got '" + buf + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(std::string_view text, const std::string& where) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(where + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

inline VolVector parse_vector(std::string_view text, const std::string& where) {
  VolVector v;
  std::size_t i = 0;
  while (true) {
    const auto comma = text.find(',');
    if (i == 3) throw ConfigError(where + ": expected exactly three components");
    v.c[i++] = parse_double(text.substr(0, comma), where);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (i != 3) throw ConfigError(where + ": expected exactly three components");
  return v;
}

struct Section {
  std::string name;
  int line;
  std::map<std::string, std::pair<std::string, int>> entries;
};

inline std::vector<Section> split_sections(std::string_view text) {
  std::vector<Section> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      out.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    if (out.empty()) throw ConfigError(where + ": entry outside any section");
    const std::string key(trim(line.substr(0, eq)));
    if (!out.back().entries.emplace(key, std::pair{std::string(trim(line.substr(eq + 1))), line_no}).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

// Pops entries from a section and complains about leftovers.
class Reader {
 public:
  explicit Reader(Section& s) : s_(s) {}

  std::optional<std::pair<std::string, std::string>> take(const std::string& key) {
    const auto it = s_.entries.find(key);
    if (it == s_.entries.end()) return std::nullopt;
    std::pair<std::string, std::string> out{it->second.first,
                                            "line " + std::to_string(it->second.second) + " (" + key + ")"};
    s_.entries.erase(it);
    return out;
  }

  std::optional<double> number(const std::string& key) {
    auto v = take(key);
    if (!v) return std::nullopt;
    return parse_double(v->first, v->second);
  }

  double number_or(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  double required(const std::string& key) {
    auto v = number(key);
    if (!v) throw ConfigError("[" + s_.name + "] at line " + std::to_string(s_.line) + ": missing '" + key + "'");
    return *v;
  }

  void finish() const {
    if (!s_.entries.empty()) {
      const auto& [key, value] = *s_.entries.begin();
      throw ConfigError("line " + std::to_string(value.second) + ": unknown key '" + key + "' in [" + s_.name + "]");
    }
  }

 private:
  Section& s_;
};

inline void read_market(Section& sec, RunConfig& cfg) {
  Reader r(sec);
  auto& m = cfg.market;
  m.r_d = r.required("r_d");
  m.r_f = r.required("r_f");
  m.q0 = r.number_or("q0", m.q0);
  m.s_d0 = r.number_or("s_d0", m.s_d0);
  m.s_f0 = r.number_or("s_f0", m.s_f0);

  auto sd = r.take("sigma_d");
  auto sf = r.take("sigma_f");
  auto sq = r.take("sigma_q");
  const bool vectors = sd || sf || sq;
  const auto vol_d = r.number("vol_d");
  const auto vol_f = r.number("vol_f");
  const auto vol_q = r.number("vol_q");
  const auto rho_df = r.number("rho_df");
  const auto rho_dq = r.number("rho_dq");
  const auto rho_fq = r.number("rho_fq");
  const bool scalars = vol_d || vol_f || vol_q || rho_df || rho_dq || rho_fq;
  if (vectors == scalars) {
    throw ConfigError("[market] needs either sigma_d/sigma_f/sigma_q or vol_*/rho_* (exactly one form)");
  }
  if (vectors) {
    if (!sd || !sf || !sq) throw ConfigError("[market] needs all three of sigma_d, sigma_f, sigma_q");
    m.sigma_d = parse_vector(sd->first, sd->second);
    m.sigma_f = parse_vector(sf->first, sf->second);
    m.sigma_q = parse_vector(sq->first, sq->second);
  } else {
    if (!vol_d || !vol_f || !vol_q || !rho_df || !rho_dq || !rho_fq) {
      throw ConfigError("[market] needs vol_d, vol_f, vol_q, rho_df, rho_dq and rho_fq");
    }
    try {
      CorrelationInputs in{*vol_d, *vol_f, *vol_q, Correlation(*rho_df), Correlation(*rho_dq),
                           Correlation(*rho_fq)};
      const auto v = build_vol_vectors(in);
      m.sigma_d = v.d;
      m.sigma_f = v.f;
      m.sigma_q = v.q;
      cfg.correlations = in;
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("[market]: ") + e.what());
    }
  }
  r.finish();
  try {
    m.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("[market]: ") + e.what());
  }
}

inline EpsRow read_row(Section& sec) {
  Reader r(sec);
  EpsRow row;
  const auto kind = r.take("kind");
  if (!kind) throw ConfigError("[row] at line " + std::to_string(sec.line) + ": missing 'kind'");
  if (kind->first == "buffer") {
    row.kind = StructureKind::Buffer;
  } else if (kind->first == "floor") {
    row.kind = StructureKind::Floor;
  } else {
    throw ConfigError(kind->second + ": kind must be buffer or floor");
  }
  row.w = r.required("w");
  row.l1 = r.required("l1");
  row.g1 = r.required("g1");
  row.p_rate = r.required("p");
  row.f_rate = r.required("f");
  row.q_bar = r.number("q_bar");
  r.finish();
  const std::string where = "[row] at line " + std::to_string(sec.line);
  if (!(row.w >= 0.0 && row.w <= 1.0)) throw ConfigError(where + ": w must lie in [0, 1]");
  if (row.q_bar && !(*row.q_bar > 0.0)) throw ConfigError(where + ": q_bar must be positive");
  try {
    (void)row.structure();
  } catch (const InvalidInput& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return row;
}

}  // namespace detail

inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  auto sections = detail::split_sections(text);
  bool have_market = false;
  for (auto& sec : sections) {
    if (sec.name == "market") {
      if (have_market) throw ConfigError("line " + std::to_string(sec.line) + ": duplicate [market]");
      detail::read_market(sec, cfg);
      have_market = true;
    } else if (sec.name == "contract") {
      detail::Reader r(sec);
      cfg.maturity = r.number_or("maturity", cfg.maturity);
      cfg.notional = r.number_or("notional", cfg.notional);
      r.finish();
    } else if (sec.name == "mc") {
      detail::Reader r(sec);
      if (auto v = r.take("paths")) cfg.mc.n_paths = detail::parse_u64(v->first, v->second);
      if (auto v = r.take("seed")) cfg.mc.seed = detail::parse_u64(v->first, v->second);
      if (auto v = r.take("partitions")) cfg.mc.partitions = detail::parse_u64(v->first, v->second);
      if (auto v = r.take("workers")) cfg.mc.workers = static_cast<unsigned>(detail::parse_u64(v->first, v->second));
      if (auto v = r.take("antithetic")) {
        if (v->first != "true" && v->first != "false") throw ConfigError(v->second + ": expected true or false");
        cfg.mc.antithetic = v->first == "true";
      }
      r.finish();
    } else if (sec.name == "output") {
      detail::Reader r(sec);
      if (auto v = r.take("path")) cfg.output_path = v->first;
      if (auto v = r.take("format")) {
        if (v->first == "csv") {
          cfg.format = OutputFormat::Csv;
        } else if (v->first == "json") {
          cfg.format = OutputFormat::Json;
        } else {
          throw ConfigError(v->second + ": format must be csv or json");
        }
      }
      r.finish();
    } else if (sec.name == "row") {
      cfg.rows.push_back(detail::read_row(sec));
    } else {
      throw ConfigError("line " + std::to_string(sec.line) + ": unknown section [" + sec.name + "]");
    }
  }
  if (!have_market) throw ConfigError("missing [market] section");
  if (!(cfg.maturity > 0.0)) throw ConfigError("[contract]: maturity must be positive");
  if (!(cfg.notional >= 0.0)) throw ConfigError("[contract]: notional must be non-negative");
  if (cfg.mc.n_paths == 0) throw ConfigError("[mc]: paths must be positive");
  if (cfg.mc.partitions == 0) throw ConfigError("[mc]: partitions must be positive");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline RunConfig default_config() { return parse_config(default_config_text); }

}  // namespace eps::cli
