#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eps/basket_pricing.hpp"
#include "eps/cli/config.hpp"
#include "eps/eps_core.hpp"
#include "eps/superhedge.hpp"
#include "eps/vanilla_pricing.hpp"

namespace eps::cli {

using json = nlohmann::json;

// Invalid combination of otherwise well-formed options.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-point text; a value that rounds to zero prints without a sign.
inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string_view kind_name(StructureKind k) { return k == StructureKind::Buffer ? "buffer" : "floor"; }

inline json row_json(const EpsRow& r) {
  json j = {{"kind", kind_name(r.kind)}, {"w", r.w}, {"l1", r.l1}, {"g1", r.g1}, {"p", r.p_rate}, {"f", r.f_rate}};
  if (r.q_bar) j["q_bar"] = *r.q_bar;
  return j;
}

// Position of each row within its kind, counted from 1.
inline std::vector<int> row_numbers(const std::vector<EpsRow>& rows) {
  std::vector<int> out;
  int buffers = 0;
  int floors = 0;
  for (const auto& r : rows) out.push_back(r.kind == StructureKind::Buffer ? ++buffers : ++floors);
  return out;
}

// ---- separate-return table ----

struct SeparateQuotes {
  double domestic;   // unweighted
  double nominal;    // weighted nets from here on
  double effective;
  double quanto;
};

inline SeparateQuotes separate_quotes(const RunConfig& cfg, const EpsRow& row) {
  const auto s = row.structure();
  const auto& m = cfg.market;
  const double T = cfg.maturity;
  const auto dom = price_eps_domestic(s, m, T);
  const EpsQuote nominal_aud{m.q0 * price_eps_nominal_foreign(s, m, T).value, ReturnKind::NominalForeign};
  return {dom.value, net_weighted_cost(row.w, dom, nominal_aud).value,
          net_weighted_cost(row.w, dom, price_eps_effective(s, m, T)).value,
          net_weighted_cost(row.w, dom, price_eps_quanto(s, m, T, cfg.q_bar(row))).value};
}

struct AggregatedQuotes {
  McEstimate simulation;
  double geometric;
  double moments;
  double super;
};

inline AggregatedQuotes aggregated_quotes(const RunConfig& cfg, const EpsRow& row, BasketVariant variant,
                                          double quanto_scale = 1.0) {
  const auto s = row.structure();
  const auto& m = cfg.market;
  const double T = cfg.maturity;
  return {mc_basket_eps(s, variant, row.w, m, T, cfg.mc),
          price_eps_aggregated(s, variant, row.w, m, T, BasketMethod::Geometric).value,
          price_eps_aggregated(s, variant, row.w, m, T, BasketMethod::Moments).value,
          superhedge_cost(s, variant, row.w, m, T, quanto_scale).value};
}

inline std::string cmd_tables(int table_id, const RunConfig& cfg, OutputFormat format) {
  if (table_id < 2 || table_id > 4) throw UsageError("unknown table id " + std::to_string(table_id) + " (expected 2, 3 or 4)");
  const auto numbers = row_numbers(cfg.rows);
  std::ostringstream out;
  json rows = json::array();
  if (format == OutputFormat::Csv) {
    out << "kind,row,w,l1,g1,p,f,"
        << (table_id == 2 ? "domestic,nominal,effective,quanto" : "simulation,geometric,moments,super") << '\n';
  }
  for (std::size_t i = 0; i < cfg.rows.size(); ++i) {
    const auto& r = cfg.rows[i];
    std::vector<std::pair<const char*, double>> values;
    std::optional<double> se;
    if (table_id == 2) {
      const auto q = separate_quotes(cfg, r);
      values = {{"domestic", q.domestic}, {"nominal", q.nominal}, {"effective", q.effective}, {"quanto", q.quanto}};
    } else {
      const auto variant = table_id == 3 ? BasketVariant::Effective : BasketVariant::Quanto;
      const auto q = aggregated_quotes(cfg, r, variant);
      values = {{"simulation", q.simulation.value}, {"geometric", q.geometric}, {"moments", q.moments}, {"super", q.super}};
      se = q.simulation.std_error;
    }
    if (format == OutputFormat::Csv) {
      out << kind_name(r.kind) << ',' << numbers[i] << ',' << fixed(r.w, 3) << ',' << fixed(r.l1, 3) << ','
          << fixed(r.g1, 3) << ',' << fixed(r.p_rate, 3) << ',' << fixed(r.f_rate, 3);
      for (const auto& [name, v] : values) out << ',' << fixed(100.0 * v, 3);
      out << '\n';
    } else {
      json j = row_json(r);
      j["row"] = numbers[i];
      for (const auto& [name, v] : values) j[name] = 100.0 * v;
      if (se) j["simulation_std_error"] = 100.0 * *se;
      rows.push_back(std::move(j));
    }
  }
  if (format == OutputFormat::Json) {
    json doc = {{"table", table_id}, {"per", "100-notional"}, {"rows", rows}};
    out << doc.dump(2) << '\n';
  }
  return out.str();
}

// ---- single quotes ----

enum class QuoteKind { Domestic, Nominal, Effective, Quanto, Aggregated };

inline QuoteKind parse_quote_kind(const std::string& s) {
  if (s == "domestic") return QuoteKind::Domestic;
  if (s == "nominal") return QuoteKind::Nominal;
  if (s == "effective") return QuoteKind::Effective;
  if (s == "quanto") return QuoteKind::Quanto;
  if (s == "aggregated") return QuoteKind::Aggregated;
  throw UsageError("unknown kind '" + s + "'");
}

inline std::string_view to_string(QuoteKind k) {
  switch (k) {
    case QuoteKind::Domestic: return "domestic";
    case QuoteKind::Nominal: return "nominal";
    case QuoteKind::Effective: return "effective";
    case QuoteKind::Quanto: return "quanto";
    case QuoteKind::Aggregated: return "aggregated";
  }
  return "unknown";
}

struct PriceRequest {
  std::size_t row = 1;  // 1-based index into the config rows
  QuoteKind kind = QuoteKind::Domestic;
  BasketVariant variant = BasketVariant::Effective;
  std::optional<BasketMethod> method;  // aggregated only; defaults to mc
};

struct PriceResult {
  double value;  // fraction of notional
  std::string method;
  std::optional<double> std_error;
  json inputs;
};

inline const EpsRow& pick_row(const RunConfig& cfg, std::size_t row) {
  if (row == 0 || row > cfg.rows.size()) {
    throw UsageError("row " + std::to_string(row) + " out of range (config has " + std::to_string(cfg.rows.size()) + " rows)");
  }
  return cfg.rows[row - 1];
}

inline json inputs_json(const RunConfig& cfg, const PriceRequest& req, const EpsRow& row) {
  json j = {{"row", req.row}, {"kind", to_string(req.kind)}, {"structure", row_json(row)},
            {"maturity", cfg.maturity}, {"notional", cfg.notional}};
  if (req.kind == QuoteKind::Aggregated) j["variant"] = to_string(req.variant);
  if (req.kind == QuoteKind::Quanto || (req.kind == QuoteKind::Aggregated && req.variant == BasketVariant::Quanto)) {
    j["q_bar"] = cfg.q_bar(row);
  }
  if (req.kind == QuoteKind::Aggregated && req.method.value_or(BasketMethod::MonteCarlo) == BasketMethod::MonteCarlo) {
    j["paths"] = cfg.mc.n_paths;
    j["seed"] = cfg.mc.seed;
    j["partitions"] = cfg.mc.partitions;
  }
  return j;
}

// Quote for a given structure; the row supplies the weight and q_bar.
inline EpsQuote quote_structure(const RunConfig& cfg, const PriceRequest& req, const EpsRow& row,
                                const EpsStructure& s) {
  const auto& m = cfg.market;
  const double T = cfg.maturity;
  if (req.kind != QuoteKind::Aggregated && req.method) {
    throw UsageError("--method applies only to aggregated quotes");
  }
  switch (req.kind) {
    case QuoteKind::Domestic: return price_eps_domestic(s, m, T);
    case QuoteKind::Nominal: {
      const EpsQuote aud{m.q0 * price_eps_nominal_foreign(s, m, T).value, ReturnKind::NominalForeign};
      return net_weighted_cost(row.w, price_eps_domestic(s, m, T), aud);
    }
    case QuoteKind::Effective:
      return net_weighted_cost(row.w, price_eps_domestic(s, m, T), price_eps_effective(s, m, T));
    case QuoteKind::Quanto:
      return net_weighted_cost(row.w, price_eps_domestic(s, m, T), price_eps_quanto(s, m, T, cfg.q_bar(row)));
    case QuoteKind::Aggregated:
      return price_eps_aggregated(s, req.variant, row.w, m, T, req.method.value_or(BasketMethod::MonteCarlo), cfg.mc);
  }
  throw UsageError("unknown kind");
}

inline PriceResult cmd_price(const RunConfig& cfg, const PriceRequest& req) {
  const auto& row = pick_row(cfg, req.row);
  const auto q = quote_structure(cfg, req, row, row.structure());
  const std::string method = req.kind == QuoteKind::Aggregated
                                 ? std::string(to_string(req.method.value_or(BasketMethod::MonteCarlo)))
                                 : "closed-form";
  return {q.value, method, q.std_error, inputs_json(cfg, req, row)};
}

inline json quote_json(double value, const std::string& method, std::optional<double> se, json inputs) {
  json j = {{"value", 100.0 * value}, {"per", "100-notional"}, {"method", method}};
  if (se) j["std_error"] = 100.0 * *se;
  j["inputs"] = std::move(inputs);
  return j;
}

inline std::string render_price(const PriceResult& r, const RunConfig& cfg, std::optional<OutputFormat> format) {
  std::ostringstream out;
  if (!format) {
    out << fixed(100.0 * r.value, 3) << " per 100";
    if (r.std_error) out << " (std error " << fixed(100.0 * *r.std_error, 3) << ")";
    out << '\n' << "AUD " << fixed(r.value * cfg.notional, 2) << " on notional " << fixed(cfg.notional, 0) << '\n';
  } else if (*format == OutputFormat::Csv) {
    out << "value,per,method,std_error,aud\n"
        << fixed(100.0 * r.value, 3) << ",100-notional," << r.method << ','
        << (r.std_error ? fixed(100.0 * *r.std_error, 3) : "") << ',' << fixed(r.value * cfg.notional, 2) << '\n';
  } else {
    out << quote_json(r.value, r.method, r.std_error, r.inputs).dump(2) << '\n';
  }
  return out.str();
}

// ---- hedge tickets ----

enum class HedgeStrategy { Replication, Superhedge, Approximate };

inline HedgeStrategy parse_strategy(const std::string& s) {
  if (s == "replication") return HedgeStrategy::Replication;
  if (s == "superhedge") return HedgeStrategy::Superhedge;
  if (s == "approximate") return HedgeStrategy::Approximate;
  throw UsageError("unknown strategy '" + s + "'");
}

struct TicketPosition {
  std::string instrument;  // put, call, gated put, gated call
  std::string underlying;
  std::string currency;
  double strike;
  double units;  // signed, negative = short
  std::string condition;  // indicator on the other asset, empty for vanillas
};

struct HedgeTicket {
  std::vector<TicketPosition> positions;
  std::vector<std::pair<std::string, double>> reference_levels;
  double premium = 0.0;  // AUD
  double premium_per_100 = 0.0;
  std::optional<double> std_error_per_100;
};

namespace detail {

struct LegSpec {
  std::string label;
  std::string currency;
  double level0;    // initial level of the underlying in its currency
  double notional;  // currency amount the normalized payoff is scaled by
};

inline void add_replication_leg(HedgeTicket& t, const EpsStructure& s, const LegSpec& leg) {
  for (const auto& h : replication_weights(s).positions) {
    t.positions.push_back({h.kind == OptionKind::Put ? "put" : "call", leg.label, leg.currency,
                           h.strike * leg.level0, h.quantity * leg.notional / leg.level0, ""});
  }
}

}  // namespace detail

struct HedgeRequest {
  std::size_t row = 1;
  QuoteKind kind = QuoteKind::Effective;
  BasketVariant variant = BasketVariant::Effective;
  HedgeStrategy strategy = HedgeStrategy::Replication;
  std::optional<BasketMethod> method;
};

inline HedgeTicket cmd_hedge(const RunConfig& cfg, const HedgeRequest& req) {
  const auto& row = pick_row(cfg, req.row);
  const auto s = row.structure();
  const auto& m = cfg.market;
  const double N = cfg.notional;
  const double w = row.w;
  const double q_bar = cfg.q_bar(row);
  HedgeTicket t;

  const detail::LegSpec dom_leg{"S_d", "AUD", m.s_d0, w * N};
  auto foreign_leg = [&](QuoteKind k) -> detail::LegSpec {
    switch (k) {
      case QuoteKind::Nominal: return {"S_f", "USD", m.s_f0, (1.0 - w) * N};
      case QuoteKind::Quanto: return {"S_f quanto", "USD", m.s_f0, (1.0 - w) * N};
      default: return {"S_fe", "AUD", m.s_fe0(), (1.0 - w) * N};
    }
  };

  if (req.strategy == HedgeStrategy::Replication) {
    PriceRequest pr{req.row, req.kind, req.variant, req.method};
    const auto q = quote_structure(cfg, pr, row, s);
    t.premium_per_100 = q.per_100();
    if (q.std_error) t.std_error_per_100 = 100.0 * *q.std_error;
    switch (req.kind) {
      case QuoteKind::Domestic:
        t.reference_levels = {{"S_d", m.s_d0}};
        detail::add_replication_leg(t, s, {"S_d", "AUD", m.s_d0, N});
        break;
      case QuoteKind::Nominal:
      case QuoteKind::Effective:
      case QuoteKind::Quanto: {
        const auto fl = foreign_leg(req.kind);
        t.reference_levels = {{"S_d", m.s_d0}, {fl.label, fl.level0}};
        detail::add_replication_leg(t, s, dom_leg);
        detail::add_replication_leg(t, s, fl);
        break;
      }
      case QuoteKind::Aggregated: {
        const bool eff = req.variant == BasketVariant::Effective;
        const double level0 = w * m.s_d0 + (1.0 - w) * (eff ? m.s_fe0() : q_bar * m.s_f0);
        const std::string label = eff ? "S_we" : "S_wq";
        t.reference_levels = {{label, level0}};
        detail::add_replication_leg(t, s, {label, "AUD", level0, N});
        break;
      }
    }
  } else {
    if (req.kind != QuoteKind::Aggregated) {
      throw UsageError("superhedge and approximate strategies apply to aggregated EPSs (use --kind aggregated)");
    }
    if (req.method) throw UsageError("--method does not apply to superhedge or approximate tickets");
    const bool eff = req.variant == BasketVariant::Effective;
    // Foreign legs sit on the normalized foreign asset; quanto options pay q_bar per USD.
    const detail::LegSpec fl = eff ? detail::LegSpec{"S_fe", "AUD", m.s_fe0(), (1.0 - w) * N}
                                   : detail::LegSpec{"S_f quanto", "USD", m.s_f0, (1.0 - w) * N / q_bar};
    t.reference_levels = {{"S_d", m.s_d0}, {fl.label, fl.level0}};
    if (req.strategy == HedgeStrategy::Approximate) {
      t.premium_per_100 = 100.0 * approx_hedge_cost(req.variant, w, s, m, cfg.maturity);
      detail::add_replication_leg(t, s, dom_leg);
      detail::add_replication_leg(t, s, fl);
    } else {
      const SimpleTerms terms = classify(s);
      t.premium_per_100 = 100.0 * superhedge_cost(s, req.variant, w, m, cfg.maturity).value;
      const bool gated = w > 0.0 && w < 1.0;
      for (int i = 0; i < 2; ++i) {
        const auto& leg = i == 0 ? dom_leg : fl;
        const auto& other = i == 0 ? fl : dom_leg;
        auto add = [&](const char* instrument, double level, double rate, bool gate, const char* op) {
          std::string cond;
          if (gate && gated) cond = other.label + " " + op + " " + fixed(level * other.level0, 3) + " " + other.currency;
          t.positions.push_back({gate && gated ? std::string("gated ") + instrument : instrument, leg.label,
                                 leg.currency, level * leg.level0, rate * leg.notional / leg.level0, cond});
        };
        const double kl = 1.0 + terms.l1;
        const double kg = 1.0 + terms.g1;
        if (terms.kind == StructureKind::Buffer) {
          add("put", kl, terms.p, false, "");
        } else {
          add("put", 1.0, terms.p, false, "");
          add("put", kl, -terms.p, true, "<=");
        }
        add("call", kg, -terms.f2, true, ">=");
      }
    }
  }
  t.premium = t.premium_per_100 / 100.0 * N;
  if (N == 0.0) t.positions.clear();
  std::erase_if(t.positions, [](const TicketPosition& p) { return p.units == 0.0; });
  return t;
}

inline double display_units(double units) { return std::nearbyint(units); }

inline std::string render_ticket(const HedgeTicket& t, std::optional<OutputFormat> format) {
  std::ostringstream out;
  if (format && *format == OutputFormat::Json) {
    json positions = json::array();
    for (const auto& p : t.positions) {
      json j = {{"instrument", p.instrument}, {"underlying", p.underlying}, {"currency", p.currency},
                {"strike", p.strike}, {"units", p.units}};
      if (!p.condition.empty()) j["condition"] = p.condition;
      positions.push_back(std::move(j));
    }
    json levels = json::object();
    for (const auto& [k, v] : t.reference_levels) levels[k] = v;
    json doc = {{"positions", positions}, {"initial_levels", levels}, {"premium_aud", t.premium},
                {"premium", {{"value", t.premium_per_100}, {"per", "100-notional"}}}};
    if (t.std_error_per_100) doc["premium"]["std_error"] = *t.std_error_per_100;
    out << doc.dump(2) << '\n';
    return out.str();
  }
  if (format && *format == OutputFormat::Csv) {
    out << "side,instrument,underlying,currency,strike,units,condition\n";
    for (const auto& p : t.positions) {
      out << (p.units < 0 ? "short" : "long") << ',' << p.instrument << ',' << p.underlying << ',' << p.currency
          << ',' << fixed(p.strike, 3) << ',' << fixed(display_units(std::abs(p.units)), 0) << ',' << p.condition
          << '\n';
    }
    return out.str();
  }
  for (const auto& [k, v] : t.reference_levels) out << k << "(0) = " << fixed(v, 3) << '\n';
  for (const auto& p : t.positions) {
    out << (p.units < 0 ? "short " : "long  ") << fixed(display_units(std::abs(p.units)), 0) << ' ' << p.instrument
        << " on " << p.underlying << " strike " << fixed(p.strike, 3) << ' ' << p.currency;
    if (!p.condition.empty()) out << " if " << p.condition;
    out << '\n';
  }
  out << "premium " << fixed(t.premium_per_100, 3) << " per 100";
  if (t.std_error_per_100) out << " (std error " << fixed(*t.std_error_per_100, 3) << ")";
  out << ", AUD " << fixed(t.premium, 2) << '\n';
  return out.str();
}

// ---- fair fee ----

struct FairFeeResult {
  double fee;
  double repriced;  // fraction of notional, zero up to rounding
  std::string method;
  json inputs;
};

inline FairFeeResult cmd_fair_fee(const RunConfig& cfg, const PriceRequest& req) {
  const auto& row = pick_row(cfg, req.row);
  const auto pricer = [&](const EpsStructure& s) { return quote_structure(cfg, req, row, s).value; };
  const auto s = row.structure();
  const double fee = fair_fee(s, pricer);
  const double repriced = pricer(s.with_fee_rate(1, fee));
  if (!(std::abs(repriced) < 1e-10)) {
    throw NumericError("repricing at the solved fee left a residual of " + full_precision(repriced));
  }
  const std::string method = req.kind == QuoteKind::Aggregated
                                 ? std::string(to_string(req.method.value_or(BasketMethod::MonteCarlo)))
                                 : "closed-form";
  return {fee, repriced, method, inputs_json(cfg, req, row)};
}

inline std::string render_fair_fee(const FairFeeResult& r, std::optional<OutputFormat> format) {
  std::ostringstream out;
  if (!format) {
    out << "fair fee rate " << fixed(r.fee, 6) << '\n' << "repriced " << fixed(100.0 * r.repriced, 3) << " per 100\n";
  } else if (*format == OutputFormat::Csv) {
    out << "fee,repriced,per,method\n" << full_precision(r.fee) << ',' << fixed(100.0 * r.repriced, 3)
        << ",100-notional," << r.method << '\n';
  } else {
    json j = quote_json(r.repriced, r.method, std::nullopt, r.inputs);
    j["fee"] = r.fee;
    out << j.dump(2) << '\n';
  }
  return out.str();
}

// ---- paths ----

inline std::string cmd_paths(const RunConfig& cfg, std::size_t steps, std::size_t n_paths, std::uint64_t seed) {
  if (steps == 0 || n_paths == 0) throw UsageError("steps and paths must be at least 1");
  std::ostringstream out;
  out << "path,t,s_d,s_f,q,s_fe\n";
  for (std::size_t p = 0; p < n_paths; ++p) {
    const auto g = simulate_path(cfg.market, cfg.maturity, steps, GaussianStream{seed, p});
    for (std::size_t i = 0; i < g.t.size(); ++i) {
      out << p << ',' << full_precision(g.t[i]) << ',' << full_precision(g.s_d[i]) << ','
          << full_precision(g.s_f[i]) << ',' << full_precision(g.q[i]) << ',' << full_precision(g.s_fe[i]) << '\n';
    }
  }
  return out.str();
}

}  // namespace eps::cli
