#pragma once

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eps/cli/commands.hpp"
#include "eps/cli/config.hpp"

namespace eps::cli {

enum ExitCode : int { Ok = 0, ModelFailure = 1, UsageFailure = 2 };

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> method;
  std::optional<std::string> variant;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> workers;
};

inline BasketMethod parse_method(const std::string& s) {
  if (s == "geometric") return BasketMethod::Geometric;
  if (s == "moments") return BasketMethod::Moments;
  if (s == "mc") return BasketMethod::MonteCarlo;
  throw UsageError("unknown method '" + s + "'");
}

inline BasketVariant parse_variant(const std::string& s) {
  if (s == "effective") return BasketVariant::Effective;
  if (s == "quanto") return BasketVariant::Quanto;
  throw UsageError("unknown variant '" + s + "'");
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw UsageError("unknown format '" + s + "'");
}

inline RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg = g.config_path.empty() ? default_config() : load_config(g.config_path);
  if (g.seed) cfg.mc.seed = *g.seed;
  if (g.paths) {
    if (*g.paths == 0) throw UsageError("--paths must be positive");
    cfg.mc.n_paths = *g.paths;
  }
  if (g.workers) cfg.mc.workers = *g.workers;
  if (g.out) cfg.output_path = *g.out;
  if (g.format) cfg.format = parse_format(*g.format);
  return cfg;
}

inline void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (!cfg.output_path) {
    out << text;
    return;
  }
  std::ofstream f(*cfg.output_path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write output file '" + *cfg.output_path + "'");
  f << text;
  if (!f.flush()) throw ConfigError("failed writing output file '" + *cfg.output_path + "'");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Pricing and hedging of cross-currency equity protection swaps"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "Run configuration file (default: built-in market and table rows)");
  app.add_option("--seed", g.seed, "Monte Carlo seed");
  app.add_option("--paths", g.paths, "Number of simulated paths");
  app.add_option("--method", g.method, "Basket pricer for aggregated EPSs")
      ->check(CLI::IsMember({"geometric", "moments", "mc"}));
  app.add_option("--variant", g.variant, "Foreign leg of aggregated EPSs")->check(CLI::IsMember({"effective", "quanto"}));
  app.add_option("--out", g.out, "Write output to this file instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", g.workers, "Monte Carlo worker threads (0 = all cores)");

  int table_id = 0;
  auto* tables = app.add_subcommand("tables", "Reproduce the separate (2), aggregated effective (3) or quanto (4) tables");
  tables->add_option("table,--table", table_id, "Table id")->required();

  std::size_t row = 1;
  std::string kind = "domestic";
  std::string strategy = "replication";
  auto* price = app.add_subcommand("price", "Price one EPS row");
  auto* hedge = app.add_subcommand("hedge", "Build a hedge ticket for one EPS row");
  auto* fee = app.add_subcommand("fair-fee", "Solve the fee rate that makes the premium zero");
  for (auto* sub : {price, hedge, fee}) {
    sub->add_option("--row", row, "1-based row of the config")->capture_default_str();
    sub->add_option("--kind", kind, "domestic, nominal, effective, quanto or aggregated")
        ->check(CLI::IsMember({"domestic", "nominal", "effective", "quanto", "aggregated"}))
        ->capture_default_str();
  }
  hedge->add_option("--strategy", strategy, "replication, superhedge or approximate")
      ->check(CLI::IsMember({"replication", "superhedge", "approximate"}))
      ->capture_default_str();

  std::size_t steps = 252;
  auto* paths = app.add_subcommand("paths", "Dump simulated paths of (S_d, S_f, Q, S_fe) as CSV");
  paths->add_option("--steps", steps, "Time steps per path")->capture_default_str();

  for (auto* sub : {tables, price, hedge, fee, paths}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return UsageFailure;
  }

  try {
    RunConfig cfg = resolve_config(g);
    const std::optional<BasketMethod> method = g.method ? std::optional(parse_method(*g.method)) : std::nullopt;
    const BasketVariant variant = parse_variant(g.variant.value_or("effective"));

    if (tables->parsed()) {
      emit(cfg, cmd_tables(table_id, cfg, cfg.format.value_or(OutputFormat::Csv)), out);
    } else if (price->parsed()) {
      const PriceRequest req{row, parse_quote_kind(kind), variant, method};
      emit(cfg, render_price(cmd_price(cfg, req), cfg, cfg.format), out);
    } else if (hedge->parsed()) {
      const HedgeRequest req{row, parse_quote_kind(kind), variant, parse_strategy(strategy), method};
      emit(cfg, render_ticket(cmd_hedge(cfg, req), cfg.format), out);
    } else if (fee->parsed()) {
      const PriceRequest req{row, parse_quote_kind(kind), variant, method};
      emit(cfg, render_fair_fee(cmd_fair_fee(cfg, req), cfg.format), out);
    } else if (paths->parsed()) {
      if (cfg.format == OutputFormat::Json) throw UsageError("paths are written as CSV only");
      const std::size_t n = g.paths.value_or(1);
      emit(cfg, cmd_paths(cfg, steps, n, cfg.mc.seed), out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return UsageFailure;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return UsageFailure;
  } catch (const InvalidInput& e) {
    err << "model error: " << e.what() << '\n';
    return ModelFailure;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return ModelFailure;
  }
  return Ok;
}

}  // namespace eps::cli
