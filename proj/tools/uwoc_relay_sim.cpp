#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "uwoc/error.hpp"
#include "uwoc/parallel.hpp"
#include "uwoc/sweep.hpp"
#include "uwoc/turbulence.hpp"

namespace {

enum Exit { ok = 0, config_error = 1, numerical_error = 2, io_error = 3 };

using uwoc::config::RunConfig;

std::string length_tag(double length) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", length);
  return buf;
}

int cmd_validate(const RunConfig& cfg) {
  nlohmann::json out;
  out["config"] = uwoc::config::to_json(cfg);
  out["config_hash"] = uwoc::config::config_hash(cfg);
  out["bin_width_s"] = cfg.resolved_bin_width();
  out["power_points"] = cfg.power_sweep.points().size();
  out["hop_sets"] = cfg.hop_sets();
  std::cout << out.dump(2) << "\n";
  return ok;
}

int cmd_channel(const RunConfig& cfg, const std::filesystem::path& out_dir, unsigned threads) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw uwoc::IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  std::vector<double> lengths;
  for (const auto& set : cfg.hop_sets())
    for (double l : set)
      if (std::find(lengths.begin(), lengths.end(), l) == lengths.end()) lengths.push_back(l);

  for (double length : lengths) {
    const auto ir = uwoc::sweep::hop_impulse_response(cfg, length, threads);
    const auto path = out_dir / ("impulse_response_" + length_tag(length) + "m.csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw uwoc::IoError("cannot open '" + path.string() + "' for writing");
    uwoc::channel::write_csv(out, ir);
    out.flush();
    if (!out) throw uwoc::IoError("failed writing '" + path.string() + "'");
    spdlog::info("{} m: received fraction {:.6g} (se {:.3g}), {} bins -> {}", length, ir.total(),
                 ir.standard_error, ir.energy_fraction.size(), path.string());
    std::cout << path.string() << "\n";
  }
  return ok;
}

int cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir, const std::string& format,
            unsigned threads) {
  uwoc::sweep::SweepOptions options;
  options.threads = threads;
  const auto result = uwoc::sweep::run_sweep(cfg, options);
  const auto files = uwoc::sweep::emit_curves(
      result.curves, format == "json" ? uwoc::sweep::Format::json : uwoc::sweep::Format::csv,
      out_dir, cfg);
  for (const auto& f : files) std::cout << f.string() << "\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("uwoc");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  spdlog::cfg::load_env_levels();  // SPDLOG_LEVEL
  if (const char* level = std::getenv("UWOC_LOG_LEVEL"))
    spdlog::set_level(spdlog::level::from_str(level));

  CLI::App app{"Multi-hop underwater optical link BER simulator", "uwoc-relay-sim"};
  app.set_version_flag("--version", std::string(UWOC_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  std::uint64_t seed = 0;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Compute BER curves for every configured sweep");
  run->add_option("--config", config_path, "JSON run configuration")->required();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  auto* seed_opt = run->add_option("--seed", seed, "Override mc.seed");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  auto* channel = app.add_subcommand("channel", "Write hop impulse responses only");
  channel->add_option("--config", config_path, "JSON run configuration")->required();
  channel->add_option("--out", out_dir, "Output directory")->capture_default_str();
  channel->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Check a configuration and print it resolved");
  validate->add_option("--config", config_path, "JSON run configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    RunConfig cfg = uwoc::config::load_config(config_path);
    if (*seed_opt) {
      cfg.mc.seed = seed;
      if (const auto errors = uwoc::config::validate(cfg); !errors.empty())
        throw uwoc::ConfigError(errors.front());
    }
    if (*validate) return cmd_validate(cfg);
    if (*channel) return cmd_channel(cfg, out_dir, threads);
    return cmd_run(cfg, out_dir, format, threads);
  } catch (const uwoc::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return config_error;
  } catch (const uwoc::IoError& e) {
    spdlog::error("I/O error: {}", e.what());
    return io_error;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("I/O error: {}", e.what());
    return io_error;
  } catch (const uwoc::NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return numerical_error;
  } catch (const std::exception& e) {
    spdlog::error("numerical failure: {}", e.what());
    return numerical_error;
  }
}
