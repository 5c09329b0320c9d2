#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "uwoc/ber.hpp"
#include "uwoc/config.hpp"
#include "uwoc/error.hpp"

using namespace uwoc;
using namespace uwoc::config;

namespace {

const char* kMinimal = R"({"distance_m": 22.5, "data_rate_bps": 1e9})";

std::string config_error_message(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config fills the defaults") {
  const auto cfg = parse_config_text(kMinimal);
  CHECK(cfg.distances_m == std::vector<double>{22.5});
  CHECK(cfg.relays == std::vector<int>{0});
  CHECK(cfg.data_rates_bps == std::vector<double>{1e9});
  CHECK(cfg.ghq_order == 30);
  CHECK(cfg.power_shares.empty());
  CHECK(cfg.methods == std::vector<std::string>{"awgn_ghqf"});
  CHECK(cfg.water.preset == "coastal");
  CHECK(cfg.water.properties == channel::WaterProperties::preset("coastal"));
  CHECK(cfg.noise.quantum_efficiency == 0.8);
  CHECK(cfg.noise.temperature_k == 290.0);
  CHECK(cfg.noise.load_resistance_ohm == 100.0);
  CHECK(cfg.noise.dark_current_a == 1.226e-9);
  CHECK(cfg.noise.background_rate_per_s == 1.8094e8);
  CHECK_FALSE(cfg.turbulence.explicit_sigma());
  CHECK(cfg.tail_epsilon == 1e-6);
  CHECK(cfg.resolved_bin_width() == doctest::Approx(1e-10));
  CHECK(cfg.hop_sets() == std::vector<std::vector<double>>{{22.5}});
}

TEST_CASE("dark current converts to a photoelectron rate") {
  // I_d / q, about 7.65e9 photoelectrons per second.
  CHECK(ber::NoiseModel::dark_rate_from_current(1.226e-9) ==
        doctest::Approx(1.226e-9 / 1.602e-19).epsilon(1e-3));
}

TEST_CASE("relay counts expand into equal hops") {
  const auto cfg =
      parse_config_text(R"({"distances_m": [30, 45], "relays": [0, 2], "data_rate_bps": 1e9})");
  const auto sets = cfg.hop_sets();
  REQUIRE(sets.size() == 4);
  CHECK(sets[0] == std::vector<double>{30.0});
  CHECK(sets[1] == std::vector<double>{10.0, 10.0, 10.0});
  CHECK(sets[3] == std::vector<double>{15.0, 15.0, 15.0});
}

TEST_CASE("explicit hop lengths") {
  const auto one = parse_config_text(R"({"hop_lengths_m": [10, 15, 20], "data_rate_bps": 1e9,
                                          "power_shares": [0.2, 0.3, 0.5]})");
  CHECK(one.hop_sets() == std::vector<std::vector<double>>{{10.0, 15.0, 20.0}});
  const auto many =
      parse_config_text(R"({"hop_lengths_m": [[10, 20], [5, 25]], "data_rate_bps": 1e9})");
  CHECK(many.hop_sets().size() == 2);
  CHECK(config_error_message(R"({"hop_lengths_m": [10, 20], "data_rate_bps": 1e9,
                                  "power_shares": [0.2, 0.3, 0.5]})")
            .find("power_shares") != std::string::npos);
}

TEST_CASE("a non-positive sweep step names the field") {
  for (const char* step : {"0", "-1"}) {
    const auto msg = config_error_message(std::string(R"({"distance_m": 22.5, "data_rate_bps": 1e9,
        "power_sweep": {"start_dbm": 0, "stop_dbm": 10, "step_db": )") + step + "}}");
    CHECK(msg.find("power_sweep.step") != std::string::npos);
  }
}

TEST_CASE("every problem is reported at once") {
  const auto msg = config_error_message(R"({"distance_m": -1, "data_rate_bps": 0,
      "ghq_order": 100, "methods": ["awgn_ghqf", "magic"], "power_shares": [0.7, 0.7]})");
  for (const char* field : {"distance_m", "data_rate_bps", "ghq_order", "methods", "power_shares"})
    CHECK(msg.find(field) != std::string::npos);
}

TEST_CASE("unknown fields and wrong types are rejected") {
  CHECK(config_error_message(R"({"distance_m": 22.5, "data_rate_bps": 1e9, "colour": "blue"})")
            .find("colour: unknown field") != std::string::npos);
  CHECK(config_error_message(R"({"distance_m": 22.5, "data_rate_bps": 1e9, "noise": {"gain": 2}})")
            .find("noise.gain: unknown field") != std::string::npos);
  CHECK(config_error_message(R"({"distance_m": "far", "data_rate_bps": 1e9})")
            .find("distance_m") != std::string::npos);
  CHECK(config_error_message(R"({"distance_m": 22.5, "data_rate_bps": 1e9, "mc": {"seed": -4}})")
            .find("mc.seed") != std::string::npos);
  CHECK(config_error_message(R"({"distance_m": 22.5, "data_rate_bps": 1e9, "water": "lake"})")
            .find("water") != std::string::npos);
  CHECK(config_error_message("[1, 2]").find("object") != std::string::npos);
}

TEST_CASE("parse errors carry a line and column") {
  const auto msg = config_error_message("{\n  \"distance_m\": 22.5,\n  \"data_rate_bps\": ,\n}");
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("column") != std::string::npos);
}

TEST_CASE("canonical JSON round trips") {
  const auto cfg = parse_config_text(R"({
      "water": {"absorption_per_m": 0.1, "scattering_per_m": 0.2},
      "distances_m": [11.25, 22.5], "relays": [0, 1, 3],
      "turbulence": {"sigma_x_sq": 0.1},
      "data_rates_bps": [1e8, 1e9],
      "power_sweep": {"start_dbm": -5, "stop_dbm": 5, "step_db": 0.5},
      "methods": ["gaussian", "saddle_point", "montecarlo"],
      "ghq_order": 20, "bin_width_s": 2e-11, "detector": "photon_counting",
      "mc": {"n_photons": 12345, "n_bits": 999, "seed": 18446744073709551615}})");
  CHECK(cfg.water.preset.empty());
  CHECK(cfg.mc.seed == 18446744073709551615ULL);
  const auto again = parse_config(to_json(cfg));
  CHECK(again == cfg);
  CHECK(config_hash(again) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);

  auto other = cfg;
  other.ghq_order = 21;
  CHECK(config_hash(other) != config_hash(cfg));

  const auto minimal = parse_config_text(kMinimal);
  CHECK(parse_config(to_json(minimal)) == minimal);
}

TEST_CASE("power sweep points include the stop value") {
  PowerSweep s{-10.0, 10.0, 2.5};
  const auto p = s.points();
  REQUIRE(p.size() == 9);
  CHECK(p.front() == -10.0);
  CHECK(p.back() == 10.0);
  s = {0.0, 1.0, 0.1};
  CHECK(s.points().size() == 11);
}

TEST_CASE("config files") {
  const auto dir = std::filesystem::temp_directory_path() / "uwoc_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ok.json";
  {
    std::ofstream out(path);
    out << kMinimal;
  }
  CHECK(load_config(path) == parse_config_text(kMinimal));
  CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);

  const auto bad = dir / "bad.json";
  {
    std::ofstream out(bad);
    out << R"({"distance_m": 22.5})";
  }
  try {
    load_config(bad);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad.json") != std::string::npos);
    CHECK(msg.find("data_rate_bps") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
