#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uwoc/ber.hpp"
#include "uwoc/channel.hpp"
#include "uwoc/config.hpp"
#include "uwoc/error.hpp"
#include "uwoc/relay.hpp"
#include "uwoc/simulate.hpp"
#include "uwoc/sweep.hpp"
#include "uwoc/turbulence.hpp"

namespace py = pybind11;
using namespace uwoc;

namespace {

ber::HopBerInputs hop_inputs(double signal, std::vector<double> isi, double sigma_x_sq,
                             double power_dbm, double data_rate, double wavelength,
                             double quantum_efficiency) {
  ber::HopBerInputs in;
  in.energies.signal = signal;
  in.energies.isi = std::move(isi);
  in.fading = turbulence::FadingModel(sigma_x_sq);
  in.noise = ber::NoiseModel::reference(1.0 / data_rate);
  in.scale = ber::CountScale::from_power(1e-3 * std::pow(10.0, power_dbm / 10.0), 1.0 / data_rate,
                                         wavelength, quantum_efficiency);
  return in;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-hop underwater optical link BER simulation";
  m.attr("__version__") = UWOC_VERSION;

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<channel::WaterProperties>(m, "WaterProperties")
      .def(py::init<>())
      .def(py::init([](double a, double b, double g, double n) {
             channel::WaterProperties w{a, b, g, n};
             w.validate();
             return w;
           }),
           py::arg("absorption"), py::arg("scattering"), py::arg("hg_asymmetry") = 0.924,
           py::arg("refractive_index") = 1.331)
      .def_static("preset", &channel::WaterProperties::preset, py::arg("name"))
      .def_readwrite("absorption", &channel::WaterProperties::absorption)
      .def_readwrite("scattering", &channel::WaterProperties::scattering)
      .def_readwrite("hg_asymmetry", &channel::WaterProperties::hg_asymmetry)
      .def_readwrite("refractive_index", &channel::WaterProperties::refractive_index)
      .def_property_readonly("extinction", &channel::WaterProperties::extinction)
      .def_property_readonly("albedo", &channel::WaterProperties::albedo);

  py::class_<channel::LinkGeometry>(m, "LinkGeometry")
      .def(py::init<>())
      .def_readwrite("distance", &channel::LinkGeometry::distance)
      .def_readwrite("aperture_diameter", &channel::LinkGeometry::aperture_diameter)
      .def_readwrite("fov_half_angle_deg", &channel::LinkGeometry::fov_half_angle_deg)
      .def_readwrite("beam_divergence_deg", &channel::LinkGeometry::beam_divergence_deg)
      .def_readwrite("wavelength", &channel::LinkGeometry::wavelength);

  m.def(
      "impulse_response",
      [](double distance, const channel::WaterProperties& water, std::uint64_t n_photons,
         double bin_width, std::uint64_t seed, unsigned threads,
         std::optional<channel::LinkGeometry> geometry) {
        channel::LinkGeometry g = geometry.value_or(channel::LinkGeometry{});
        g.distance = distance;
        channel::TraceOptions o;
        o.n_photons = n_photons;
        o.bin_width = bin_width;
        o.seed = seed;
        o.threads = threads;
        channel::ImpulseResponse ir;
        {
          py::gil_scoped_release release;
          ir = channel::simulate_impulse_response(g, water, o);
        }
        py::dict out;
        out["bin_width"] = ir.bin_width;
        out["t_start"] = ir.t_start;
        out["energy_fraction"] = ir.energy_fraction;
        out["total"] = ir.total();
        out["standard_error"] = ir.standard_error;
        out["n_photons"] = ir.n_photons;
        return out;
      },
      py::arg("distance"), py::arg("water") = channel::WaterProperties{},
      py::arg("n_photons") = 1'000'000, py::arg("bin_width") = 1e-10, py::arg("seed") = 1,
      py::arg("threads") = 1, py::arg("geometry") = py::none(),
      "Monte Carlo impulse response of one hop.");

  m.def(
      "bit_frame_energies",
      [](std::vector<double> energy_fraction, double bin_width, double bit_duration,
         double tail_epsilon) {
        channel::ImpulseResponse ir;
        ir.bin_width = bin_width;
        ir.energy_fraction = std::move(energy_fraction);
        const auto e = channel::bit_frame_energies(ir, bit_duration, tail_epsilon);
        py::dict out;
        out["signal"] = e.signal;
        out["isi"] = e.isi;
        out["truncated"] = e.truncated;
        return out;
      },
      py::arg("energy_fraction"), py::arg("bin_width"), py::arg("bit_duration"),
      py::arg("tail_epsilon") = 1e-6);

  m.def(
      "scintillation_index",
      [](double distance, double chi_t, double epsilon, double w, double wavelength) {
        turbulence::TurbulenceParams p;
        p.distance = distance;
        p.chi_t = chi_t;
        p.epsilon = epsilon;
        p.w = w;
        p.wavelength = wavelength;
        return turbulence::scintillation_index_plane_wave(p);
      },
      py::arg("distance"), py::arg("chi_t") = 2e-7, py::arg("epsilon") = 1.5e-5,
      py::arg("w") = -2.5, py::arg("wavelength") = 532e-9);
  m.def("sigma_x_sq_from_si", &turbulence::sigma_x_sq_from_si, py::arg("si"));

  m.def(
      "ghq_rule",
      [](int order) {
        const auto r = turbulence::ghq_rule(order);
        return py::make_tuple(r.nodes, r.weights);
      },
      py::arg("order"));

  m.def("q_function", &ber::q_function, py::arg("x"));
  m.def("gaussian_ber", &ber::gaussian_ber, py::arg("m0"), py::arg("m1"), py::arg("sigma_th_sq"));
  m.def(
      "saddle_point_ber",
      [](double m0, double m1, double var) {
        const auto s = ber::saddle_point_ber(m0, m1, var);
        py::dict out;
        out["ber"] = s.ber;
        out["s0"] = s.s0;
        out["s1"] = s.s1;
        out["beta"] = s.beta;
        return out;
      },
      py::arg("m0"), py::arg("m1"), py::arg("sigma_th_sq"));

  m.def(
      "hop_ber",
      [](double signal, std::vector<double> isi, double sigma_x_sq, double power_dbm,
         double data_rate, const std::string& method, int ghq_order, double wavelength,
         double quantum_efficiency) {
        const auto in = hop_inputs(signal, std::move(isi), sigma_x_sq, power_dbm, data_rate,
                                   wavelength, quantum_efficiency);
        return ber::hop_average_ber(in, ber::method_from_string(method), turbulence::ghq_rule(ghq_order))
            .ber;
      },
      py::arg("signal"), py::arg("isi"), py::arg("sigma_x_sq"), py::arg("power_dbm"),
      py::arg("data_rate") = 1e9, py::arg("method") = "awgn_ghqf", py::arg("ghq_order") = 30,
      py::arg("wavelength") = 532e-9, py::arg("quantum_efficiency") = 0.8,
      "Average BER of one hop with the reference receiver noise.");

  m.def(
      "simulate_hop",
      [](double signal, std::vector<double> isi, double sigma_x_sq, double power_dbm,
         double data_rate, std::uint64_t n_bits, std::uint64_t seed, const std::string& detector,
         double wavelength, double quantum_efficiency) {
        const std::vector<ber::HopBerInputs> hops{hop_inputs(
            signal, std::move(isi), sigma_x_sq, power_dbm, data_rate, wavelength, quantum_efficiency)};
        simulate::SimOptions o;
        o.n_bits = n_bits;
        o.seed = seed;
        if (detector == "awgn") o.detector = simulate::Detector::awgn;
        else if (detector == "photon_counting") o.detector = simulate::Detector::photon_counting;
        else throw std::invalid_argument("detector must be 'awgn' or 'photon_counting'");
        simulate::SimResult r;
        {
          py::gil_scoped_release release;
          r = simulate::run_bit_simulation(hops, o);
        }
        py::dict out;
        out["n_bits"] = r.n_bits;
        out["n_errors"] = r.n_errors;
        out["ber_hat"] = r.ber_hat;
        out["ci95_low"] = r.ci95_low;
        out["ci95_high"] = r.ci95_high;
        out["seed"] = r.seed;
        return out;
      },
      py::arg("signal"), py::arg("isi"), py::arg("sigma_x_sq"), py::arg("power_dbm"),
      py::arg("data_rate") = 1e9, py::arg("n_bits") = 100'000, py::arg("seed") = 1,
      py::arg("detector") = "awgn", py::arg("wavelength") = 532e-9,
      py::arg("quantum_efficiency") = 0.8);

  m.def("e2e_ber_exact", [](std::vector<double> p) { return relay::e2e_ber_exact(p); },
        py::arg("hop_bers"));
  m.def("e2e_ber_upper", [](std::vector<double> p) { return relay::e2e_ber_upper(p); },
        py::arg("hop_bers"));

  m.def(
      "validate_config",
      [](const std::string& text) {
        return config::to_json(config::parse_config_text(text)).dump();
      },
      py::arg("config_json"), "Canonical JSON of a run configuration; raises ValueError.");
  m.def(
      "run_config",
      [](const std::string& text, unsigned threads) {
        const auto cfg = config::parse_config_text(text);
        sweep::SweepOptions o;
        o.threads = threads;
        std::vector<sweep::BerCurve> curves;
        {
          py::gil_scoped_release release;
          curves = sweep::run_sweep(cfg, o).curves;
        }
        return sweep::report_json(curves, cfg).dump();
      },
      py::arg("config_json"), py::arg("threads") = 1,
      "Runs every configured sweep and returns the JSON report.");
}
