#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "qkdnet/error.hpp"
#include "qkdnet/mac.hpp"
#include "qkdnet/network.hpp"
#include "qkdnet/oracles.hpp"
#include "qkdnet/protocol.hpp"
#include "qkdnet/rng.hpp"
#include "qkdnet/sim.hpp"

namespace py = pybind11;

namespace {

qkdnet::SecurityParams make_params(std::size_t n, unsigned w, std::size_t m,
                                   std::size_t ell, double eps) {
  qkdnet::SecurityParams p;
  p.n = n;
  p.w = w;
  p.m = m;
  p.ell = ell;
  p.epsilon = eps;
  return p;
}

std::vector<qkdnet::BitString> to_bits(const std::vector<std::string>& texts) {
  std::vector<qkdnet::BitString> out;
  for (const auto& t : texts) out.push_back(qkdnet::BitString::from_string(t));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multipath QKD network key agreement simulator";

  static py::exception<qkdnet::Error> error(m, "QkdnetError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const qkdnet::Error& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      exc.attr("kind") = qkdnet::to_string(e.kind());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("xor_combine", [](const std::vector<std::string>& shares) {
    return qkdnet::xor_combine(to_bits(shares)).to_string();
  });
  m.def("inner_product", [](const std::string& a, const std::string& b) {
    return qkdnet::inner_product(qkdnet::BitString::from_string(a),
                                 qkdnet::BitString::from_string(b));
  });
  m.def("tag", [](unsigned w, const std::string& key, const std::string& message) {
    return qkdnet::tag(qkdnet::MacParams{w}, qkdnet::MacKey{qkdnet::BitString::from_string(key)},
                       qkdnet::BitString::from_string(message))
        .value.to_string();
  }, py::arg("w"), py::arg("key"), py::arg("message"));
  m.def("impersonation_bound", [](unsigned w, std::size_t bits) {
    return qkdnet::impersonation_bound(qkdnet::MacParams{w}, bits);
  }, py::arg("w"), py::arg("message_bits"));
  m.def("reduction_polynomial", &qkdnet::reduction_polynomial);

  m.def("check_bounds",
        [](std::size_t n, unsigned w, std::size_t m_, std::size_t ell, double eps) {
          const auto p = make_params(n, w, m_, ell, eps);
          p.validate();
          const double p_im = qkdnet::session_impersonation_bound(p);
          const auto b = qkdnet::check_bounds(p, p_im);
          py::dict d;
          d["challenge_bits"] = p.challenge_bits();
          d["p_im"] = p_im;
          d["agreement"] = b.agreement;
          d["privacy"] = b.privacy;
          return d;
        },
        py::arg("n"), py::arg("w"), py::arg("m"), py::arg("ell"), py::arg("eps") = 0.0);

  m.def("required_paths", [](std::size_t t, std::size_t u, const std::string& mode) {
    const auto parsed = qkdnet::parse_transmission_mode(mode);
    if (!parsed) {
      throw qkdnet::Error(qkdnet::ErrorKind::kParseError, "unknown mode " + mode);
    }
    return qkdnet::required_paths(t, u, *parsed);
  }, py::arg("t"), py::arg("u") = 0, py::arg("mode") = "two_way");

  m.def("deterministic_pa", [](const std::string& key, const std::vector<std::string>& lambdas) {
    const auto r = qkdnet::deterministic_pa(qkdnet::BitString::from_string(key), to_bits(lambdas));
    return py::make_tuple(r.key.to_string(), r.trash);
  });

  m.def("paths", [](const std::filesystem::path& scenario, std::optional<std::size_t> ell) {
    return qkdnet::load_scenario(scenario, ell).paths.paths;
  }, py::arg("scenario"), py::arg("ell") = std::nullopt);

  m.def("run",
        [](const std::filesystem::path& scenario, std::optional<std::size_t> trials,
           std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out) {
          qkdnet::Scenario sc = qkdnet::load_scenario(scenario);
          if (trials) sc.trials = *trials;
          if (seed) sc.seed = *seed;
          qkdnet::RunOutput run;
          {
            py::gil_scoped_release release;
            run = qkdnet::run_monte_carlo(sc);
          }
          if (out) qkdnet::emit_report(run, sc, *out);
          return qkdnet::summary_to_json(run.stats, sc);
        },
        py::arg("scenario"), py::arg("trials") = std::nullopt, py::arg("seed") = std::nullopt,
        py::arg("out") = std::nullopt);

  m.def("exact_oracles", [](std::size_t max_bits, std::uint64_t seed) {
    std::vector<py::tuple> out;
    for (const auto& c : qkdnet::exact_oracles(max_bits, seed).checks) {
      out.push_back(py::make_tuple(c.name, c.pass, c.detail));
    }
    return out;
  }, py::arg("max_bits") = qkdnet::kOracleMaxBits, py::arg("seed") = 1);

  m.def("derive_trial_seed", &qkdnet::derive_trial_seed);
}
