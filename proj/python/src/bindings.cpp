#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "detach/analytics.hpp"
#include "detach/harness.hpp"
#include "detach/simulator.hpp"

namespace py = pybind11;
using namespace detach;

namespace {

// Rationals cross the boundary as "p/q" strings; the Python side wraps them
// in fractions.Fraction.
std::string q(const Rational& r) { return to_string(r); }

EstimandSpec estimand(const std::string& name, std::uint64_t time) {
  const auto e = parse_estimand(name);
  if (!e) throw py::value_error("unknown estimand '" + name + "'");
  return {*e, time};
}

py::object to_python(const harness::Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact analytics, simulation and experiments for the detachment process";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<harness::SchemaError>(m, "SchemaError", PyExc_ValueError);

  // Exact rationals.
  m.def("pi_detached_exact", [](std::uint64_t n, std::uint64_t k) { return q(exact::pi_detached({n, k})); });
  m.def("tau_cdf_exact", [](std::uint64_t n, std::uint64_t k) { return q(exact::tau_cdf({n, k})); });
  m.def("joint_detached_exact",
        [](std::uint64_t n, std::uint64_t k, std::uint64_t l) { return q(exact::joint_detached(n, k, l)); });
  m.def("cond_detached_exact",
        [](std::uint64_t n, std::uint64_t k1, std::uint64_t k2) { return q(exact::cond_detached(n, k1, k2)); });
  m.def("expected_detachment_states_exact",
        [](std::uint64_t n, std::uint64_t k) { return q(exact::expected_detachment_states(n, k)); });
  m.def("support_pmf_exact", [](std::uint64_t n, std::uint64_t k) {
    std::vector<std::string> out;
    for (const auto& r : exact::support_pmf({n, k})) out.push_back(q(r));
    return out;
  });

  // Floating point.
  m.def("pi_detached", [](std::uint64_t n, std::uint64_t k) { return pi_detached(ProcessParams{n, k}); },
        py::arg("n"), py::arg("k"));
  m.def("tau_cdf", [](std::uint64_t n, std::uint64_t k) { return tau_cdf(ProcessParams{n, k}); },
        py::arg("n"), py::arg("k"));
  m.def("tau_survival", [](std::uint64_t n, std::uint64_t k) { return tau_survival(ProcessParams{n, k}); },
        py::arg("n"), py::arg("k"));
  m.def("ie_cdf", &ie_cdf, py::arg("x"));
  m.def("expected_detachment_states", py::overload_cast<std::uint64_t, std::uint64_t>(&expected_detachment_states),
        py::arg("n"), py::arg("k"));
  m.def("critical_k", &critical_k, py::arg("n"), py::arg("y"));
  m.def("critical_limit", &critical_limit, py::arg("y"));
  m.def("lonely_moments", [](std::uint64_t n, std::uint64_t k) {
    const auto mo = lonely_moments(ProcessParams{n, k});
    return py::make_tuple(mo.mean, mo.variance);
  }, py::arg("n"), py::arg("k"));
  m.def("support_pmf", [](std::uint64_t n, std::uint64_t k) { return support_pmf(ProcessParams{n, k}); },
        py::arg("n"), py::arg("k"));

  // Monte Carlo.
  m.def("mc_estimate",
        [](std::uint64_t n, std::uint64_t horizon, std::uint64_t replicas, const std::string& name,
           std::uint64_t time, std::uint64_t seed) {
          const McEstimate e = [&] {
            py::gil_scoped_release release;
            return mc_estimate(n, horizon, replicas, estimand(name, time), seed);
          }();
          py::dict d;
          d["mean"] = e.mean;
          d["std_error"] = e.std_error;
          d["replicas"] = e.replicas;
          d["censored"] = e.censored;
          return d;
        },
        py::arg("n"), py::arg("horizon"), py::arg("replicas"), py::arg("estimand") = "first_detachment",
        py::arg("time") = 0, py::arg("seed") = 1);
  m.def("mc_samples",
        [](std::uint64_t n, std::uint64_t horizon, std::uint64_t replicas, const std::string& name,
           std::uint64_t time, std::uint64_t seed) {
          McSamples s;
          {
            py::gil_scoped_release release;
            s = mc_samples(n, horizon, replicas, estimand(name, time), seed);
          }
          std::vector<bool> c(s.censored.begin(), s.censored.end());
          return py::make_tuple(s.values, c);
        },
        py::arg("n"), py::arg("horizon"), py::arg("replicas"), py::arg("estimand") = "first_detachment",
        py::arg("time") = 0, py::arg("seed") = 1);

  // Experiments.
  m.def("experiment_names", [] {
    std::vector<std::string> out;
    for (const auto& info : harness::registry()) out.push_back(info.name);
    return out;
  });
  m.def("run_experiment",
        [](const std::string& name, const std::string& params_json, const std::string& output_path) {
          auto spec = harness::make_spec(name, harness::Json::parse(params_json));
          spec.output_path = output_path;
          harness::ExperimentReport r;
          {
            py::gil_scoped_release release;
            r = harness::run_experiment(spec);
          }
          return to_python(harness::to_json(r));
        },
        py::arg("name"), py::arg("params_json") = "{}", py::arg("output_path") = "");
  m.def("cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv{"detachment"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = harness::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
