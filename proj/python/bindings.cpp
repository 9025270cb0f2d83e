#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "carl/analytics.hpp"
#include "carl/config.hpp"
#include "carl/diagnostics.hpp"
#include "carl/dynamics.hpp"
#include "carl/selftest.hpp"
#include "carl/sweep.hpp"

namespace py = pybind11;
using namespace carl;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict state_dict(const EnsembleState& s) {
    py::dict d;
    d["tau"] = s.tau;
    d["theta"] = to_array(s.theta);
    d["p"] = to_array(s.p);
    std::vector<cplx> sigma(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) sigma[j] = {s.sigma_re[j], s.sigma_im[j]};
    d["sigma"] = to_array(sigma);
    d["sigma_z"] = to_array(s.sigma_z);
    d["a1"] = s.a1;
    return d;
}

py::dict simulate(const std::string& config_json) {
    const RunConfig cfg = parse_config(config_json);
    require_valid(cfg.params);
    const auto init = init_ensemble(cfg.initial, cfg.params);
    Trajectory t;
    {
        py::gil_scoped_release release;
        t = integrate(init, cfg.params, cfg.schedule, cfg.motion);
    }
    py::dict d;
    d["times"] = to_array(t.times);
    d["a1"] = to_array(t.a1_series);
    d["coherence"] = to_array(t.c_series);
    d["r"] = to_array(t.r_series);
    d["phi"] = to_array(t.phi_series);
    py::list snaps;
    for (const auto& s : t.snapshots) snaps.append(state_dict(s.state));
    d["snapshots"] = snaps;
    d["initial"] = state_dict(init);
    d["final"] = state_dict(t.final_state);
    d["diverged"] = t.diverged;
    d["divergence_reason"] = t.divergence_reason;
    d["gain"] = t.diverged ? std::nan("") : gain(t.final_state.a1, cfg.initial.a1_0);
    return d;
}

py::dict sweep(const std::string& config_json, std::optional<std::size_t> workers) {
    const SweepSpec spec = SweepSpec::from_config(parse_config(config_json));
    Spectrum s;
    {
        py::gil_scoped_release release;
        s = run_sweep(spec, workers.value_or(default_workers()));
    }
    py::dict d;
    d["delta21"] = to_array(s.delta21);
    d["gain"] = to_array(s.gain);
    d["diverged"] = std::vector<bool>(s.diverged.begin(), s.diverged.end());
    d["config_digest"] = s.config_digest;
    return d;
}

} // namespace

PYBIND11_MODULE(_carl, m) {
    m.doc() = "Native core of carlsim";

    py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);

    m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); },
          "Parses a JSON config and returns it with every default filled in.");
    m.def("config_digest", [](const std::string& text) { return config_digest(parse_config(text)); });
    m.def("simulate", &simulate, py::arg("config_json"));
    m.def("sweep", &sweep, py::arg("config_json"), py::arg("workers") = py::none());

    m.def("steady_polarization", [](const std::string& text) {
        return steady_polarization(parse_config(text).params).s0;
    });
    m.def("bessel_jn", &bessel_jn, py::arg("n"), py::arg("x"));
    m.def("resonance_kernel", &resonance_kernel, py::arg("kappa"), py::arg("delta"), py::arg("tau"));
    m.def("n_max_rule", &n_max_rule, py::arg("max_amp"));
    m.def("jacobi_anger_residual", &jacobi_anger_residual, py::arg("amp"), py::arg("n_max"),
          py::arg("samples") = 64);

    m.def("order_parameter", [](const std::vector<double>& theta) {
        const auto o = order_parameter(theta);
        return py::make_tuple(o.r, o.phi);
    });
    m.def("bunching_fraction",
          [](const std::vector<double>& theta, double center, double halfwidth) {
              return bunching_fraction(theta, center, halfwidth);
          },
          py::arg("theta"), py::arg("center"), py::arg("halfwidth"));

    m.def("selftest", [] {
        py::list out;
        for (const auto& r : run_selftest({})) {
            py::dict d;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["value"] = r.value;
            d["threshold"] = r.threshold;
            out.append(d);
        }
        return out;
    });
}
