// Python view of the numerical core. Kept thin: results come back as plain
// dicts so the smoke tests do not depend on binding classes.

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hubnet/bounds.hpp"
#include "hubnet/closeness.hpp"
#include "hubnet/errors.hpp"
#include "hubnet/fluid.hpp"
#include "hubnet/roots.hpp"
#include "hubnet/simulator.hpp"

namespace py = pybind11;
using namespace hubnet;

namespace {

py::dict root_dict(const RootResult& r) {
  py::dict d;
  d["root"] = r.root;
  d["iterations"] = r.iterations;
  d["residual"] = r.residual;
  d["method"] = std::string(method_name(r.method));
  d["converged"] = r.converged;
  d["degenerate"] = r.degenerate;
  return d;
}

MomentVariant variant_of(const std::string& s) {
  if (s == "corrected") return MomentVariant::Corrected;
  if (s == "legacy") return MomentVariant::Legacy;
  throw DomainError("variant must be 'corrected' or 'legacy'");
}

Theorem theorem_of(const std::string& s) {
  if (s == "T1") return Theorem::T1;
  if (s == "T2") return Theorem::T2;
  throw DomainError("theorem must be 'T1' or 'T2'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hub-and-satellite closed network: roots, bounds, fluid limit, simulation";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<Distribution>(m, "Distribution")
      .def_static("exponential", &Distribution::exponential, py::arg("rate"))
      .def_static("erlang", &Distribution::erlang, py::arg("k"), py::arg("rate"))
      .def_static("hyperexp2", &Distribution::hyperexp2, py::arg("weight"), py::arg("rate1"),
                  py::arg("rate2"))
      .def_static("deterministic", &Distribution::deterministic, py::arg("value"))
      .def_static("gamma", &Distribution::gamma, py::arg("shape"), py::arg("rate"))
      .def_property_readonly("family",
                             [](const Distribution& d) { return std::string(family_name(d.family())); })
      .def("cdf", &Distribution::cdf)
      .def("survival", &Distribution::survival)
      .def("pdf", &Distribution::pdf)
      .def("lst", &Distribution::lst)
      .def("quantile", &Distribution::quantile)
      .def_property_readonly("mean", &Distribution::mean)
      .def_property_readonly("second_moment", &Distribution::second_moment)
      .def_property_readonly("rate", &Distribution::rate)
      .def("__repr__", &Distribution::describe)
      .def(py::self == py::self);

  m.def(
      "compound_lst",
      [](const Distribution& d, double p, double q_bar, double mu, double s) {
        return compound_lst(CompoundSpec(d, p, q_bar, mu), s);
      },
      py::arg("dist"), py::arg("p"), py::arg("q_bar"), py::arg("mu"), py::arg("s"));

  m.def(
      "satellite_root",
      [](const Distribution& d, double p, double q_bar, double mu) {
        return root_dict(satellite_root(CompoundSpec(d, p, q_bar, mu)));
      },
      py::arg("dist"), py::arg("p"), py::arg("q_bar"), py::arg("mu"));

  m.def(
      "finite_n_root",
      [](const Distribution& d, double p, double q_bar, double mu, long long N) {
        return root_dict(finite_n_root(CompoundSpec(d, p, q_bar, mu), N, q_bar));
      },
      py::arg("dist"), py::arg("p"), py::arg("q_bar"), py::arg("mu"), py::arg("N"));

  m.def(
      "poisson_ell", [](double a_mu) { return poisson_ell(a_mu).root; }, py::arg("a_mu"));

  m.def(
      "wald_moments",
      [](const Distribution& d, double p, double q_bar, const std::string& variant) {
        const auto w = wald_moments(d, p, q_bar, variant_of(variant));
        return py::make_tuple(w.a, w.b);
      },
      py::arg("dist"), py::arg("p"), py::arg("q_bar"), py::arg("variant") = "corrected");

  m.def(
      "rolski_bounds",
      [](double a, double b, double mu) {
        const auto r = rolski_bounds(CompoundMoments{a, b, MomentVariant::Corrected}, mu);
        return py::make_tuple(r.lo, r.hi);
      },
      py::arg("a"), py::arg("b"), py::arg("mu"));

  m.def(
      "theorem_envelope",
      [](const Distribution& d, double p, double mu, double q_bar, double epsilon,
         const std::string& theorem, const std::string& variant) {
        const auto r = theorem_envelope(d, p, mu, q_bar, epsilon, theorem_of(theorem),
                                        variant_of(variant));
        py::dict o;
        o["rho"] = r.rho;
        o["ell"] = r.ell;
        o["a"] = r.a;
        o["b"] = r.b;
        o["rolski_lo"] = r.rolski_lo;
        o["rolski_hi"] = r.rolski_hi;
        o["eps_lo"] = r.eps_lo;
        o["eps_hi"] = r.eps_hi;
        o["lower"] = r.lower;
        o["upper"] = r.upper;
        o["f1_satisfied"] = r.f1_satisfied;
        o["f2_satisfied"] = r.f2_satisfied;
        return o;
      },
      py::arg("dist"), py::arg("p"), py::arg("mu"), py::arg("q_bar"), py::arg("epsilon"),
      py::arg("theorem") = "T1", py::arg("variant") = "corrected");

  m.def(
      "hub_fluid",
      [](double lambda, double p_k, double mu_k, double t) {
        return hub_fluid(FluidParams{lambda, p_k, mu_k}, t);
      },
      py::arg("lam"), py::arg("p_k"), py::arg("mu_k"), py::arg("t"));

  m.def(
      "queue_length_law",
      [](double rho, double phi) { return queue_length_law(rho, phi).probabilities; },
      py::arg("rho"), py::arg("phi"));

  m.def(
      "closeness_report",
      [](const Distribution& d) {
        const auto r = closeness_report(d);
        py::dict o;
        o["epsilon_hat"] = r.epsilon_hat;
        o["kolmogorov_exp"] = r.kolmogorov_exp;
        o["aging"] = std::string(aging_name(r.aging));
        return o;
      },
      py::arg("dist"));

  m.def(
      "simulate",
      [](long long N, const Distribution& g, std::vector<double> p, std::vector<double> mu,
         std::vector<double> times, long long replications, std::uint64_t seed, int workers) {
        NetworkConfig c;
        c.units = N;
        c.hub_service = g;
        c.p = std::move(p);
        c.mu = std::move(mu);
        ReplicateOptions o;
        o.horizon = times.empty() ? 0.0 : times.back();
        o.sample_times = std::move(times);
        o.replications = replications;
        o.base_seed = seed;
        o.workers = workers;
        SimEstimate est;
        {
          py::gil_scoped_release release;
          est = replicate(c, o);
        }
        py::dict out;
        std::vector<double> mean, hw;
        for (const auto& ci : est.hub_occupancy) {
          mean.push_back(ci.mean);
          hw.push_back(ci.half_width);
        }
        out["times"] = est.sample_times;
        out["q_bar"] = mean;
        out["half_width"] = hw;
        out["satellite_counts"] = est.satellite_counts;
        return out;
      },
      py::arg("N"), py::arg("hub_service"), py::arg("p"), py::arg("mu"), py::arg("times"),
      py::arg("replications") = 20, py::arg("seed") = 1, py::arg("workers") = 1);
}
