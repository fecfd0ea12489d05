#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mdpode/errors.hpp"
#include "mdpode/kl_twist.hpp"
#include "mdpode/markov_lin.hpp"
#include "mdpode/model.hpp"
#include "mdpode/model_io.hpp"
#include "mdpode/ode_engine.hpp"

namespace py = pybind11;
using namespace mdpode;

namespace {

// Stacks per-sample vectors into an (n, d) array.
Matrix stack(const std::vector<TrajectorySample>& samples, const Vector TrajectorySample::*field) {
  if (samples.empty()) return Matrix(0, 0);
  Matrix out(static_cast<Eigen::Index>(samples.size()), (samples.front().*field).size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = (samples[i].*field).transpose();
  }
  return out;
}

Vector column(const std::vector<TrajectorySample>& samples, double TrajectorySample::*field) {
  Vector out(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) out(static_cast<Eigen::Index>(i)) = samples[i].*field;
  return out;
}

py::dict trajectory_dict(const ValueTrajectory& traj) {
  py::dict d;
  d["zeta"] = column(traj.samples, &TrajectorySample::zeta);
  d["eta"] = column(traj.samples, &TrajectorySample::eta);
  d["eta_quadrature"] = column(traj.samples, &TrajectorySample::eta_quadrature);
  d["eta_rate"] = column(traj.samples, &TrajectorySample::eta_rate);
  d["residual_sup"] = column(traj.samples, &TrajectorySample::residual_sup);
  d["h"] = stack(traj.samples, &TrajectorySample::h);
  d["pi"] = stack(traj.samples, &TrajectorySample::pi);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Value-function ODEs for Kullback-Leibler controlled Markov chains.";

  // Error hierarchy, most derived last so translation picks the closest type.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ReducibilityError>(m, "ReducibilityError", validation.ptr());
  py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<FeasibilityError>(m, "FeasibilityError", base.ptr());
  py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<KLModel>(m, "KLModel")
      .def(py::init([](std::vector<std::string> xu, std::vector<std::string> xn, Matrix q0,
                       Matrix r0, Vector utility, std::size_t x0) {
             return KLModel(StateSpace(std::move(xu), std::move(xn)), NatureKernel(std::move(q0)),
                            ControlKernel(std::move(r0)), std::move(utility), x0);
           }),
           py::arg("xu_labels"), py::arg("xn_labels"), py::arg("q0"), py::arg("r0"),
           py::arg("utility"), py::arg("reference_state"))
      .def_property_readonly("size", &KLModel::size)
      .def_property_readonly("reference_state", &KLModel::reference_state)
      .def_property_readonly("n0", &KLModel::n0)
      .def_property_readonly("utility", &KLModel::utility)
      .def_property_readonly("q0", [](const KLModel& k) { return k.q0().entries(); })
      .def_property_readonly("r0", [](const KLModel& k) { return k.r0().entries(); })
      .def_property_readonly("p0", [](const KLModel& k) { return k.p0().entries(); })
      .def_property_readonly("labels", [](const KLModel& k) {
        std::vector<std::string> out;
        for (std::size_t x = 0; x < k.size(); ++x) out.push_back(k.space().label(x));
        return out;
      });

  m.def("load_model", &load_model_json, py::arg("path"));
  m.def("parse_model", &parse_model_json, py::arg("text"));
  m.def("model_to_json", &model_to_json, py::arg("model"));
  m.def("symmetric_model", &symmetric_two_state_model);

  m.def("invariant_pmf", [](Matrix p) { return invariant_pmf(StochasticMatrix(std::move(p))).weights(); },
        py::arg("p"));
  m.def("fundamental_matrix",
        [](Matrix p) {
          const StochasticMatrix sp(std::move(p));
          return fundamental_matrix(sp, invariant_pmf(sp)).z;
        },
        py::arg("p"));
  m.def("poisson_solve",
        [](Matrix p, const Vector& f, std::size_t x0) {
          const PoissonSolution s = poisson_solve(StochasticMatrix(std::move(p)), f, x0);
          return py::make_tuple(s.h, s.mean);
        },
        py::arg("p"), py::arg("f"), py::arg("reference_state"),
        "Returns (h, mean) with h(reference_state) = 0.");
  m.def("kl_rate",
        [](Matrix p, Matrix p0, Vector pi) {
          return kl_rate(StochasticMatrix(std::move(p)), StochasticMatrix(std::move(p0)),
                         Pmf(std::move(pi)));
        },
        py::arg("p"), py::arg("p0"), py::arg("pi"));

  m.def("twist",
        [](const Vector& h, const KLModel& model) {
          const TwistResult tw = twist(h, model);
          py::dict d;
          d["p"] = tw.p_h.entries();
          d["r"] = tw.r_h.entries();
          d["lambda"] = tw.lambda;
          return d;
        },
        py::arg("h"), py::arg("model"));
  m.def("fixed_point_residual", &fixed_point_residual, py::arg("zeta"), py::arg("h"), py::arg("model"));
  m.def("jacobian", &jacobian, py::arg("h"), py::arg("model"));
  m.def("newton_solve",
        [](double zeta, const KLModel& model, std::optional<Vector> h_init, double tol) {
          NewtonOptions opts;
          opts.tol = tol;
          const Vector start =
              h_init ? *h_init : Vector::Zero(static_cast<Eigen::Index>(model.size()));
          const FixedPointSolution s = newton_solve(zeta, start, model, opts);
          py::dict d;
          d["h"] = s.h_star;
          d["eta"] = s.eta_star;
          d["pi"] = s.pi.weights();
          d["r"] = s.twist.r_h.entries();
          d["iterations"] = s.iterations;
          d["residual_sup"] = s.residual_sup;
          return d;
        },
        py::arg("zeta"), py::arg("model"), py::arg("h_init") = py::none(), py::arg("tol") = 1e-12);

  m.def("integrate_kl",
        [](const KLModel& model, double zeta_start, double zeta_end, double step, bool polish,
           std::optional<Vector> h_start) {
          IntegratorSettings s;
          s.step = step;
          s.polish = polish;
          return trajectory_dict(integrate_kl(model, KlSpan{zeta_start, zeta_end, h_start}, s));
        },
        py::arg("model"), py::arg("zeta_start"), py::arg("zeta_end"), py::arg("step") = 1e-3,
        py::arg("polish") = true, py::arg("h_start") = py::none());

  m.def("integrate_brockett",
        [](double zeta_end, double step) {
          const ValueTrajectory traj = integrate_brockett(brockett_example(), zeta_end, step);
          py::dict d;
          d["zeta"] = column(traj.samples, &TrajectorySample::zeta);
          d["gamma"] = column(traj.samples, &TrajectorySample::eta);
          d["g"] = stack(traj.samples, &TrajectorySample::h);
          Vector phi(static_cast<Eigen::Index>(traj.samples.size()));
          for (std::size_t i = 0; i < traj.samples.size(); ++i) {
            phi(static_cast<Eigen::Index>(i)) = traj.samples[i].policy(0, 0);
          }
          d["phi1"] = phi;
          return d;
        },
        py::arg("zeta_end"), py::arg("step") = 1e-3,
        "Integrates the three-state example; phi1 is the input at the first state.");

  m.def("lqr_coefficient_ode",
        [](double alpha, double zeta_max, double step) {
          const auto samples = lqr_coefficient_ode(LqrModel(alpha), zeta_max, step);
          Vector zeta(static_cast<Eigen::Index>(samples.size()));
          Vector b(zeta.size());
          Vector k(zeta.size());
          for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto j = static_cast<Eigen::Index>(i);
            zeta(j) = samples[i].zeta;
            b(j) = samples[i].b;
            k(j) = samples[i].k;
          }
          return py::make_tuple(zeta, b, k);
        },
        py::arg("alpha"), py::arg("zeta_max"), py::arg("step") = 1e-3);
  m.def("riccati_oracle",
        [](double alpha, double zeta) { return riccati_oracle(LqrModel(alpha), zeta); },
        py::arg("alpha"), py::arg("zeta"));
}
