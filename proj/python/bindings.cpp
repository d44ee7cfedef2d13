#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "merit/axioms.hpp"
#include "merit/datagen.hpp"
#include "merit/error.hpp"
#include "merit/expost.hpp"
#include "merit/rules.hpp"
#include "merit/sampling.hpp"
#include "merit/solver.hpp"

namespace py = pybind11;
using namespace merit;

PYBIND11_MODULE(_merit, m) {
  m.doc() = "Maximin-optimal randomized top-k selection from quality intervals";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);

  py::class_<Interval>(m, "Interval")
      .def(py::init([](std::string id, double lower, double upper, std::optional<double> estimate) {
             return Interval{std::move(id), lower, upper, estimate};
           }),
           py::arg("id"), py::arg("lower"), py::arg("upper"), py::arg("estimate") = py::none())
      .def_readwrite("id", &Interval::id)
      .def_readwrite("lower", &Interval::lower)
      .def_readwrite("upper", &Interval::upper)
      .def_readwrite("estimate", &Interval::estimate)
      .def("__repr__", [](const Interval& i) {
        return "Interval(" + i.id + ", " + std::to_string(i.lower) + ", " + std::to_string(i.upper) + ")";
      });

  py::class_<Instance>(m, "Instance")
      .def(py::init<std::vector<Interval>, std::size_t, double>(), py::arg("intervals"), py::arg("k"),
           py::arg("epsilon") = 0.0)
      .def_property_readonly("k", &Instance::budget)
      .def_property_readonly("epsilon", &Instance::epsilon)
      .def_property_readonly("intervals", &Instance::intervals)
      .def("dominates", &Instance::dominates)
      .def("with_budget", &Instance::with_budget)
      .def("__len__", &Instance::size);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("p", &SolveReport::p)
      .def_readonly("value", &SolveReport::value)
      .def_readonly("bound", &SolveReport::bound)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("cuts_added", &SolveReport::cuts_added)
      .def_readonly("pruned_accept", &SolveReport::pruned_accept)
      .def_readonly("pruned_reject", &SolveReport::pruned_reject);

  py::class_<SelectionRuleOutput>(m, "Selection")
      .def_readonly("p", &SelectionRuleOutput::p)
      .def_readonly("accept", &SelectionRuleOutput::accept)
      .def_readonly("lottery", &SelectionRuleOutput::lottery)
      .def_readonly("reject", &SelectionRuleOutput::reject)
      .def_readonly("lottery_probability", &SelectionRuleOutput::lottery_probability)
      .def_readonly("under_budget", &SelectionRuleOutput::under_budget);

  py::class_<MonotonicityViolation>(m, "MonotonicityViolation")
      .def_readonly("candidate", &MonotonicityViolation::candidate)
      .def_readonly("budget", &MonotonicityViolation::budget)
      .def_readonly("drop", &MonotonicityViolation::drop);

  m.def(
      "solve_ex_ante",
      [](const Instance& instance, std::size_t max_iters) {
        SolveOptions options;
        options.max_iters = max_iters;
        py::gil_scoped_release release;
        return solve_ex_ante(instance, options);
      },
      py::arg("instance"), py::arg("max_iters") = 500);
  m.def(
      "select",
      [](const Instance& instance, const std::string& method) {
        const Method parsed = parse_method(method);
        py::gil_scoped_release release;
        return run_rule(parsed, instance);
      },
      py::arg("instance"), py::arg("method") = "merit");
  m.def(
      "worst_case_utility",
      [](const std::vector<double>& p, const Instance& instance) { return worst_case_utility(p, instance); },
      py::arg("p"), py::arg("instance"));
  m.def(
      "enforce", [](const std::vector<double>& p, const Instance& instance) { return enforce(p, instance); },
      py::arg("p"), py::arg("instance"));
  m.def(
      "expost_violations",
      [](const std::vector<double>& p, const Instance& instance) { return expost_violations(p, instance); },
      py::arg("p"), py::arg("instance"));
  m.def(
      "systematic_sample",
      [](const std::vector<double>& p, std::uint64_t seed) { return systematic_sample(p, seed); }, py::arg("p"),
      py::arg("seed"));
  // Audit records cross the boundary as canonical JSON text.
  m.def(
      "audit_record_json",
      [](const std::vector<double>& p, std::uint64_t seed, const IndexSet& selection) {
        return audit_record(p, seed, selection).dump();
      },
      py::arg("p"), py::arg("seed"), py::arg("selection"));
  m.def(
      "verify_audit_json",
      [](const std::string& text) -> std::pair<bool, std::string> {
        const nlohmann::json record = nlohmann::json::parse(text, nullptr, false);
        if (record.is_discarded()) return {false, "not valid JSON"};
        const AuditVerdict verdict = verify_audit(record);
        return {verdict.ok, verdict.reason};
      },
      py::arg("text"));
  m.def(
      "check_budget_monotonicity",
      [](const std::string& method, const Instance& instance, std::size_t k_max) {
        return check_budget_monotonicity(make_rule(parse_method(method)), instance, k_max);
      },
      py::arg("method"), py::arg("instance"), py::arg("k_max"));
  m.def("conference_instance", &conference_instance, py::arg("n"), py::arg("acceptance_rate"),
        py::arg("seed"));
}
