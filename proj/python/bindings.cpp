#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "omegarm/envs.hpp"
#include "omegarm/errors.hpp"
#include "omegarm/learn.hpp"
#include "omegarm/model_file.hpp"
#include "omegarm/modelcheck.hpp"
#include "omegarm/product.hpp"
#include "omegarm/translate.hpp"

namespace py = pybind11;
using namespace omegarm;

PYBIND11_MODULE(_omegarm, m) {
  m.doc() = "Model checking and Q-learning for omega-regular reward machines";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<IncompleteMachineError>(m, "IncompleteMachineError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Mdp>(m, "Mdp")
      .def_property_readonly("num_states", &Mdp::num_states)
      .def_property_readonly("init", &Mdp::init)
      .def_property_readonly("ap", &Mdp::ap)
      .def("num_actions", &Mdp::num_actions)
      .def("action_name", [](const Mdp& x, StateId s, ActionIndex a) { return x.action(s, a).name; })
      .def("branches", [](const Mdp& x, StateId s, ActionIndex a) {
        std::vector<std::pair<StateId, double>> out;
        for (const Branch& b : x.action(s, a).branches) out.emplace_back(b.target, b.prob);
        return out;
      });

  py::class_<OmegaRewardMachine>(m, "OmegaRewardMachine")
      .def_property_readonly("num_states", &OmegaRewardMachine::num_states)
      .def_property_readonly("num_edges", [](const OmegaRewardMachine& r) { return r.edges().size(); });

  py::class_<ModelBundle>(m, "ModelBundle")
      .def_readonly("mdp", &ModelBundle::mdp)
      .def_readonly("machine", &ModelBundle::machine)
      .def_readonly("defaults", &ModelBundle::defaults)
      .def("__eq__", [](const ModelBundle& a, const ModelBundle& b) { return a == b; });

  m.def("parse_model", [](const std::string& text) { return parse_model(text); }, py::arg("text"));
  m.def("load_model_file", &load_model_file, py::arg("path"));
  m.def("serialize_model", &serialize_model, py::arg("bundle"));
  m.def("make_env", &make_env, py::arg("name"));
  m.def("env_names", &env_names);

  py::class_<ProductMdp>(m, "ProductMdp")
      .def_readonly("mdp", &ProductMdp::mdp)
      .def_property_readonly("num_states", &ProductMdp::num_states)
      .def_property_readonly("init", &ProductMdp::init)
      .def("state", [](const ProductMdp& p, StateId q) {
        return std::pair{p.states.at(q).mdp_state, p.states.at(q).machine_state};
      });
  m.def("build_product", [](const ModelBundle& b) { return build_product(b.mdp, b.machine); }, py::arg("bundle"));

  py::class_<ModelCheckResult>(m, "ModelCheckResult")
      .def_readonly("lambda_", &ModelCheckResult::lambda)
      .def_readonly("rmax", &ModelCheckResult::rmax)
      .def_property_readonly("blike", [](const ModelCheckResult& r) { return r.buchi.p; })
      .def_property_readonly("bval", [](const ModelCheckResult& r) { return r.discounted.rho; })
      .def_property_readonly("safe_actions", [](const ModelCheckResult& r) { return r.buchi.safe_actions; })
      .def_property_readonly("alive", [](const ModelCheckResult& r) {
        return std::vector<bool>(r.pruned.alive.begin(), r.pruned.alive.end());
      });
  m.def("model_check", &model_check, py::arg("product"), py::arg("lambda_") = 0.99);
  m.def("switch_step", &switch_step, py::arg("lambda_"), py::arg("epsilon"), py::arg("rmax"));

  py::class_<TranslatedMdp>(m, "TranslatedMdp")
      .def_readonly("mdp", &TranslatedMdp::mdp)
      .def_readonly("base_states", &TranslatedMdp::base_states)
      .def("state", &TranslatedMdp::state)
      .def("state_name", &TranslatedMdp::state_name)
      .def_property_readonly("trap", &TranslatedMdp::trap);
  m.def("translate", &translate, py::arg("product"), py::arg("lambda_"), py::arg("zeta"), py::arg("f"));
  m.def("solve_total", [](const TranslatedMdp& tm) { return solve_total(tm).v; }, py::arg("translated"));

  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def_readwrite("f", &Hyperparams::f)
      .def_readwrite("zeta", &Hyperparams::zeta)
      .def_readwrite("gamma", &Hyperparams::gamma)
      .def_readwrite("alpha", &Hyperparams::alpha)
      .def_readwrite("epsilon", &Hyperparams::epsilon)
      .def_readwrite("init", &Hyperparams::init)
      .def_readwrite("ep_len", &Hyperparams::ep_len)
      .def_readwrite("ep_num", &Hyperparams::ep_num)
      .def_readwrite("lambda_", &Hyperparams::lambda)
      .def_readwrite("seed", &Hyperparams::seed)
      .def("set", &Hyperparams::set)
      .def("apply", &Hyperparams::apply);

  py::class_<LearnReport>(m, "LearnReport")
      .def_readonly("psat", &LearnReport::psat)
      .def_readonly("value", &LearnReport::value)
      .def_readonly("blike", &LearnReport::blike)
      .def_readonly("bval", &LearnReport::bval)
      .def_readonly("switch_step", &LearnReport::switch_step)
      .def_property_readonly("head", [](const LearnReport& r) { return r.head.choice; })
      .def_property_readonly("tail", [](const LearnReport& r) { return r.tail.choice; });

  m.def(
      "learn",
      [](const ProductMdp& p, const Hyperparams& hp, double stitch_eps) {
        const TranslatedMdp tm = translate(p, hp.lambda, hp.zeta, hp.f);
        py::gil_scoped_release release;
        const QTable q = q_learn(tm, hp);
        return certify(p, greedy(q), hp.lambda, stitch_eps);
      },
      py::arg("product"), py::arg("hyperparams"), py::arg("stitch_eps") = 0.1,
      "Q-learning on the translation, then certification of the greedy strategy.");
  m.def(
      "certify",
      [](const ProductMdp& p, const std::vector<ActionIndex>& choice, double lambda, double stitch_eps) {
        return certify(p, PositionalStrategy{choice}, lambda, stitch_eps);
      },
      py::arg("product"), py::arg("translated_choice"), py::arg("lambda_"), py::arg("stitch_eps") = 0.1);
}
