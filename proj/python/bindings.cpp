#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hpcpred/classify.hpp"
#include "hpcpred/cli.hpp"
#include "hpcpred/error.hpp"
#include "hpcpred/linear.hpp"
#include "hpcpred/metrics.hpp"
#include "hpcpred/synth.hpp"
#include "hpcpred/tree.hpp"

namespace py = pybind11;
using namespace hpcpred;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Job resource and failure prediction";

  py::register_exception<Error>(m, "HpcpredError", PyExc_RuntimeError);

  py::class_<LinearModel>(m, "LinearModel")
      .def_readonly("intercept", &LinearModel::intercept)
      .def_readonly("coef", &LinearModel::coef)
      .def_readonly("algorithm", &LinearModel::algorithm)
      .def_readonly("hyperparameters", &LinearModel::hyperparameters)
      .def_readonly("metadata", &LinearModel::metadata)
      .def("predict", &LinearModel::predict, py::arg("X"));

  m.def("fit_ols", &fit_ols, py::arg("X"), py::arg("y"));
  m.def("fit_ridge", &fit_ridge, py::arg("X"), py::arg("y"), py::arg("alpha") = 0.5);
  m.def(
      "fit_lasso_lars_ic",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::string& criterion) {
        if (criterion != "aic" && criterion != "bic") throw py::value_error("criterion must be 'aic' or 'bic'");
        return fit_lasso_lars_ic(X, y, criterion == "aic" ? InformationCriterion::kAic : InformationCriterion::kBic);
      },
      py::arg("X"), py::arg("y"), py::arg("criterion") = "aic");
  m.def(
      "fit_elastic_net",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha, double l1_ratio, double tol,
         std::size_t max_iter) { return fit_elastic_net(X, y, alpha, l1_ratio, {tol, max_iter}); },
      py::arg("X"), py::arg("y"), py::arg("alpha"), py::arg("l1_ratio") = 0.5, py::arg("tol") = 1e-6,
      py::arg("max_iter") = 10000);
  m.def(
      "fit_elastic_net_cv",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l1_ratio, std::size_t folds) {
        ElasticNetCvOptions opt;
        opt.folds = folds;
        return fit_elastic_net_cv(X, y, l1_ratio, opt);
      },
      py::arg("X"), py::arg("y"), py::arg("l1_ratio") = 0.5, py::arg("folds") = 5);

  py::class_<DecisionTree>(m, "DecisionTree")
      .def("predict", &DecisionTree::predict, py::arg("X"))
      .def("predict_value", &DecisionTree::predict_value, py::arg("X"))
      .def_property_readonly("depth", &DecisionTree::depth)
      .def_property_readonly("leaf_count", &DecisionTree::leaf_count);

  m.def(
      "fit_cart_regression",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::optional<int> max_depth) {
        return fit_cart_regression(X, y, {max_depth, 2});
      },
      py::arg("X"), py::arg("y"), py::arg("max_depth") = py::none());
  m.def(
      "fit_cart_classifier",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::optional<int> max_depth) {
        return fit_cart_classifier(X, y, {max_depth, 2});
      },
      py::arg("X"), py::arg("y"), py::arg("max_depth") = py::none());

  py::class_<LogisticModel>(m, "LogisticModel")
      .def_readonly("intercept", &LogisticModel::intercept)
      .def_readonly("weights", &LogisticModel::weights)
      .def_readonly("iterations", &LogisticModel::iterations)
      .def("predict_proba", &LogisticModel::predict_proba, py::arg("X"))
      .def("predict", &LogisticModel::predict, py::arg("X"));
  m.def(
      "fit_logistic",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2) { return fit_logistic(X, y, l2); },
      py::arg("X"), py::arg("y"), py::arg("l2") = 1.0);

  py::class_<GaussianNBModel>(m, "GaussianNBModel")
      .def_readonly("priors", &GaussianNBModel::priors)
      .def_readonly("means", &GaussianNBModel::means)
      .def_readonly("variances", &GaussianNBModel::variances)
      .def("predict_proba", &GaussianNBModel::predict_proba, py::arg("X"))
      .def("predict", &GaussianNBModel::predict, py::arg("X"));
  m.def("fit_gnb", &fit_gnb, py::arg("X"), py::arg("y"));

  py::class_<ForestModel>(m, "ForestModel")
      .def_readonly("max_features", &ForestModel::max_features)
      .def_readonly("tree_seeds", &ForestModel::tree_seeds)
      .def_property_readonly("n_trees", [](const ForestModel& f) { return f.trees.size(); })
      .def("predict_proba", &ForestModel::predict_proba, py::arg("X"))
      .def("predict", &ForestModel::predict, py::arg("X"));
  m.def(
      "fit_random_forest",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t n_trees, std::uint64_t seed,
         std::optional<int> max_depth, bool bootstrap) {
        ForestParams p;
        p.n_trees = n_trees;
        p.seed = seed;
        p.max_depth = max_depth;
        p.bootstrap = bootstrap;
        return fit_random_forest(X, y, p);
      },
      py::arg("X"), py::arg("y"), py::arg("n_trees") = 100, py::arg("seed") = 42,
      py::arg("max_depth") = py::none(), py::arg("bootstrap") = true);

  m.def("r_squared", &r_squared, py::arg("y_true"), py::arg("y_pred"));
  m.def("mean_squared_error", &mean_squared_error, py::arg("y_true"), py::arg("y_pred"));
  m.def("accuracy", &accuracy, py::arg("y_true"), py::arg("y_pred"));
  m.def("precision", &precision, py::arg("y_true"), py::arg("y_pred"));
  m.def("recall", &recall, py::arg("y_true"), py::arg("y_pred"));
  m.def("f1_score", &f1_score, py::arg("y_true"), py::arg("y_pred"));

  m.def(
      "generate_workload",
      [](std::size_t n_users, std::size_t jobs_per_user, std::uint64_t seed) {
        SynthConfig cfg;
        cfg.n_users = n_users;
        cfg.jobs_per_user_min = cfg.jobs_per_user_max = jobs_per_user;
        cfg.seed = seed;
        const auto w = generate_workload(cfg);
        return py::make_tuple(w.accounting, w.roles, w.jobs.size());
      },
      py::arg("n_users") = 50, py::arg("jobs_per_user") = 400, py::arg("seed") = 42,
      "Returns (accounting_text, roles_text, job_count).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in-process. Returns (exit_code, stdout, stderr).");
}
