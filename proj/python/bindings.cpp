#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>
#include <pybind11/iostream.h>

#include <iostream>

#include "bbt/bt_model.hpp"
#include "bbt/chain_io.hpp"
#include "bbt/cli.hpp"
#include "bbt/data_ingest.hpp"
#include "bbt/diagnostics.hpp"
#include "bbt/error.hpp"
#include "bbt/mcmc.hpp"
#include "bbt/prior_cov.hpp"
#include "bbt/report.hpp"
#include "bbt/sim.hpp"
#include "bbt/win_matrix.hpp"

namespace py = pybind11;
using namespace bbt;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian Bradley-Terry rankings from indicator tables";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<Rng>(m, "Rng", "64-bit Mersenne Twister stream")
      .def(py::init<std::uint64_t>(), py::arg("seed"));

  py::enum_<Zone>(m, "Zone")
      .value("low", Zone::kLow)
      .value("middle", Zone::kMiddle)
      .value("high", Zone::kHigh);

  py::class_<IndicatorTable>(m, "IndicatorTable")
      .def_readonly("entities", &IndicatorTable::entities)
      .def_readonly("indicators", &IndicatorTable::indicators)
      .def_readonly("values", &IndicatorTable::values)
      .def_readonly("polarity", &IndicatorTable::polarity)
      .def_property_readonly("missing", [](const IndicatorTable& t) {
        return Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>(t.missing.matrix());
      })
      .def("complete", &IndicatorTable::complete);

  py::class_<IncomeTable>(m, "IncomeTable")
      .def_readonly("entities", &IncomeTable::entities)
      .def_readonly("income", &IncomeTable::income)
      .def_readonly("zone", &IncomeTable::zone);

  m.def("load_indicators", &load_indicators, py::arg("path"), py::arg("polarity_path"));
  m.def("make_indicator_table", &make_indicator_table, py::arg("entities"), py::arg("indicators"),
        py::arg("values"), py::arg("polarity"), "NaN cells are treated as missing");
  m.def("load_income", [](const std::filesystem::path& p, double low_max, double high_min) {
          return load_income(p, ZoneThresholds{low_max, high_min});
        },
        py::arg("path"), py::arg("low_income_max") = 100000.0, py::arg("high_income_min") = 200000.0);
  m.def("drop_incomplete_indicators", [](const IndicatorTable& t) {
    return apply_missing_policy(t, DropIndicators{});
  });
  m.def("drop_entities", [](const IndicatorTable& t, std::vector<std::string> names) {
    return apply_missing_policy(t, DropEntities{std::move(names)});
  });
  m.def("align", [](const IndicatorTable& ind, const IncomeTable& inc) {
    auto a = align(ind, inc);
    return py::make_tuple(a.indicators, a.income, a.dropped);
  });
  m.def("subset_by_zone", &subset_by_zone, py::arg("indicators"), py::arg("income"), py::arg("zones"));

  py::class_<WinMatrix>(m, "WinMatrix")
      .def_readonly("entities", &WinMatrix::entities)
      .def_readonly("wins", &WinMatrix::wins)
      .def_readonly("comparisons", &WinMatrix::comparisons);
  m.def("build_win_matrix", [](const IndicatorTable& t, const std::string& tie_policy) {
          return build_win_matrix(t, parse_tie_policy(tie_policy));
        },
        py::arg("table"), py::arg("tie_policy") = "split");
  m.def("make_win_matrix", &make_win_matrix, py::arg("entities"), py::arg("wins"));
  m.def("total_comparisons", &total_comparisons);

  m.def("win_probability", &win_probability, py::arg("mu_i"), py::arg("mu_j"));
  m.def("log_likelihood", &log_likelihood, py::arg("mu"), py::arg("wins"));
  m.def("mle_newman", [](const WinMatrix& w, double tol, int max_iter) {
          auto r = mle_newman(w, MleOptions{tol, max_iter});
          return py::make_tuple(r.mu, r.iterations);
        },
        py::arg("wins"), py::arg("tol") = 1e-10, py::arg("max_iter") = 10000,
        "Returns (centered merits, sweeps)");

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init([](const std::string& kind, double length_scale, double mixture) {
             KernelSpec k{parse_kernel_kind(kind), length_scale, mixture};
             k.validate();
             return k;
           }),
           py::arg("kind") = "squared_exponential", py::arg("length_scale") = 0.09,
           py::arg("mixture") = 1.0)
      .def_readwrite("length_scale", &KernelSpec::length_scale)
      .def_readwrite("mixture", &KernelSpec::mixture);

  py::class_<ConstrainedCovariance>(m, "ConstrainedCovariance")
      .def_readonly("sigma", &ConstrainedCovariance::sigma)
      .def_readonly("c", &ConstrainedCovariance::c)
      .def_readonly("factor", &ConstrainedCovariance::factor)
      .def_readonly("pinv", &ConstrainedCovariance::pinv)
      .def_readonly("rank", &ConstrainedCovariance::rank)
      .def_readonly("jitter_applied", &ConstrainedCovariance::jitter_applied)
      .def("quadratic_form", &ConstrainedCovariance::quadratic_form);
  m.def("log_income_distance", py::overload_cast<const Eigen::VectorXd&>(&log_income_distance));
  m.def("kernel_matrix", &kernel_matrix, py::arg("distance"), py::arg("spec"));
  m.def("constrain", &constrain, py::arg("sigma"), py::arg("jitter") = 1e-10);
  m.def("sample_constrained", &sample_constrained, py::arg("cov"), py::arg("scale"), py::arg("rng"));

  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("beta", &SamplerConfig::beta)
      .def_readwrite("chi", &SamplerConfig::chi)
      .def_readwrite("omega", &SamplerConfig::omega)
      .def_readwrite("iterations", &SamplerConfig::iterations)
      .def_readwrite("burn_in", &SamplerConfig::burn_in)
      .def_readwrite("thin", &SamplerConfig::thin)
      .def_readwrite("seed", &SamplerConfig::seed)
      .def_readwrite("kernel", &SamplerConfig::kernel)
      .def_readwrite("rank_adjusted_shape", &SamplerConfig::rank_adjusted_shape)
      .def_readwrite("conjugate_scale", &SamplerConfig::conjugate_scale)
      .def_readwrite("fixed_alpha2", &SamplerConfig::fixed_alpha2);

  py::class_<ChainSamples>(m, "ChainSamples")
      .def_readonly("entities", &ChainSamples::entities)
      .def_readonly("mu_draws", &ChainSamples::mu_draws)
      .def_readonly("alpha2_draws", &ChainSamples::alpha2_draws)
      .def_readonly("loglik_draws", &ChainSamples::loglik_draws)
      .def_readonly("quadform_draws", &ChainSamples::quadform_draws)
      .def_readonly("accepted", &ChainSamples::accepted)
      .def_readonly("proposed", &ChainSamples::proposed)
      .def_readonly("config", &ChainSamples::config);
  m.def("gibbs_alpha2", py::overload_cast<const MeritVector&, const ConstrainedCovariance&, double, double, Rng&>(
                            &gibbs_alpha2),
        py::arg("mu"), py::arg("cov"), py::arg("chi"), py::arg("omega"), py::arg("rng"));
  m.def("run_chain", &run_chain, py::arg("wins"), py::arg("cov"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("posterior_mean", &posterior_mean);
  m.def("save_chain", &save_chain);
  m.def("load_chain", &load_chain);

  m.def("autocovariance", &autocovariance, py::arg("draws"), py::arg("lag"));
  m.def("spectral_longrun", [](const Eigen::MatrixXd& d, Eigen::Index b) { return spectral_longrun(d, b).matrix; },
        py::arg("draws"), py::arg("bandwidth"));
  m.def("multivariate_ess", [](const Eigen::MatrixXd& d, double threshold, std::optional<Eigen::Index> b) {
          auto e = multivariate_ess(d, threshold, b);
          return py::make_tuple(e.ess, e.rank);
        },
        py::arg("draws"), py::arg("threshold") = 1e-8, py::arg("bandwidth") = py::none(),
        "Returns (ess, estimated rank)");
  m.def("acceptance_rate", &acceptance_rate);
  m.def("kendall_tau_distance", [](const std::vector<int>& a, const std::vector<int>& b) {
    return kendall_tau_distance(a, b);
  });
  m.def("rank_by_score", &rank_by_score);

  py::class_<RankingReport>(m, "RankingReport")
      .def_readonly("entities", &RankingReport::entities)
      .def_readonly("mean", &RankingReport::mean)
      .def_readonly("sd", &RankingReport::sd)
      .def_readonly("ci_low", &RankingReport::ci_low)
      .def_readonly("ci_high", &RankingReport::ci_high)
      .def_readonly("rank", &RankingReport::rank)
      .def_readonly("outrank", &RankingReport::outrank);
  m.def("summarize", &summarize, py::arg("samples"), py::arg("level") = 0.95);

  m.def("simulate_win_matrix", [](const MeritVector& mu, int k, Rng& rng) {
          return simulate_win_matrix(mu, k, rng);
        },
        py::arg("mu_true"), py::arg("k"), py::arg("rng"));

  m.def("main", [](std::vector<std::string> args) {
          args.insert(args.begin(), "bbtrank");
          std::vector<const char*> argv;
          for (const auto& a : args) argv.push_back(a.c_str());
          py::scoped_ostream_redirect out_redirect;
          return run_cli(static_cast<int>(argv.size()), argv.data(), std::cout, std::cerr);
        },
        py::arg("args"), "Runs the command-line interface; returns the exit code");
}
