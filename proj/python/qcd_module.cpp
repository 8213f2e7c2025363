#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "qcd/bounds.hpp"
#include "qcd/detector.hpp"
#include "qcd/dist.hpp"
#include "qcd/montecarlo.hpp"
#include "qcd/oracle.hpp"

namespace py = pybind11;
using namespace qcd;

namespace {

ChangePoint to_change_point(const std::optional<std::int64_t>& nu) {
  return nu ? ChangePoint::at(*nu) : ChangePoint::never();
}

py::dict report_dict(const EstimationReport& report) {
  py::dict out;
  out["instance"] = report.instance;
  out["trials"] = report.trials;
  out["successes"] = report.successes;
  out["point"] = report.point;
  out["ci_low"] = report.ci_low;
  out["ci_high"] = report.ci_high;
  out["confidence"] = report.confidence;
  out["master_seed"] = report.master_seed;
  return out;
}

py::dict pmf_dict(const OraclePmf& pmf) {
  py::dict out;
  out["horizon"] = pmf.horizon;
  out["p_stop"] = pmf.p_stop;
  out["p_censored"] = pmf.p_censored;
  return out;
}

}  // namespace

PYBIND11_MODULE(qcd_native, m) {
  m.doc() = "Finite-horizon quickest change detection: TVT-CuSum detector, latency bounds, "
            "exact oracles and Monte Carlo estimators";

  py::register_exception<UnsupportedInstanceError>(m, "UnsupportedInstanceError");

  py::class_<DistributionPair>(m, "DistributionPair")
      .def_static("gaussian_mean_shift", &DistributionPair::gaussian_mean_shift, py::arg("mu"),
                  py::arg("sigma") = 1.0)
      .def_static("bernoulli", &DistributionPair::bernoulli, py::arg("p0"), py::arg("p1"))
      .def_static("discrete_table", &DistributionPair::discrete_table, py::arg("p0"),
                  py::arg("p1"))
      .def("log_likelihood_ratio", &DistributionPair::log_likelihood_ratio, py::arg("x"))
      .def("cumulant_gen_fn", &DistributionPair::cumulant_gen_fn, py::arg("theta"))
      .def("channel_constant", &DistributionPair::channel_constant)
      .def("kl_divergence", &DistributionPair::kl_divergence)
      .def("is_discrete", &DistributionPair::is_discrete)
      .def("__repr__", &DistributionPair::describe);

  py::class_<ThresholdPolicy>(m, "ThresholdPolicy")
      .def_static("fixed", &ThresholdPolicy::fixed, py::arg("b"))
      .def_static("time_varying", &ThresholdPolicy::time_varying, py::arg("delta_f"),
                  py::arg("r"))
      .def("threshold_at", &ThresholdPolicy::threshold_at, py::arg("n"))
      .def("__repr__", &ThresholdPolicy::describe);

  m.def("zeta", &zeta, py::arg("r"));
  m.def("latency_bound_at_theta", &latency_bound_at_theta, py::arg("pair"), py::arg("horizon"),
        py::arg("delta_f"), py::arg("delta_d"), py::arg("r"), py::arg("theta"));
  m.def(
      "latency_upper_bound",
      [](const DistributionPair& pair, std::int64_t horizon, double delta_f, double delta_d,
         double r) {
        const UpperBoundResult result = latency_upper_bound(pair, horizon, delta_f, delta_d, r);
        return py::make_tuple(result.theta_star, result.d_bar);
      },
      py::arg("pair"), py::arg("horizon"), py::arg("delta_f"), py::arg("delta_d"), py::arg("r"),
      "Returns (theta_star, d_bar)");
  m.def("miss_probability_bound", &miss_probability_bound, py::arg("pair"), py::arg("nu"),
        py::arg("d"), py::arg("delta_f"), py::arg("r"), py::arg("theta"));
  m.def("asymptotic_lower_bound", &asymptotic_lower_bound, py::arg("pair"), py::arg("horizon"),
        py::arg("delta_f"), py::arg("delta_d"));

  m.def(
      "cusum_statistic_batch",
      [](const std::vector<double>& llrs) {
        return cusum_statistic_batch(std::span<const double>(llrs));
      },
      py::arg("llrs"));
  m.def(
      "run_detector",
      [](const DistributionPair& pair, const ThresholdPolicy& policy,
         const std::vector<double>& observations) -> std::optional<std::int64_t> {
        const StoppingOutcome outcome =
            run_detector(pair, policy, std::span<const double>(observations));
        if (!outcome.stopped()) return std::nullopt;
        return outcome.stop_time();
      },
      py::arg("pair"), py::arg("policy"), py::arg("observations"),
      "Returns the stopping time, or None when censored at the end of the stream");
  m.def(
      "sample_trajectory",
      [](const DistributionPair& pair, const std::optional<std::int64_t>& nu,
         std::int64_t horizon, std::uint64_t seed, std::uint64_t stream) {
        RandomStream rng(seed, stream);
        return sample_trajectory({pair, to_change_point(nu), horizon}, rng);
      },
      py::arg("pair"), py::arg("nu"), py::arg("horizon"), py::arg("seed"),
      py::arg("stream") = 0);

  m.def(
      "exact_stopping_distribution",
      [](const DistributionPair& pair, const ThresholdPolicy& policy, std::int64_t horizon,
         const std::optional<std::int64_t>& nu) {
        return pmf_dict(exact_stopping_distribution(pair, policy, horizon, to_change_point(nu)));
      },
      py::arg("pair"), py::arg("policy"), py::arg("horizon"), py::arg("nu") = py::none());
  m.def("exact_false_alarm", &exact_false_alarm, py::arg("pair"), py::arg("policy"),
        py::arg("horizon"));
  m.def(
      "exact_high_prob_latency",
      [](const DistributionPair& pair, const ThresholdPolicy& policy, std::int64_t horizon,
         double delta_d) -> std::optional<std::int64_t> {
        const LatencyResult result = exact_high_prob_latency(pair, policy, horizon, delta_d);
        if (!result.feasible) return std::nullopt;
        return result.d;
      },
      py::arg("pair"), py::arg("policy"), py::arg("horizon"), py::arg("delta_d"),
      "Returns the exact d*, or None when infeasible within the horizon");
  m.def(
      "window_bound_witness",
      [](const DistributionPair& pair, const ThresholdPolicy& policy, std::int64_t horizon,
         std::int64_t d, double delta_f) {
        const OraclePmf pmf =
            exact_stopping_distribution(pair, policy, horizon, ChangePoint::never());
        const WindowWitness witness = window_bound_witness(pmf, horizon, d, delta_f);
        py::dict out;
        out["nu"] = witness.nu;
        out["mass"] = witness.mass;
        out["budget"] = witness.budget;
        return out;
      },
      py::arg("pair"), py::arg("policy"), py::arg("horizon"), py::arg("d"), py::arg("delta_f"));

  m.def(
      "estimate_false_alarm",
      [](const DistributionPair& pair, const ThresholdPolicy& policy, std::int64_t horizon,
         std::int64_t trials, std::uint64_t seed, int workers) {
        SimOptions options;
        options.workers = workers;
        return report_dict(estimate_false_alarm(pair, policy, horizon, trials, seed, options));
      },
      py::arg("pair"), py::arg("policy"), py::arg("horizon"), py::arg("trials"), py::arg("seed"),
      py::arg("workers") = 0);
  m.def(
      "estimate_miss",
      [](const DistributionPair& pair, const ThresholdPolicy& policy, std::int64_t horizon,
         std::int64_t nu, std::int64_t d, std::int64_t trials, std::uint64_t seed, int workers) {
        SimOptions options;
        options.workers = workers;
        return report_dict(estimate_miss(pair, policy, horizon, nu, d, trials, seed, options));
      },
      py::arg("pair"), py::arg("policy"), py::arg("horizon"), py::arg("nu"), py::arg("d"),
      py::arg("trials"), py::arg("seed"), py::arg("workers") = 0);
  m.def(
      "empirical_latency",
      [](const DistributionPair& pair, const ThresholdPolicy& policy, std::int64_t horizon,
         double delta_d, const std::vector<std::int64_t>& nu_grid, std::int64_t trials,
         std::uint64_t seed, int workers) {
        SimOptions options;
        options.workers = workers;
        const LatencyEstimate estimate =
            empirical_latency(pair, policy, horizon, delta_d, nu_grid, trials, seed, options);
        py::dict out;
        out["feasible"] = estimate.feasible;
        out["d_hat"] = estimate.d_hat;
        out["d_ci_low"] = estimate.d_ci_low;
        out["d_ci_high"] = estimate.d_ci_high;
        py::list per_nu;
        for (const NuLatencyReport& nu_report : estimate.per_nu) {
          py::dict row;
          row["nu"] = nu_report.nu;
          row["miss_at_d_hat"] = report_dict(nu_report.miss_at_d_hat);
          row["delay_q50"] = nu_report.delay_q50;
          row["delay_q90"] = nu_report.delay_q90;
          row["delay_q_target"] = nu_report.delay_q_target;
          per_nu.append(row);
        }
        out["per_nu"] = per_nu;
        return out;
      },
      py::arg("pair"), py::arg("policy"), py::arg("horizon"), py::arg("delta_d"),
      py::arg("nu_grid"), py::arg("trials"), py::arg("seed"), py::arg("workers") = 0);
  m.def("default_nu_grid", &default_nu_grid, py::arg("horizon"), py::arg("d_cap"));
}
