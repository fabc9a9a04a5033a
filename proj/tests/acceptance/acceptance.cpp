#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "nkmart/cli_runner.hpp"
#include "nkmart/exponential.hpp"
#include "nkmart/follmer_duality.hpp"
#include "nkmart/lower_functions.hpp"
#include "nkmart/nk_diagnostics.hpp"
#include "nkmart/scenarios.hpp"
#include "nkmart/sde_engine.hpp"
#include "oracles.hpp"

using namespace nkmart;

namespace {

const double kHitOracle = 2.0 - 2.0 * nkmart::testing::phi_cdf(1.0);

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("CRITERION %d: %s | %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

sde::SimulationParams sim(std::size_t n, double dt, std::uint64_t seed, std::size_t steps = 10) {
  sde::SimulationParams p;
  p.n_paths = n;
  p.record_steps = steps;
  p.integrator.dt_max = dt;
  p.rng = {seed, 0};
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void criteria_1_to_4() {
  const auto b3 = scenarios::make_scenario("bessel3_pair");
  const auto& recip = b3.side("reciprocal");
  const auto p_bundle = sde::simulate(recip.model, sim(100000, 5e-4, 42));
  const auto q_bundle = sde::simulate(recip.dual->q_side, sim(100000, 5e-4, 43));
  const auto report = duality::consistency_report(p_bundle, q_bundle, 1.0);

  const double d1 = report.direct.value;
  verdict(1, std::abs(d1 - kHitOracle) <= 0.01,
          fmt("direct defect %.5f +- %.5f, oracle %.5f", d1, report.direct.std_error, kHitOracle));

  const double d2 = report.dual.value;
  verdict(2, std::abs(d2 - d1) <= 0.01 && report.consistent,
          fmt("dual defect %.5f +- %.5f, |dual - direct| = %.5f, consistent = %.0f", d2,
              report.dual.std_error, std::abs(d2 - d1), report.consistent ? 1.0 : 0.0));

  const auto& truth = b3.side("true");
  const auto true_bundle = sde::simulate(truth.model, sim(100000, 5e-4, 44));
  const auto ely_true = duality::defect_via_ely(true_bundle, 1.0, duality::default_y_grid());
  const double e = report.ely.estimate.value;
  verdict(3,
          report.ely.verdict == duality::TailVerdict::kPlateau && std::abs(e - 0.317) <= 0.03 &&
              ely_true.estimate.value <= 0.03,
          fmt("strict side plateau %.4f +- %.4f (target 0.317 +- 0.03), true side %.4f", e,
              report.ely.estimate.std_error, ely_true.estimate.value) +
              " (" + duality::to_string(ely_true.verdict) + ")");

  const auto stopped = sde::simulate(scenarios::bm_absorbed(), sim(100000, 5e-4, 45));
  const auto ds = duality::defect_direct(stopped, 1.0);
  const auto dt = duality::defect_direct(true_bundle, 1.0);
  verdict(4, std::abs(ds.value) <= 0.01 && std::abs(dt.value) <= 0.01,
          fmt("stopped BM defect %.5f +- %.5f, BES(3) true-side defect %.5f +- %.5f", ds.value,
              ds.std_error, dt.value, dt.std_error));
}

void criterion_5() {
  nk::ExpectationConfig cfg;
  cfg.n_direct = 80000;
  cfg.n_dual = 80000;
  cfg.rng = {51, 0};
  const auto rows = nk::classify_nk_order(2.0, {1.5, 2.0}, 1.0, cfg);
  const double oracle = scenarios::nk_order_analytic(2.0, 1.5, 1.0);
  const auto& r15 = rows[0].estimate;
  const auto& r2 = rows[1].estimate;
  verdict(5, std::abs(r15.value - oracle) <= 0.03 && !r15.diverging && r2.diverging,
          fmt("b = 1.5: %.5f +- %.5f (oracle %.5f); b = 2 diverging = %.0f", r15.value,
              r15.std_error, oracle, r2.diverging ? 1.0 : 0.0) +
              fmt(", doubling means 1e4..8e4: %.3f %.3f %.3f %.3f", r2.doubling_means.at(0),
                  r2.doubling_means.at(1), r2.doubling_means.at(2), r2.doubling_means.at(3)) +
              fmt(", tail index %.3f", r2.tail_index));
}

void criterion_6() {
  nk::ExpectationConfig cfg;
  cfg.n_direct = 80000;
  cfg.n_dual = 80000;
  cfg.rng = {61, 0};
  const auto spec = nk::NKSpec::zero(0.5);
  const auto c1 = nk::estimate_nk_expectation(
      *scenarios::make_scenario("ou_exponent", {{"c", 1.0}}).default_side().dual, spec, 1.0, cfg);
  const auto c2 = nk::estimate_nk_expectation(
      *scenarios::make_scenario("ou_exponent", {{"c", 2.0}}).default_side().dual, spec, 1.0, cfg);
  const double oracle = scenarios::kazamaki_expectation(1.0);
  verdict(6, std::abs(c1.dual.value - oracle) <= 0.03 && !c1.dual.diverging && c2.dual.diverging,
          fmt("c = 1: %.5f +- %.5f (oracle %.5f); c = 2 diverging = %.0f", c1.dual.value,
              c1.dual.std_error, oracle, c2.dual.diverging ? 1.0 : 0.0) +
              fmt(" (tail index %.3f)", c2.dual.tail_index));
}

void criterion_7() {
  nk::KazamakiConfig cfg;
  cfg.rng = {71, 0};
  bool pass = true;
  std::string detail;
  const std::size_t expected[] = {0, 1, 2};
  int i = 0;
  for (double c : {1.0, 2.0, 3.0}) {
    const auto t = nk::iterative_kazamaki_check(c, 10, cfg);
    const bool ok = t.verdict == nk::Verdict::kMartingale && t.iterations == expected[i];
    pass = pass && ok;
    detail += fmt("c = %.0f: ", c) + nk::to_string(t.verdict) +
              fmt(" after %.0f iterations", static_cast<double>(t.iterations));
    const auto& last = t.steps.back();
    if (last.gate) {
      detail += fmt(" (gate %.3g, closed form %.4g)", last.gate->value, last.gate_closed_form);
    }
    detail += "; ";
    ++i;
  }
  verdict(7, pass, detail);
}

void criterion_8() {
  const lower::Classification expected[] = {lower::Classification::kLower,
                                            lower::Classification::kLower,
                                            lower::Classification::kUpper};
  lower::QuadratureConfig fine;
  fine.subintervals *= 2;
  bool pass = true;
  std::string detail;
  const auto corpus = lower::reference_corpus();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto a = lower::kolmogorov_classify(corpus[i]).verdict;
    const auto b = lower::kolmogorov_classify(corpus[i], fine).verdict;
    pass = pass && a == expected[i] && b == a;
    detail += corpus[i].name + " " + lower::to_string(a) + "/" + lower::to_string(b) + "; ";
  }
  verdict(8, pass, detail);
}

void criterion_9() {
  const auto s = scenarios::make_scenario("bessel2_pair");
  const auto minus = sde::simulate(s.side("minus").model, sim(50000, 5e-4, 91));
  const auto plus = sde::simulate(s.side("plus").model, sim(50000, 5e-4, 92));
  const auto dm = duality::defect_direct(minus, 1.0);
  const auto dp = duality::defect_direct(plus, 1.0);
  std::vector<double> qm, qp;
  for (std::size_t p = 0; p < minus.n_paths(); ++p) qm.push_back(minus.qv(p)[10]);
  for (std::size_t p = 0; p < plus.n_paths(); ++p) qp.push_back(plus.qv(p)[10]);
  const double pv = mann_whitney_p_value(qm, qp);
  const bool pass = std::abs(dm.value) <= std::max(0.01, 3.0 * dm.std_error) && dp.value > 0.05 &&
                    dp.value > 3.0 * dp.std_error && pv > 0.05;
  verdict(9, pass,
          fmt("true side defect %.5f +- %.5f; strict side defect %.5f +- %.5f", dm.value,
              dm.std_error, dp.value, dp.std_error) +
              fmt("; quadratic variation Mann-Whitney p = %.3f", pv));
}

double roundtrip_rms(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const auto grid = make_uniform_grid(1.0, n);
  const double dt = 1.0 / static_cast<double>(n);
  double s = 0.0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> l{0.0}, qv{0.0};
    for (std::size_t k = 0; k < n; ++k) {
      l.push_back(l.back() + std::sqrt(dt) * nd(g));
      qv.push_back(qv.back() + dt);
    }
    const auto z = expo::stochastic_exponential(l, qv).z;
    const auto back = expo::stochastic_logarithm(z, grid);
    s += std::pow(back.l.back() - l.back(), 2) + std::pow(back.qv.back() - qv.back(), 2);
  }
  return std::sqrt(s / reps);
}

void criterion_10() {
  std::string detail;
  bool pass = true;

  const double e0 = roundtrip_rms(256, 101), e1 = roundtrip_rms(512, 102), e2 = roundtrip_rms(1024, 103);
  const bool rt = std::abs(e2 / e0 - 0.5) <= 0.1 && e1 < e0 && e2 < e1;
  pass = pass && rt;
  detail += fmt("round trip RMS %.4f %.4f %.4f (ratio over two halvings %.3f)", e0, e1, e2, e2 / e0);

  bool a1 = true;
  bool jensen = true;
  double worst = -1e300;
  for (const auto& sc : scenarios::catalog()) {
    for (const auto& side : sc.sides) {
      const auto b = sde::simulate(side.model, sim(20000, 1e-3, 103));
      const auto s1 = nk::nk_process(b, nk::NKSpec::zero(1.0));
      for (std::size_t p = 0; p < b.n_paths(); ++p) {
        const double z = b.z(p)[10];
        const double ls = s1.log_value(p, 10);
        a1 = a1 && (z < std::numeric_limits<double>::min() ? std::exp(ls) < std::numeric_limits<double>::min()
                                                           : std::abs(ls - std::log(z)) <= 1e-12 * (1 + std::abs(ls)));
      }
      std::vector<double> zs(b.n_paths());
      for (std::size_t p = 0; p < zs.size(); ++p) zs[p] = b.z(p)[10];
      const auto ez = summarize_mean(zs, b.seed());
      for (const auto [e, f] : {std::pair{2.0, 1.5}, std::pair{0.0, 0.5}}) {
        const auto se = nk::nk_process(b, nk::NKSpec::zero(e));
        const auto sf = nk::nk_process(b, nk::NKSpec::zero(f));
        std::vector<double> xe(b.n_paths()), xf(b.n_paths());
        for (std::size_t p = 0; p < xe.size(); ++p) {
          xe[p] = se.value(p, 10);
          xf[p] = sf.value(p, 10);
        }
        const auto me = summarize_mean(xe, b.seed());
        const auto mf = summarize_mean(xf, b.seed());
        const double r = (f - 1.0) / (e - 1.0);
        const double bound = std::pow(me.value, r) * std::pow(ez.value, 1.0 - r);
        const double gap = (mf.value - bound) / std::max(mf.std_error, 1e-300);
        worst = std::max(worst, gap);
        jensen = jensen && mf.value <= bound + 3.0 * mf.std_error;
      }
    }
  }
  pass = pass && a1 && jensen;
  detail += std::string("; a = 1 equals Z in log space: ") + (a1 ? "yes" : "no");
  detail += fmt("; Jensen ordering holds on all catalog sides: %.0f (worst excess %.2f std errors)",
                jensen ? 1.0 : 0.0, worst);

  const auto b = sde::simulate(scenarios::bes3_reciprocal(), sim(20000, 1e-3, 104, 20));
  std::mt19937_64 g(105);
  std::uniform_real_distribution<double> u(0.05, 0.95), lv(0.5, 4.0);
  bool monotone = true;
  for (int trial = 0; trial < 50; ++trial) {
    nk::StoppingFamily small{{nk::Deterministic{u(g)}}};
    nk::StoppingFamily large = small;
    for (int j = 0; j < 3; ++j) {
      large.rules.push_back(nk::Deterministic{u(g)});
      large.rules.push_back(nk::FunctionalThreshold{lv(g), 0.95});
    }
    const auto spec = nk::NKSpec::zero(0.25 + 0.05 * trial);
    monotone = monotone && nk::estimate_sup_over_family(b, spec, large).report.value >=
                               nk::estimate_sup_over_family(b, spec, small).report.value;
  }
  pass = pass && monotone;
  detail += std::string("; sup monotone under family enlargement: ") + (monotone ? "yes" : "no");

  const std::vector<double> tg{0.25, 0.5, 0.75, 1.0};
  sde::IntegratorConfig ic;
  const auto recip = nk::mean_monotonicity_check(scenarios::bes3_reciprocal(), nk::NKSpec::zero(1.0),
                                                 tg, 20000, ic, {106, 0});
  // exp(2B - 3t/2) for Brownian B has mean exp(t/2): a submartingale.
  const auto sub = nk::mean_monotonicity_check(scenarios::brownian_motion(0.0, 1.0),
                                               nk::NKSpec::zero(2.0), tg, 20000, ic, {107, 0});
  const bool mono = recip.verdict == nk::MonotonicityVerdict::kFails &&
                    sub.verdict == nk::MonotonicityVerdict::kPassesNecessary;
  pass = pass && mono;
  detail += std::string("; monotonicity check on 1/R: ") + nk::to_string(recip.verdict) +
            ", on submartingale: " + nk::to_string(sub.verdict);
  verdict(10, pass, detail);
}

void criterion_11() {
  cli::ExperimentConfig c;
  c.experiment = "defect";
  c.scenario = "bessel3_pair";
  c.params = {{"side", "reciprocal"}, {"t", 1.0}};
  c.n_paths = 100000;
  c.dt = 5e-4;
  c.seed = 42;
  const auto base = std::filesystem::temp_directory_path() / "nkmart_acceptance";
  std::filesystem::remove_all(base);
  c.output_dir = base / "run_a";
  const auto ra = cli::run_experiment(c);
  c.output_dir = base / "run_b";
  const auto rb = cli::run_experiment(c);
  const std::string a = slurp(base / "run_a" / "data.csv");
  const std::string b = slurp(base / "run_b" / "data.csv");
  verdict(11, ra.exit_code == 0 && rb.exit_code == 0 && !a.empty() && a == b,
          fmt("data.csv sizes %.0f and %.0f bytes, identical = %.0f", static_cast<double>(a.size()),
              static_cast<double>(b.size()), a == b ? 1.0 : 0.0));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  criteria_1_to_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("acceptance: %d of 11 criteria failed (%.0f s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
