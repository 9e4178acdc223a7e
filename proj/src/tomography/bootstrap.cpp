#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "json.hpp"

#include "fit_internal.hpp"

namespace zeno {

namespace {

std::vector<long> multinomial(long n, const std::vector<double>& p, std::mt19937_64& rng) {
  std::vector<long> out(p.size(), 0);
  double rest = 1.0;
  long left = n;
  for (std::size_t b = 0; b + 1 < p.size() && left > 0; ++b) {
    const double q = rest > 0.0 ? std::clamp(p[b] / rest, 0.0, 1.0) : 0.0;
    std::binomial_distribution<long> draw(left, q);
    out[b] = draw(rng);
    left -= out[b];
    rest -= p[b];
  }
  out.back() += left;
  return out;
}

long total(const std::vector<long>& v) {
  long s = 0;
  for (long x : v) s += x;
  return s;
}

// Linear-interpolated quantile of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

TomographyEstimate bootstrap(const FitInputs& inputs, const TomographyEstimate& estimate, int resamples,
                             std::uint64_t seed, const FitOptions& opts, int threads) {
  if (resamples < 0) throw std::invalid_argument("resamples must be >= 0");
  if (resamples == 0) return estimate;
  const detail::BinnedProblem base = detail::make_problem(inputs);
  const auto model = detail::model_bin_probabilities(base, estimate.rho_ml, estimate.bin_distributions);

  std::vector<double> fidelities(resamples);
  std::vector<double> llrs(resamples);
  std::vector<std::string> failures(resamples);

  auto run_one = [&](int r) {
    for (std::uint64_t attempt = 0; attempt < 3; ++attempt) {
      std::mt19937_64 rng(stream_seed(stream_seed(seed, static_cast<std::uint64_t>(r)), attempt));
      detail::BinnedProblem p = base;
      std::size_t h = 0;
      for (auto& n : p.ref_counts) n = multinomial(total(n), model[h++], rng);
      for (auto& n : p.data_counts) n = multinomial(total(n), model[h++], rng);
      try {
        const TomographyEstimate e = detail::fit_binned(p, opts, &estimate);
        fidelities[r] = e.fidelity;
        llrs[r] = e.llr_saturated;
        failures[r].clear();
        return;
      } catch (const Error& ex) {
        failures[r] = ex.what();
      }
    }
  };

  int n_threads = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min(n_threads, resamples);
  if (n_threads == 1) {
    for (int r = 0; r < resamples; ++r) run_one(r);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        for (int r = t; r < resamples; r += n_threads) run_one(r);
      });
    for (auto& th : pool) th.join();
  }
  for (int r = 0; r < resamples; ++r)
    if (!failures[r].empty())
      throw FitError("bootstrap resample " + std::to_string(r) + " failed three draws: " + failures[r]);

  TomographyEstimate out = estimate;
  std::sort(fidelities.begin(), fidelities.end());
  out.epsilon_0 = 0.5 * (quantile(fidelities, 0.84) - quantile(fidelities, 0.16));
  const auto below = std::count_if(llrs.begin(), llrs.end(), [&](double x) { return x < estimate.llr_saturated; });
  out.lr_percentile = 100.0 * static_cast<double>(below) / static_cast<double>(resamples);
  out.resamples = resamples;
  apply_interval(out);
  return out;
}

SweepResult systematic_sweep(const FitInputs& inputs, const TomographyEstimate& baseline, int n_points,
                             double epsilon_hi, double epsilon_max, const FitOptions& opts) {
  if (n_points < 2) throw std::invalid_argument("sweep needs n_points >= 2");
  if (!(epsilon_hi > 0.0 && epsilon_hi < 0.5)) throw std::invalid_argument("epsilon_hi must be in (0, 0.5)");
  SweepResult out;
  detail::BinnedProblem p = detail::make_problem(inputs);
  for (int i = 0; i < n_points; ++i) {
    const double eps = inputs.reference_epsilon + epsilon_hi * i / (n_points - 1);
    out.epsilons.push_back(eps);
    if (i == 0) {
      out.infidelities.push_back(1.0 - baseline.fidelity);
      continue;
    }
    p.ref_classes = detail::reference_classes(inputs.n_ions, inputs.references.phases, eps);
    out.infidelities.push_back(1.0 - detail::fit_binned(p, opts, &baseline).fidelity);
  }

  const double n = n_points;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n_points; ++i) {
    sx += out.epsilons[i];
    sy += out.infidelities[i];
    sxx += out.epsilons[i] * out.epsilons[i];
    sxy += out.epsilons[i] * out.infidelities[i];
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.intercept = (sy - out.slope * sx) / n;
  out.epsilon_syst = std::abs(out.slope) * epsilon_max;

  const double span = std::abs(out.slope) * epsilon_hi;
  double worst = 0.0;
  for (int i = 0; i < n_points; ++i)
    worst = std::max(worst, std::abs(out.infidelities[i] - (out.intercept + out.slope * out.epsilons[i])));
  out.nonlinear = worst > 0.2 * span;
  return out;
}

void apply_interval(TomographyEstimate& est) {
  est.ci_lower = std::clamp(est.fidelity - est.epsilon_0 - est.epsilon_syst, 0.0, 1.0);
  est.ci_upper = std::clamp(est.fidelity + est.epsilon_0, 0.0, 1.0);
}

std::string estimate_json(const TomographyEstimate& est) {
  nlohmann::ordered_json j;
  j["fidelity"] = est.fidelity;
  if (est.ci_lower && est.ci_upper)
    j["ci"] = {*est.ci_lower, *est.ci_upper};
  else
    j["ci"] = nullptr;
  j["populations"] = est.populations;
  j["lr_percentile"] = est.lr_percentile ? nlohmann::ordered_json(*est.lr_percentile) : nlohmann::ordered_json();
  j["epsilon_syst"] = est.epsilon_syst;
  j["epsilon_0"] = est.epsilon_0;
  j["resamples"] = est.resamples;
  j["iterations"] = est.iterations;
  j["converged"] = est.converged;
  j["log_likelihood"] = est.log_likelihood;
  return j.dump(2);
}

}  // namespace zeno
