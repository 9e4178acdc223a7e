#include <algorithm>
#include <cmath>

#include "fit_internal.hpp"

namespace zeno::detail {

std::vector<std::vector<double>> reference_classes(int n_ions, const std::vector<double>& phases, double epsilon) {
  std::vector<std::vector<double>> q;
  for (double phase : phases) q.push_back(reference_class_probabilities(n_ions, phase, epsilon));
  return q;
}

BinnedProblem make_problem(const FitInputs& inputs) {
  const auto& d = inputs.design;
  if (d.n_ions != inputs.n_ions) throw std::invalid_argument("design and fit inputs disagree on n_ions");
  if (inputs.data.size() != d.unitaries.size())
    throw std::invalid_argument("need one data histogram per design rotation");
  if (inputs.references.histograms.size() != inputs.references.phases.size() || inputs.references.phases.empty())
    throw std::invalid_argument("need one reference histogram per phase");

  BinnedProblem p;
  p.n_ions = inputs.n_ions;
  p.n_bins = static_cast<int>(inputs.boundaries.size()) + 1;
  p.ref_classes = reference_classes(inputs.n_ions, inputs.references.phases, inputs.reference_epsilon);
  for (const auto& h : inputs.references.histograms) {
    h.validate();
    if (h.shots == 0) throw FitError("empty reference histogram '" + h.label + "'");
    p.ref_counts.push_back(rebin(h, inputs.boundaries).bin_counts);
  }
  for (const auto& h : inputs.data) {
    h.validate();
    if (h.shots == 0) throw FitError("empty data histogram '" + h.label + "'");
    p.data_counts.push_back(rebin(h, inputs.boundaries).bin_counts);
  }
  p.povm = d.povm;
  for (const auto& u : d.unitaries) {
    std::vector<CMatrix> ops;
    for (const auto& a : d.povm) ops.push_back(u.adjoint() * a * u);
    p.class_ops.push_back(std::move(ops));
  }
  p.target = d.target;
  return p;
}

namespace {

using Table = std::vector<std::vector<double>>;

Table data_classes(const BinnedProblem& p, const CMatrix& rho) {
  Table out(p.class_ops.size(), std::vector<double>(p.n_ions + 1));
  for (std::size_t i = 0; i < p.class_ops.size(); ++i)
    for (int k = 0; k <= p.n_ions; ++k)
      out[i][k] = std::max(0.0, (p.class_ops[i][k].cwiseProduct(rho.transpose())).sum().real());
  return out;
}

double mix(const std::vector<double>& w, const Table& pi, int b) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * pi[k][b];
  return s;
}

double histogram_ll(const std::vector<long>& n, const std::vector<double>& w, const Table& pi) {
  double s = 0.0;
  for (std::size_t b = 0; b < n.size(); ++b) {
    if (n[b] == 0) continue;
    const double m = mix(w, pi, static_cast<int>(b));
    if (m <= 0.0) return -std::numeric_limits<double>::infinity();
    s += static_cast<double>(n[b]) * std::log(m);
  }
  return s;
}

double reference_ll(const BinnedProblem& p, const Table& pi) {
  double s = 0.0;
  for (std::size_t h = 0; h < p.ref_counts.size(); ++h) s += histogram_ll(p.ref_counts[h], p.ref_classes[h], pi);
  return s;
}

double data_ll(const BinnedProblem& p, const Table& classes, const Table& pi) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.data_counts.size(); ++i) s += histogram_ll(p.data_counts[i], classes[i], pi);
  return s;
}

// One EM step on the class bin distributions over every histogram.
Table em_step(const BinnedProblem& p, const Table& classes, const Table& pi) {
  const int n_classes = p.n_ions + 1;
  Table acc(n_classes, std::vector<double>(p.n_bins, 0.0));
  auto accumulate = [&](const std::vector<long>& n, const std::vector<double>& w) {
    for (int b = 0; b < p.n_bins; ++b) {
      if (n[b] == 0) continue;
      const double m = mix(w, pi, b);
      if (m <= 0.0) continue;
      for (int k = 0; k < n_classes; ++k) acc[k][b] += static_cast<double>(n[b]) * w[k] * pi[k][b] / m;
    }
  };
  for (std::size_t h = 0; h < p.ref_counts.size(); ++h) accumulate(p.ref_counts[h], p.ref_classes[h]);
  for (std::size_t i = 0; i < p.data_counts.size(); ++i) accumulate(p.data_counts[i], classes[i]);
  Table next = pi;
  for (int k = 0; k < n_classes; ++k) {
    double total = 0.0;
    for (double x : acc[k]) total += x;
    if (total <= 0.0) continue;
    for (int b = 0; b < p.n_bins; ++b) next[k][b] = acc[k][b] / total;
  }
  return next;
}

CMatrix r_operator(const BinnedProblem& p, const CMatrix& rho, const Table& pi) {
  const Table classes = data_classes(p, rho);
  const Eigen::Index dim = rho.rows();
  CMatrix r = CMatrix::Zero(dim, dim);
  double total = 0.0;
  for (std::size_t i = 0; i < p.data_counts.size(); ++i) {
    std::vector<double> coef(p.n_ions + 1, 0.0);
    for (int b = 0; b < p.n_bins; ++b) {
      const long n = p.data_counts[i][b];
      if (n == 0) continue;
      total += static_cast<double>(n);
      const double m = mix(classes[i], pi, b);
      if (m <= 0.0) continue;
      for (int k = 0; k <= p.n_ions; ++k) coef[k] += static_cast<double>(n) * pi[k][b] / m;
    }
    for (int k = 0; k <= p.n_ions; ++k) r += coef[k] * p.class_ops[i][k];
  }
  return r / total;
}

CMatrix normalized(const CMatrix& m) {
  CMatrix h = 0.5 * (m + m.adjoint());
  return h / h.trace().real();
}

}  // namespace

std::vector<std::vector<double>> model_bin_probabilities(const BinnedProblem& p, const CMatrix& rho,
                                                         const std::vector<std::vector<double>>& pi) {
  std::vector<std::vector<double>> out;
  auto row = [&](const std::vector<double>& w) {
    std::vector<double> r(p.n_bins);
    for (int b = 0; b < p.n_bins; ++b) r[b] = mix(w, pi, b);
    return r;
  };
  for (const auto& w : p.ref_classes) out.push_back(row(w));
  for (const auto& w : data_classes(p, rho)) out.push_back(row(w));
  return out;
}

double saturated_llr(const BinnedProblem& p, const CMatrix& rho, const std::vector<std::vector<double>>& pi) {
  const auto model = model_bin_probabilities(p, rho, pi);
  double s = 0.0;
  std::size_t h = 0;
  auto add = [&](const std::vector<long>& n) {
    long total = 0;
    for (long x : n) total += x;
    for (int b = 0; b < p.n_bins; ++b) {
      if (n[b] == 0) continue;
      const double freq = static_cast<double>(n[b]) / static_cast<double>(total);
      s += 2.0 * static_cast<double>(n[b]) * std::log(freq / std::max(model[h][b], 1e-300));
    }
    ++h;
  };
  for (const auto& n : p.ref_counts) add(n);
  for (const auto& n : p.data_counts) add(n);
  return s;
}

TomographyEstimate fit_binned(const BinnedProblem& p, const FitOptions& opts, const TomographyEstimate* warm) {
  const int n_classes = p.n_ions + 1;
  const Eigen::Index dim = Eigen::Index(1) << p.n_ions;

  CMatrix rho = CMatrix::Identity(dim, dim) / static_cast<double>(dim);
  Table pi(n_classes, std::vector<double>(p.n_bins, 1.0 / p.n_bins));
  if (warm && warm->rho_ml.rows() == dim && static_cast<int>(warm->bin_distributions.size()) == n_classes &&
      static_cast<int>(warm->bin_distributions[0].size()) == p.n_bins) {
    rho = warm->rho_ml;
    pi = warm->bin_distributions;
  } else {
    // start the bin distributions from the references alone
    BinnedProblem refs_only;
    refs_only.n_ions = p.n_ions;
    refs_only.n_bins = p.n_bins;
    refs_only.ref_classes = p.ref_classes;
    refs_only.ref_counts = p.ref_counts;
    for (int it = 0; it < 500; ++it) pi = em_step(refs_only, {}, pi);
  }
  // keep every bin reachable so the first steps cannot lock a probability at zero
  for (auto& row : pi) {
    double s = 0.0;
    for (double& x : row) {
      x = x + 1e-9;
      s += x;
    }
    for (double& x : row) x /= s;
  }

  TomographyEstimate est;
  Table classes = data_classes(p, rho);
  double ll = reference_ll(p, pi) + data_ll(p, classes, pi);
  if (!std::isfinite(ll)) throw FitError("initial likelihood is not finite");

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const double start = ll;

    // (a) class bin distributions with rho fixed
    Table next_pi = em_step(p, classes, pi);
    const double ll_pi = reference_ll(p, next_pi) + data_ll(p, classes, next_pi);
    if (ll_pi >= ll) {
      pi = std::move(next_pi);
      ll = ll_pi;
    }

    // (b) RrhoR on rho with the bin distributions fixed
    const double ref_part = reference_ll(p, pi);
    const CMatrix r = r_operator(p, rho, pi);
    CMatrix cand = normalized(r * rho * r);
    Table cand_classes = data_classes(p, cand);
    double cand_ll = ref_part + data_ll(p, cand_classes, pi);
    if (!(cand_ll >= ll)) {
      const CMatrix id = CMatrix::Identity(dim, dim);
      for (double lambda = 0.5; lambda > 1e-8; lambda *= 0.5) {
        const CMatrix g = id + lambda * r;
        cand = normalized(g * rho * g);
        cand_classes = data_classes(p, cand);
        cand_ll = ref_part + data_ll(p, cand_classes, pi);
        if (cand_ll >= ll) break;
      }
    }
    if (cand_ll >= ll) {
      rho = std::move(cand);
      classes = std::move(cand_classes);
      ll = cand_ll;
    }

    est.likelihood_trace.push_back(ll);
    est.iterations = outer + 1;
    if ((ll - start) <= opts.rel_tol * std::abs(start)) {
      est.converged = true;
      break;
    }
  }

  est.rho_ml = rho;
  est.bin_distributions = pi;
  est.log_likelihood = ll;
  est.fidelity = std::clamp((p.target.adjoint() * rho * p.target)(0, 0).real(), 0.0, 1.0);
  for (const auto& a : p.povm) est.populations.push_back((a * rho).trace().real());
  est.llr_saturated = saturated_llr(p, rho, pi);
  return est;
}

}  // namespace zeno::detail

namespace zeno {

TomographyEstimate fit_ml(const FitInputs& inputs, const FitOptions& opts, const TomographyEstimate* warm_start) {
  if (opts.max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
  return detail::fit_binned(detail::make_problem(inputs), opts, warm_start);
}

}  // namespace zeno
