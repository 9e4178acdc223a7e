#include <algorithm>
#include <cmath>
#include <limits>

#include "zeno/tomography.hpp"

namespace zeno {

namespace {

// Mutual information contribution of one bin with class masses f[k], uniform class prior.
double bin_information(const std::vector<double>& f) {
  const double k_inv = 1.0 / static_cast<double>(f.size());
  double mean = 0.0;
  for (double x : f) mean += x;
  mean *= k_inv;
  if (mean <= 0.0) return 0.0;
  double s = 0.0;
  for (double x : f)
    if (x > 0.0) s += k_inv * x * std::log(x / mean);
  return s;
}

// Class-conditional count distributions unmixed from references with known class mixtures.
std::vector<std::vector<double>> unmix(const ReferenceSet& refs, int n_ions, int n_counts) {
  const int n_classes = n_ions + 1;
  std::vector<std::vector<double>> q;
  for (double phase : refs.phases) q.push_back(reference_class_probabilities(n_ions, phase));

  std::vector<double> effective(n_classes, 0.0);
  for (std::size_t h = 0; h < refs.histograms.size(); ++h)
    for (int k = 0; k < n_classes; ++k) effective[k] += q[h][k] * static_cast<double>(refs.histograms[h].shots);
  for (int k = 0; k < n_classes; ++k)
    if (effective[k] < 100.0)
      throw FitError("held-out references give " + std::to_string(effective[k]) + " effective shots for class " +
                     std::to_string(k) + " (need >= 100)");

  std::vector<std::vector<double>> f(n_classes, std::vector<double>(n_counts, 1.0 / n_counts));
  std::vector<std::vector<double>> acc(n_classes, std::vector<double>(n_counts));
  for (int it = 0; it < 5000; ++it) {
    for (auto& row : acc) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t h = 0; h < refs.histograms.size(); ++h) {
      for (const auto& [c, n] : refs.histograms[h].counts) {
        double mix = 0.0;
        for (int k = 0; k < n_classes; ++k) mix += q[h][k] * f[k][c];
        if (mix <= 0.0) continue;
        for (int k = 0; k < n_classes; ++k) acc[k][c] += static_cast<double>(n) * q[h][k] * f[k][c] / mix;
      }
    }
    double change = 0.0;
    for (int k = 0; k < n_classes; ++k) {
      double total = 0.0;
      for (double x : acc[k]) total += x;
      for (int c = 0; c < n_counts; ++c) {
        const double next = acc[k][c] / total;
        change = std::max(change, std::abs(next - f[k][c]));
        f[k][c] = next;
      }
    }
    if (change < 1e-12) break;
  }
  return f;
}

}  // namespace

BinChoice choose_bins(const ReferenceSet& held_out, int n_ions, int n_bins) {
  if (n_bins < 2) throw std::invalid_argument("n_bins must be >= 2");
  if (held_out.histograms.size() != held_out.phases.size() || held_out.histograms.empty())
    throw std::invalid_argument("held-out references need one histogram per phase");
  int max_count = 0;
  for (const auto& h : held_out.histograms) {
    h.validate();
    if (h.shots == 0) throw FitError("empty held-out reference histogram");
    max_count = std::max(max_count, h.max_count());
  }
  const int n_counts = max_count + 1;
  if (n_bins > n_counts)
    throw std::invalid_argument("n_bins exceeds the number of observed count values (" + std::to_string(n_counts) +
                                ")");

  const auto f = unmix(held_out, n_ions, n_counts);
  const int n_classes = n_ions + 1;

  // prefix[c][k]: class-k mass of counts below c
  std::vector<std::vector<double>> prefix(n_counts + 1, std::vector<double>(n_classes, 0.0));
  for (int c = 0; c < n_counts; ++c)
    for (int k = 0; k < n_classes; ++k) prefix[c + 1][k] = prefix[c][k] + f[k][c];
  auto info = [&](int lo, int hi) {
    std::vector<double> m(n_classes);
    for (int k = 0; k < n_classes; ++k) m[k] = prefix[hi][k] - prefix[lo][k];
    return bin_information(m);
  };

  BinChoice out;
  for (int c = 0; c < n_counts; ++c) out.full_information += info(c, c + 1);

  // best[j][e]: max information with j bins covering counts [0, e)
  const double neg = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(n_bins + 1, std::vector<double>(n_counts + 1, neg));
  std::vector<std::vector<int>> arg(n_bins + 1, std::vector<int>(n_counts + 1, -1));
  best[0][0] = 0.0;
  for (int j = 1; j <= n_bins; ++j) {
    for (int e = j; e <= n_counts; ++e) {
      for (int s = j - 1; s < e; ++s) {
        if (best[j - 1][s] == neg) continue;
        const double v = best[j - 1][s] + info(s, e);
        // strict improvement only, so equal splits keep the lowest cut
        if (v > best[j][e] + 1e-14 * std::max(1.0, std::abs(v))) {
          best[j][e] = v;
          arg[j][e] = s;
        }
      }
    }
  }
  out.information = best[n_bins][n_counts];
  std::vector<int> cuts;
  int e = n_counts;
  for (int j = n_bins; j > 1; --j) {
    const int s = arg[j][e];
    cuts.push_back(s);
    e = s;
  }
  std::reverse(cuts.begin(), cuts.end());
  out.boundaries = std::move(cuts);
  return out;
}

}  // namespace zeno
