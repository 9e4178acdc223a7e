#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "zeno/tomography.hpp"

namespace zeno {

void DetectionModel::validate() const {
  if (!(bright_mean > dark_mean) || !(dark_mean >= 0.0))
    throw std::invalid_argument("detection model needs bright_mean > dark_mean >= 0");
  if (!(pump_prob >= 0.0 && pump_prob < 1.0)) throw std::invalid_argument("pump_prob must be in [0, 1)");
}

void CountHistogram::add(int count, long n) {
  if (count < 0) throw std::invalid_argument("photon counts are non-negative");
  if (n < 0) throw std::invalid_argument("occurrences are non-negative");
  if (n == 0) return;
  counts[count] += n;
  shots += n;
}

void CountHistogram::validate() const {
  long total = 0;
  for (const auto& [c, n] : counts) {
    if (c < 0 || n < 0) throw std::invalid_argument("histogram has negative entries");
    total += n;
  }
  if (total != shots) throw std::invalid_argument("histogram occurrences do not sum to shots");
  if (!sequence.empty() && static_cast<long>(sequence.size()) != shots)
    throw std::invalid_argument("histogram sequence length differs from shots");
}

int CountHistogram::max_count() const { return counts.empty() ? 0 : counts.rbegin()->first; }

void write_histogram(std::ostream& os, const CountHistogram& h) {
  os << "# shots=" << h.shots << '\n';
  if (!h.label.empty()) os << "# label=" << h.label << '\n';
  for (const auto& [c, n] : h.counts) os << c << ' ' << n << '\n';
}

CountHistogram read_histogram(std::istream& is) {
  CountHistogram h;
  std::optional<long> declared;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const std::string body = line.substr(first + 1);
      const auto key_start = body.find_first_not_of(" \t");
      if (key_start == std::string::npos) continue;
      if (body.compare(key_start, 6, "shots=") == 0) {
        try {
          std::size_t used = 0;
          const std::string v = body.substr(key_start + 6);
          declared = std::stol(v, &used);
          if (v.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw ConfigError("bad shots header", lineno, static_cast<int>(first + key_start + 8));
        }
      } else if (body.compare(key_start, 6, "label=") == 0) {
        h.label = body.substr(key_start + 6);
        while (!h.label.empty() && (h.label.back() == '\r' || h.label.back() == ' ')) h.label.pop_back();
      }
      continue;
    }
    std::istringstream ls(line);
    long c = -1;
    long n = -1;
    std::string extra;
    if (!(ls >> c >> n) || (ls >> extra) || c < 0 || n < 0)
      throw ConfigError("expected '<count> <occurrences>'", lineno, static_cast<int>(first + 1));
    if (h.counts.count(static_cast<int>(c))) throw ConfigError("duplicate count value", lineno, static_cast<int>(first + 1));
    h.add(static_cast<int>(c), n);
  }
  if (declared && *declared != h.shots)
    throw ConfigError("shots header " + std::to_string(*declared) + " differs from occurrence sum " +
                      std::to_string(h.shots));
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(splitmix64(seed) ^ index); }

CountHistogram simulate_histogram(const std::vector<double>& bright_probabilities, const DetectionModel& model,
                                  long shots, std::uint64_t seed) {
  model.validate();
  if (shots < 0) throw std::invalid_argument("shots must be >= 0");
  if (bright_probabilities.empty()) throw std::invalid_argument("empty probability vector");
  double total = 0.0;
  for (double p : bright_probabilities) {
    if (!(p >= -1e-12)) throw std::invalid_argument("negative bright probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("bright probabilities must sum to 1");
  const int n_ions = static_cast<int>(bright_probabilities.size()) - 1;

  std::vector<double> w(bright_probabilities);
  for (double& x : w) x = std::max(0.0, x);
  std::mt19937_64 rng(stream_seed(seed, 0));
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CountHistogram h;
  h.sequence.reserve(static_cast<std::size_t>(shots));
  for (long s = 0; s < shots; ++s) {
    const int k = pick(rng);
    double mean = (n_ions - k) * model.dark_mean;
    for (int i = 0; i < k; ++i) {
      if (model.pump_prob > 0.0 && unit(rng) < model.pump_prob) {
        const double u = unit(rng);
        mean += u * model.bright_mean + (1.0 - u) * model.dark_mean;
      } else {
        mean += model.bright_mean;
      }
    }
    // a sum of independent Poisson counts is Poisson in the summed mean
    std::poisson_distribution<int> photons(mean);
    const int c = mean > 0.0 ? photons(rng) : 0;
    h.add(c);
    h.sequence.push_back(c);
  }
  return h;
}

Eigen::Matrix2cd rotation(double theta, double phi) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Eigen::Matrix2cd r;
  // -i sin(theta/2) (cos phi X + sin phi Y), X/Y in the (|up>, |down>) basis
  r(0, 0) = c;
  r(1, 1) = c;
  r(0, 1) = -kI * s * std::polar(1.0, -phi);
  r(1, 0) = -kI * s * std::polar(1.0, phi);
  return r;
}

CMatrix global_rotation(int n_ions, double theta, double phi) {
  const Eigen::Matrix2cd r = rotation(theta, phi);
  CMatrix u = CMatrix::Identity(1, 1);
  for (int i = 0; i < n_ions; ++i) {
    CMatrix next(u.rows() * 2, u.cols() * 2);
    for (Eigen::Index a = 0; a < u.rows(); ++a)
      for (Eigen::Index b = 0; b < u.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = u(a, b) * r;
    u = std::move(next);
  }
  return u;
}

std::vector<double> reference_phases() {
  std::vector<double> p;
  for (int n = 0; n < 8; ++n) p.push_back(n * kPi / 4.0);
  return p;
}

std::vector<double> reference_class_probabilities(int n_ions, double phase, double epsilon) {
  if (n_ions < 1) throw std::invalid_argument("n_ions must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0, 1]");
  const Eigen::Matrix2cd u = rotation(kPi / 2.0, phase) * rotation(1.5 * kPi, 0.0);
  const double p_up = std::norm(u(0, 0));
  const double p = (1.0 - epsilon) * p_up + epsilon * (1.0 - p_up);
  std::vector<double> q(n_ions + 1);
  for (int k = 0; k <= n_ions; ++k) {
    double binom = 1.0;
    for (int j = 0; j < k; ++j) binom = binom * (n_ions - j) / (j + 1);
    q[k] = binom * std::pow(p, k) * std::pow(1.0 - p, n_ions - k);
  }
  return q;
}

ReferenceSet reference_protocol(const DetectionModel& model, long shots_per_phase, int n_ions, std::uint64_t seed) {
  ReferenceSet out;
  out.phases = reference_phases();
  for (std::size_t i = 0; i < out.phases.size(); ++i) {
    CountHistogram h = simulate_histogram(reference_class_probabilities(n_ions, out.phases[i]), model,
                                          shots_per_phase, stream_seed(seed, 1000 + i));
    h.label = "ref:" + std::to_string(i) + "pi/4";
    out.histograms.push_back(std::move(h));
  }
  return out;
}

std::pair<CountHistogram, CountHistogram> split_held_out(const CountHistogram& h, double fraction) {
  h.validate();
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in [0, 1]");
  std::vector<int> seq = h.sequence;
  if (seq.empty()) {
    for (const auto& [c, n] : h.counts) seq.insert(seq.end(), static_cast<std::size_t>(n), c);
    std::mt19937_64 rng(stream_seed(0x5eedULL, static_cast<std::uint64_t>(h.shots)));
    std::shuffle(seq.begin(), seq.end(), rng);
  }
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(h.shots) - 1e-9));
  CountHistogram held;
  CountHistogram rest;
  held.label = h.label;
  rest.label = h.label;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CountHistogram& dst = i < k ? held : rest;
    dst.add(seq[i]);
    dst.sequence.push_back(seq[i]);
  }
  return {held, rest};
}

BinnedHistogram rebin(const CountHistogram& h, const std::vector<int>& boundaries) {
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (boundaries[i] <= boundaries[i - 1]) throw std::invalid_argument("bin boundaries must be strictly ascending");
  BinnedHistogram b;
  b.boundaries = boundaries;
  b.bin_counts.assign(boundaries.size() + 1, 0);
  b.shots = h.shots;
  for (const auto& [c, n] : h.counts) {
    const auto j = std::upper_bound(boundaries.begin(), boundaries.end(), c) - boundaries.begin();
    b.bin_counts[j] += n;
  }
  return b;
}

}  // namespace zeno
