#include <cmath>

#include "zeno/tomography.hpp"

namespace zeno {

namespace {

int bright_count(int basis_index, int n_ions) {
  int k = 0;
  for (int i = 0; i < n_ions; ++i)
    if (((basis_index >> i) & 1) == 0) ++k;  // digit 0 is |up>
  return k;
}

}  // namespace

MeasurementDesign analysis_design(int n_ions, NamedState target) {
  if (n_ions != 2 && n_ions != 3) throw std::invalid_argument("analysis design supports two or three ions");
  MeasurementDesign d;
  d.n_ions = n_ions;
  d.target = spin_state(n_ions, false, target);
  const int dim = 1 << n_ions;

  for (int n = 0; n <= n_ions; ++n) {
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int b = 0; b < dim; ++b)
      if (bright_count(b, n_ions) == n) a(b, b) = 1.0;
    d.povm.push_back(std::move(a));
  }

  const double theta = n_ions == 2 ? kPi / 2.0 : std::acos(1.0 / 3.0);
  d.rotations.emplace_back(0.0, 0.0);
  for (int n = 0; n < 20; ++n) d.rotations.emplace_back(theta, kPi * n / 10.0);
  for (const auto& [th, ph] : d.rotations) d.unitaries.push_back(global_rotation(n_ions, th, ph));

  // Solve sum c_in U_i^dag A_n U_i = |t><t| as a real system over matrix entries.
  const int n_cols = static_cast<int>(d.unitaries.size()) * (n_ions + 1);
  Eigen::MatrixXd m(2 * dim * dim, n_cols);
  int col = 0;
  for (const auto& u : d.unitaries) {
    for (const auto& a : d.povm) {
      const CMatrix e = u.adjoint() * a * u;
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
          m(2 * (r * dim + c), col) = e(r, c).real();
          m(2 * (r * dim + c) + 1, col) = e(r, c).imag();
        }
      ++col;
    }
  }
  const CMatrix proj = d.target * d.target.adjoint();
  Eigen::VectorXd rhs(2 * dim * dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      rhs(2 * (r * dim + c)) = proj(r, c).real();
      rhs(2 * (r * dim + c) + 1) = proj(r, c).imag();
    }
  const Eigen::VectorXd x = m.completeOrthogonalDecomposition().solve(rhs);
  d.residual = (m * x - rhs).norm();
  if (d.residual > 1e-8)
    throw NumericalError("target projector is not spanned by the analysis design (residual " +
                         std::to_string(d.residual) + ")");
  d.coefficients.assign(d.unitaries.size(), std::vector<double>(n_ions + 1));
  for (std::size_t i = 0; i < d.unitaries.size(); ++i)
    for (int n = 0; n <= n_ions; ++n) d.coefficients[i][n] = x(static_cast<Eigen::Index>(i) * (n_ions + 1) + n);
  return d;
}

std::vector<std::vector<double>> predicted_classes(const MeasurementDesign& design, const CMatrix& rho) {
  const int dim = 1 << design.n_ions;
  if (rho.rows() != dim || rho.cols() != dim) throw std::invalid_argument("rho does not match the qubit register");
  std::vector<std::vector<double>> out;
  for (const auto& u : design.unitaries) {
    const CMatrix r = u * rho * u.adjoint();
    std::vector<double> p(design.n_ions + 1, 0.0);
    for (int b = 0; b < dim; ++b) p[bright_count(b, design.n_ions)] += r(b, b).real();
    out.push_back(std::move(p));
  }
  return out;
}

double linear_fidelity(const MeasurementDesign& design, const std::vector<std::vector<double>>& probs) {
  if (probs.size() != design.coefficients.size()) throw std::invalid_argument("probabilities do not match design");
  double f = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    for (std::size_t n = 0; n < probs[i].size(); ++n) f += design.coefficients[i][n] * probs[i][n];
  return f;
}

std::vector<CountHistogram> simulate_data(const MeasurementDesign& design, const CMatrix& rho,
                                          const DetectionModel& model, long shots_identity,
                                          long shots_per_rotation, std::uint64_t seed) {
  const auto probs = predicted_classes(design, rho);
  std::vector<CountHistogram> out;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    std::vector<double> p = probs[i];
    double s = 0.0;
    for (double& x : p) {
      x = std::max(0.0, x);
      s += x;
    }
    for (double& x : p) x /= s;
    CountHistogram h = simulate_histogram(p, model, i == 0 ? shots_identity : shots_per_rotation,
                                          stream_seed(seed, 2000 + i));
    h.label = "data:" + std::to_string(i);
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace zeno
