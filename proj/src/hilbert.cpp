#include "zeno/hilbert.hpp"

#include <array>
#include <cmath>
#include <string>

namespace zeno {

namespace {

void check_ion(const SystemDims& dims, int ion) {
  if (ion < 0 || ion >= dims.n_ions) {
    throw std::out_of_range("ion index " + std::to_string(ion) + " out of range for " +
                            std::to_string(dims.n_ions) + " ions");
  }
}

// Embed a levels x levels single-ion matrix at position `ion`.
CMatrix embed_single(const SystemDims& dims, int ion, const CMatrix& local) {
  const int L = dims.levels();
  const int nf = dims.n_fock;
  const int sd = dims.spin_dim();
  int stride = 1;
  for (int i = dims.n_ions - 1; i > ion; --i) stride *= L;

  CMatrix out = CMatrix::Zero(dims.dim(), dims.dim());
  for (int s = 0; s < sd; ++s) {
    const int own = (s / stride) % L;
    const int rest = s - own * stride;
    for (int to = 0; to < L; ++to) {
      const cplx v = local(to, own);
      if (v == cplx{}) continue;
      const int s_out = rest + to * stride;
      for (int n = 0; n < nf; ++n) out(dims.index(s_out, n), dims.index(s, n)) += v;
    }
  }
  return out;
}

cplx omega3() { return std::polar(1.0, kTwoPi / 3.0); }

}  // namespace

int SystemDims::spin_dim() const {
  int d = 1;
  for (int i = 0; i < n_ions; ++i) d *= levels();
  return d;
}

void SystemDims::validate() const {
  if (n_ions != 2 && n_ions != 3) throw std::invalid_argument("n_ions must be 2 or 3");
  if (n_fock < 1) throw std::invalid_argument("n_fock must be >= 1");
}

int SystemDims::spin_index(std::span<const SpinLevel> spins) const {
  if (static_cast<int>(spins.size()) != n_ions) throw std::invalid_argument("spin configuration has wrong length");
  int s = 0;
  for (SpinLevel lvl : spins) {
    const int v = static_cast<int>(lvl);
    if (v >= levels()) throw std::invalid_argument("level |o> requested without leak level");
    s = s * levels() + v;
  }
  return s;
}

Eigen::Index SystemDims::index(std::span<const SpinLevel> spins, int fock) const {
  if (fock < 0 || fock >= n_fock) throw std::out_of_range("Fock index out of range");
  return index(spin_index(spins), fock);
}

SpinLevel SystemDims::level_of(int s, int ion) const {
  for (int i = n_ions - 1; i > ion; --i) s /= levels();
  return static_cast<SpinLevel>(s % levels());
}

int SystemDims::up_count(int s) const {
  int ups = 0;
  for (int ion = 0; ion < n_ions; ++ion) {
    const SpinLevel lvl = level_of(s, ion);
    if (lvl == SpinLevel::out) return -1;
    if (lvl == SpinLevel::up) ++ups;
  }
  return ups;
}

NamedState parse_named_state(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, NamedState>, 12> table{{
      {"uu", NamedState::uu},
      {"dd", NamedState::dd},
      {"T", NamedState::T},
      {"S", NamedState::S},
      {"W", NamedState::W},
      {"Wbar", NamedState::Wbar},
      {"Wc", NamedState::Wc},
      {"Wac", NamedState::Wac},
      {"Wbar_c", NamedState::Wbar_c},
      {"Wbar_ac", NamedState::Wbar_ac},
      {"uuu", NamedState::uuu},
      {"ddd", NamedState::ddd},
  }};
  for (const auto& [key, value] : table)
    if (key == name) return value;
  throw std::invalid_argument("unknown state name '" + std::string(name) + "'");
}

std::string_view to_string(NamedState state) {
  switch (state) {
    case NamedState::uu: return "uu";
    case NamedState::dd: return "dd";
    case NamedState::T: return "T";
    case NamedState::S: return "S";
    case NamedState::W: return "W";
    case NamedState::Wbar: return "Wbar";
    case NamedState::Wc: return "Wc";
    case NamedState::Wac: return "Wac";
    case NamedState::Wbar_c: return "Wbar_c";
    case NamedState::Wbar_ac: return "Wbar_ac";
    case NamedState::uuu: return "uuu";
    case NamedState::ddd: return "ddd";
  }
  return "?";
}

OperatorMatrix build_spin_op(const SystemDims& dims, int ion, SpinOp kind) {
  dims.validate();
  check_ion(dims, ion);
  const int L = dims.levels();
  CMatrix local = CMatrix::Zero(L, L);
  const int up = static_cast<int>(SpinLevel::up);
  const int dn = static_cast<int>(SpinLevel::down);
  bool herm = true;
  switch (kind) {
    case SpinOp::lower:
      local(dn, up) = 1.0;
      herm = false;
      break;
    case SpinOp::raise:
      local(up, dn) = 1.0;
      herm = false;
      break;
    case SpinOp::x:
      local(dn, up) = 1.0;
      local(up, dn) = 1.0;
      break;
    case SpinOp::z:
      local(up, up) = 1.0;
      local(dn, dn) = -1.0;
      break;
    case SpinOp::project_o:
      if (!dims.leak_level) throw std::invalid_argument("project_o requires the leak level");
      local(2, 2) = 1.0;
      break;
  }
  return {dims, embed_single(dims, ion, local), herm};
}

OperatorMatrix spin_transition(const SystemDims& dims, int ion, SpinLevel to, SpinLevel from) {
  dims.validate();
  check_ion(dims, ion);
  const int L = dims.levels();
  if (static_cast<int>(to) >= L || static_cast<int>(from) >= L)
    throw std::invalid_argument("level |o> requested without leak level");
  CMatrix local = CMatrix::Zero(L, L);
  local(static_cast<int>(to), static_cast<int>(from)) = 1.0;
  return {dims, embed_single(dims, ion, local), to == from};
}

OperatorMatrix build_mode_op(const SystemDims& dims, ModeOp kind) {
  dims.validate();
  if (dims.n_fock < 2) throw std::invalid_argument("mode operators need n_fock >= 2");
  const int nf = dims.n_fock;
  CMatrix a = CMatrix::Zero(dims.dim(), dims.dim());
  for (int s = 0; s < dims.spin_dim(); ++s) {
    for (int n = 1; n < nf; ++n) {
      const double amp = std::sqrt(static_cast<double>(n));
      switch (kind) {
        case ModeOp::annihilate: a(dims.index(s, n - 1), dims.index(s, n)) = amp; break;
        case ModeOp::create: a(dims.index(s, n), dims.index(s, n - 1)) = amp; break;
        case ModeOp::number: a(dims.index(s, n), dims.index(s, n)) = n; break;
      }
    }
  }
  return {dims, std::move(a), kind == ModeOp::number};
}

CVector spin_state(int n_ions, bool leak_level, NamedState name) {
  SystemDims dims{n_ions, 1, leak_level};
  dims.validate();
  using enum SpinLevel;
  CVector v = CVector::Zero(dims.spin_dim());
  auto at = [&](std::initializer_list<SpinLevel> cfg) -> cplx& {
    return v(dims.spin_index(std::span<const SpinLevel>(cfg.begin(), cfg.size())));
  };
  const bool two = n_ions == 2;
  auto need = [&](bool ok) {
    if (!ok)
      throw std::invalid_argument("state '" + std::string(to_string(name)) + "' not defined for " +
                                  std::to_string(n_ions) + " ions");
  };
  const double r2 = 1.0 / std::sqrt(2.0);
  const double r3 = 1.0 / std::sqrt(3.0);
  const cplx w = omega3();
  const cplx wb = std::conj(w);
  switch (name) {
    case NamedState::uu: need(two); at({up, up}) = 1.0; break;
    case NamedState::dd: need(two); at({down, down}) = 1.0; break;
    case NamedState::T:
      need(two);
      at({up, down}) = r2;
      at({down, up}) = r2;
      break;
    case NamedState::S:
      need(two);
      at({up, down}) = r2;
      at({down, up}) = -r2;
      break;
    case NamedState::uuu: need(!two); at({up, up, up}) = 1.0; break;
    case NamedState::ddd: need(!two); at({down, down, down}) = 1.0; break;
    case NamedState::W:
      need(!two);
      at({up, up, down}) = r3;
      at({up, down, up}) = r3;
      at({down, up, up}) = r3;
      break;
    case NamedState::Wbar:
      need(!two);
      at({up, down, down}) = r3;
      at({down, up, down}) = r3;
      at({down, down, up}) = r3;
      break;
    case NamedState::Wc:
      need(!two);
      at({up, up, down}) = w * r3;
      at({up, down, up}) = r3;
      at({down, up, up}) = wb * r3;
      break;
    case NamedState::Wac:
      need(!two);
      at({up, up, down}) = wb * r3;
      at({up, down, up}) = r3;
      at({down, up, up}) = w * r3;
      break;
    case NamedState::Wbar_c:
      need(!two);
      at({down, down, up}) = w * r3;
      at({down, up, down}) = r3;
      at({up, down, down}) = wb * r3;
      break;
    case NamedState::Wbar_ac:
      need(!two);
      at({down, down, up}) = wb * r3;
      at({down, up, down}) = r3;
      at({up, down, down}) = w * r3;
      break;
  }
  return v;
}

CVector spin_state(const SystemDims& dims, NamedState name) {
  return spin_state(dims.n_ions, dims.leak_level, name);
}

PureState product_state(const SystemDims& dims, const CVector& spin, int fock_n) {
  dims.validate();
  if (spin.size() != dims.spin_dim()) throw std::invalid_argument("spin vector has wrong dimension");
  if (fock_n < 0 || fock_n >= dims.n_fock) throw std::out_of_range("Fock index out of range");
  PureState psi{dims, CVector::Zero(dims.dim())};
  for (int s = 0; s < dims.spin_dim(); ++s) psi.amplitudes(dims.index(s, fock_n)) = spin(s);
  return psi;
}

PureState named_state(const SystemDims& dims, NamedState name, int fock_n) {
  return product_state(dims, spin_state(dims, name), fock_n);
}

std::vector<double> thermal_weights(double n_bar, int n_fock, double tail_limit) {
  if (n_bar < 0.0) throw std::invalid_argument("n_bar must be >= 0");
  std::vector<double> w(n_fock, 0.0);
  if (n_bar == 0.0) {
    w[0] = 1.0;
    return w;
  }
  const double q = n_bar / (1.0 + n_bar);
  // Untruncated distribution: (1-q) q^n; the discarded tail is q^n_fock.
  const double tail = std::pow(q, n_fock);
  if (tail >= tail_limit) {
    throw NumericalError("Fock truncation " + std::to_string(n_fock) + " too small for n_bar=" +
                         std::to_string(n_bar) + " (tail weight " + std::to_string(tail) + ")");
  }
  double z = 0.0;
  double p = 1.0;
  for (int n = 0; n < n_fock; ++n) {
    w[n] = p;
    z += p;
    p *= q;
  }
  for (double& x : w) x /= z;
  return w;
}

DensityOperator thermal_product_state(const SystemDims& dims, const CVector& spin, double n_bar) {
  dims.validate();
  if (spin.size() != dims.spin_dim()) throw std::invalid_argument("spin vector has wrong dimension");
  const std::vector<double> w = thermal_weights(n_bar, dims.n_fock);
  const CVector s = spin / spin.norm();
  DensityOperator rho{dims, CMatrix::Zero(dims.dim(), dims.dim())};
  for (int a = 0; a < dims.spin_dim(); ++a) {
    for (int b = 0; b < dims.spin_dim(); ++b) {
      const cplx sab = s(a) * std::conj(s(b));
      if (sab == cplx{}) continue;
      for (int n = 0; n < dims.n_fock; ++n) rho.matrix(dims.index(a, n), dims.index(b, n)) = sab * w[n];
    }
  }
  return rho;
}

DensityOperator to_density(const PureState& state) {
  return {state.dims, state.amplitudes * state.amplitudes.adjoint()};
}

CMatrix reduce_to_spin(const DensityOperator& rho) {
  const SystemDims& d = rho.dims;
  CMatrix out = CMatrix::Zero(d.spin_dim(), d.spin_dim());
  for (int a = 0; a < d.spin_dim(); ++a)
    for (int b = 0; b < d.spin_dim(); ++b) {
      cplx acc{};
      for (int n = 0; n < d.n_fock; ++n) acc += rho.matrix(d.index(a, n), d.index(b, n));
      out(a, b) = acc;
    }
  return out;
}

CMatrix reduce_to_spin(const PureState& psi) {
  const SystemDims& d = psi.dims;
  // Reshape amplitudes to (spin x fock); rho_spin = M M^dagger.
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      psi.amplitudes.data(), d.spin_dim(), d.n_fock);
  return m * m.adjoint();
}

void check_state(const PureState& psi, double norm_tol) {
  if (psi.amplitudes.size() != psi.dims.dim()) throw std::invalid_argument("state dimension mismatch");
  const double n = psi.amplitudes.norm();
  if (std::abs(n - 1.0) > norm_tol) throw NumericalError("state norm " + std::to_string(n) + " deviates from 1");
}

void check_state(const DensityOperator& rho, double herm_tol, double trace_tol, double eig_floor) {
  const auto& m = rho.matrix;
  if (m.rows() != rho.dims.dim() || m.cols() != rho.dims.dim())
    throw std::invalid_argument("density matrix dimension mismatch");
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol) throw NumericalError("density matrix not Hermitian (" + std::to_string(herm) + ")");
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > trace_tol) throw NumericalError("density matrix trace " + std::to_string(tr));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < eig_floor)
    throw NumericalError("density matrix has eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
}

double top_fock_population(const PureState& psi) {
  const SystemDims& d = psi.dims;
  double p = 0.0;
  for (int s = 0; s < d.spin_dim(); ++s) p += std::norm(psi.amplitudes(d.index(s, d.n_fock - 1)));
  return p;
}

double top_fock_population(const DensityOperator& rho) {
  const SystemDims& d = rho.dims;
  double p = 0.0;
  for (int s = 0; s < d.spin_dim(); ++s) {
    const auto i = d.index(s, d.n_fock - 1);
    p += rho.matrix(i, i).real();
  }
  return p;
}

}  // namespace zeno
