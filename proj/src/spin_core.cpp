// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/spin_core.hpp"

#include "bispin/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace bispin {

namespace {

bool is_half_integer(double j) {
  const double twice = 2.0 * j;
  return std::abs(twice - std::round(twice)) < 1e-12;
}

struct SingleSpin {
  Eigen::MatrixXcd x, y, z, plus, minus;
};

// Angular momentum matrices for spin j in the basis m = +j, ..., -j.
SingleSpin single_spin_matrices(double j) {
  const int d = static_cast<int>(std::lround(2.0 * j)) + 1;
  SingleSpin s;
  s.z = Eigen::MatrixXcd::Zero(d, d);
  s.plus = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = j - k;
    s.z(k, k) = m;
    if (k > 0) {
      // <m+1| J+ |m>
      s.plus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
  }
  s.minus = s.plus.adjoint();
  s.x = 0.5 * (s.plus + s.minus);
  s.y = std::complex<double>(0.0, -0.5) * (s.plus - s.minus);
  return s;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

double PhysicalConstants::hbar() const { return planck_h / (2.0 * std::numbers::pi); }

int SpinSystem::electron_dim() const { return static_cast<int>(std::lround(2.0 * electron_spin)) + 1; }
int SpinSystem::nuclear_dim() const { return static_cast<int>(std::lround(2.0 * nuclear_spin)) + 1; }

double SpinSystem::electron_zeeman() const {
  return g_electron * constants.bohr_magneton / constants.planck_h;
}

void SpinSystem::validate() const {
  if (!(electron_spin > 0) || !is_half_integer(electron_spin)) {
    throw InvalidArgument("electron_spin must be a positive half-integer");
  }
  if (!(nuclear_spin >= 0) || !is_half_integer(nuclear_spin)) {
    throw InvalidArgument("nuclear_spin must be a non-negative half-integer");
  }
  if (!(hyperfine_A > 0) || !std::isfinite(hyperfine_A)) {
    throw InvalidArgument("hyperfine_A must be positive and finite");
  }
  if (!std::isfinite(g_electron) || !std::isfinite(gyromag_nuclear)) {
    throw InvalidArgument("g_electron and gyromag_nuclear must be finite");
  }
  if (!(constants.bohr_magneton > 0) || !(constants.planck_h > 0)) {
    throw InvalidArgument("physical constants must be positive");
  }
}

SpinOperatorSet build_operators(const SpinSystem& system) {
  system.validate();
  const SingleSpin s = single_spin_matrices(system.electron_spin);
  const SingleSpin i = single_spin_matrices(system.nuclear_spin);
  const CMatrix ide = CMatrix::Identity(system.electron_dim(), system.electron_dim());
  const CMatrix idn = CMatrix::Identity(system.nuclear_dim(), system.nuclear_dim());

  SpinOperatorSet ops;
  ops.Sx = kron(s.x, idn);
  ops.Sy = kron(s.y, idn);
  ops.Sz = kron(s.z, idn);
  ops.S_plus = kron(s.plus, idn);
  ops.S_minus = kron(s.minus, idn);
  ops.Ix = kron(ide, i.x);
  ops.Iy = kron(ide, i.y);
  ops.Iz = kron(ide, i.z);
  return ops;
}

CMatrix hamiltonian(const SpinSystem& system, double B0) {
  if (!(B0 >= 0) || !std::isfinite(B0)) {
    throw InvalidArgument("hamiltonian: B0 must be a finite non-negative field magnitude");
  }
  const SpinOperatorSet ops = build_operators(system);
  CMatrix H = system.electron_zeeman() * B0 * ops.Sz - system.gyromag_nuclear * B0 * ops.Iz +
              system.hyperfine_A * (ops.Sx * ops.Ix + ops.Sy * ops.Iy + ops.Sz * ops.Iz);
  // Products of Hermitian operators leave rounding-level anti-Hermitian parts.
  return 0.5 * (H + H.adjoint());
}

EigenSystem diagonalize(const CMatrix& H) {
  if (H.rows() != H.cols() || H.rows() == 0) {
    throw InvalidArgument("diagonalize: matrix must be square and nonempty");
  }
  const double scale = std::max(H.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double asym = (H - H.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "diagonalize: matrix is not Hermitian (max |H - H^dagger| = " << asym << ")";
    throw InvalidArgument(msg.str());
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(H);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("diagonalize: eigensolver did not converge");
  }
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};

  const double norm = H.operatorNorm();
  for (Eigen::Index k = 0; k < out.vectors.cols(); ++k) {
    auto v = out.vectors.col(k);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::conj(v(imax)) / std::abs(v(imax));
    v(imax) = std::abs(v(imax));

    const double residual = (H * v - out.energies(k) * v).norm();
    if (residual > 1e-9 * std::max(norm, std::numeric_limits<double>::min())) {
      std::ostringstream msg;
      msg << "diagonalize: residual " << residual << " exceeds tolerance for eigenpair " << k;
      throw NumericalError(msg.str());
    }
  }
  return out;
}

std::string StateLabel::to_string() const {
  std::ostringstream s;
  s << '(' << F << ',' << (mF > 0 ? "+" : "") << mF << ')';
  return s.str();
}

std::size_t LabeledEigenSystem::index_of(const StateLabel& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw InvalidArgument("no state labeled " + label.to_string());
  }
  return static_cast<std::size_t>(it - labels.begin());
}

LabeledEigenSystem label_states(const EigenSystem& eig, const SpinSystem& system, double B0) {
  if (!(B0 > 0)) {
    throw InvalidArgument("label_states: B0 must be > 0 (use kZeroFieldLabelingB0 for zero-field labels)");
  }
  const SpinOperatorSet ops = build_operators(system);
  const CMatrix jz = ops.Sz + ops.Iz;
  const auto n = static_cast<std::size_t>(eig.energies.size());
  if (static_cast<int>(n) != system.dimension() || eig.vectors.cols() != eig.energies.size()) {
    throw InvalidArgument("label_states: eigensystem dimension does not match the spin system");
  }

  const double parity = std::fmod(std::round(2.0 * (system.electron_spin + system.nuclear_spin)), 2.0);
  std::vector<double> mf(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = eig.vectors.col(static_cast<Eigen::Index>(k));
    const double expectation = (v.adjoint() * jz * v)(0, 0).real();
    const double twice = std::round(2.0 * expectation);
    if (std::abs(2.0 * expectation - twice) > 0.02 ||
        std::fmod(std::abs(twice), 2.0) != parity) {
      std::ostringstream msg;
      msg << "label_states: <Sz+Iz> = " << expectation << " is not close to an allowed mF";
      throw NumericalError(msg.str());
    }
    mf[k] = twice / 2.0;
  }

  std::map<double, std::vector<std::size_t>> sectors;
  for (std::size_t k = 0; k < n; ++k) sectors[mf[k]].push_back(k);

  const double fmax = system.electron_spin + system.nuclear_spin;
  const double fmin = std::abs(system.electron_spin - system.nuclear_spin);
  std::vector<double> fval(n, 0.0);
  for (auto& [m, members] : sectors) {
    std::vector<double> allowed;
    for (double f = fmax; f >= fmin - 1e-9; f -= 1.0) {
      if (std::abs(m) <= f + 1e-9) allowed.push_back(f);
    }
    if (allowed.size() != members.size()) {
      std::ostringstream msg;
      msg << "label_states: mF = " << m << " sector has " << members.size() << " states, expected "
          << allowed.size();
      throw NumericalError(msg.str());
    }
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return eig.energies(a) > eig.energies(b); });
    for (std::size_t r = 0; r < members.size(); ++r) fval[members[r]] = allowed[r];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eig.energies(a) < eig.energies(b); });
  const double tie = 1e-9 * std::max(eig.energies.cwiseAbs().maxCoeff(), 1.0);
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && eig.energies(order[end]) - eig.energies(order[end - 1]) <= tie) ++end;
    std::sort(order.begin() + start, order.begin() + end,
              [&](std::size_t a, std::size_t b) { return mf[a] < mf[b]; });
    start = end;
  }

  LabeledEigenSystem out;
  out.field_B0 = B0;
  for (std::size_t k : order) {
    out.energies.push_back(eig.energies(k));
    out.states.push_back(eig.vectors.col(k));
    out.labels.push_back({fval[k], mf[k]});
  }
  return out;
}

LabeledEigenSystem solve_labeled(const SpinSystem& system, double B0) {
  return label_states(diagonalize(hamiltonian(system, B0)), system, B0);
}

std::map<StateLabel, double> labeled_energies(const SpinSystem& system, double B0) {
  std::map<StateLabel, double> out;
  if (B0 > 0) {
    const LabeledEigenSystem eig = solve_labeled(system, B0);
    for (std::size_t k = 0; k < eig.size(); ++k) out[eig.labels[k]] = eig.energies[k];
    return out;
  }
  const LabeledEigenSystem ref = solve_labeled(system, kZeroFieldLabelingB0);
  const EigenSystem zero = diagonalize(hamiltonian(system, 0.0));
  for (std::size_t k = 0; k < ref.size(); ++k) {
    out[ref.labels[k]] = zero.energies(static_cast<Eigen::Index>(k));
  }
  return out;
}

}  // namespace bispin
