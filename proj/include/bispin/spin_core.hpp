// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file spin_core.hpp
 * @brief Electron-nuclear spin Hamiltonian of a donor in a static field.
 *
 * Conventions used throughout the library:
 *  - The product space is electron (x) nuclear, electron factor first. Basis
 *    index k = e * (2I+1) + n where e runs over mS = +S..-S and n over
 *    mI = +I..-I (descending projections).
 *  - The static field points along +z.
 *  - Energies are expressed as frequencies (E/h, Hz):
 *        H/h = (g_e mu_B / h) B0 Sz - gamma_n B0 Iz + A (S . I)
 *    with gamma_n the signed nuclear gyromagnetic ratio in Hz/T. For 209Bi
 *    gamma_n > 0, so the nuclear Zeeman term lowers states with large mI.
 */

#pragma once

#include <Eigen/Dense>

#include <compare>
#include <complex>
#include <map>
#include <string>
#include <vector>

namespace bispin {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct PhysicalConstants {
  double bohr_magneton = 9.2740100783e-24;  // J/T
  double planck_h = 6.62607015e-34;         // J s

  double hbar() const;
};

struct SpinSystem {
  double electron_spin = 0.5;
  double nuclear_spin = 4.5;
  double hyperfine_A = 1.4754e9;    // Hz
  double g_electron = 2.0003;
  double gyromag_nuclear = 6.963e6;  // Hz/T, signed
  PhysicalConstants constants;

  /// Defaults describe 209Bi in silicon.
  static SpinSystem bismuth() { return {}; }

  int electron_dim() const;
  int nuclear_dim() const;
  int dimension() const { return electron_dim() * nuclear_dim(); }

  /// g_e mu_B / h in Hz/T.
  double electron_zeeman() const;

  /// Throws InvalidArgument on non-(half-)integer spins or non-positive A.
  void validate() const;
};

struct SpinOperatorSet {
  CMatrix Sx, Sy, Sz;
  CMatrix Ix, Iy, Iz;
  CMatrix S_plus, S_minus;
};

SpinOperatorSet build_operators(const SpinSystem& system);

/// Hamiltonian in Hz. B0 must be non-negative (field magnitude along +z).
CMatrix hamiltonian(const SpinSystem& system, double B0);

/// Raw eigensystem, energies ascending, vectors as columns.
struct EigenSystem {
  Eigen::VectorXd energies;
  CMatrix vectors;
};

/// Dense Hermitian diagonalization. Throws InvalidArgument for non-Hermitian
/// input and NumericalError if the residual contract is not met. Each
/// eigenvector's phase is fixed so its largest component is real positive.
EigenSystem diagonalize(const CMatrix& H);

/// |F, mF> label. Half-integer values are stored exactly in double.
struct StateLabel {
  double F = 0;
  double mF = 0;

  auto operator<=>(const StateLabel&) const = default;
  std::string to_string() const;
};

struct LabeledEigenSystem {
  double field_B0 = 0;
  std::vector<double> energies;  // Hz, ascending
  std::vector<CVector> states;
  std::vector<StateLabel> labels;

  std::size_t size() const { return energies.size(); }
  /// Index of the state carrying `label`; throws InvalidArgument if absent.
  std::size_t index_of(const StateLabel& label) const;
  double energy(const StateLabel& label) const { return energies[index_of(label)]; }
  const CVector& state(const StateLabel& label) const { return states[index_of(label)]; }
};

/**
 * Assigns |F, mF> labels to an eigensystem computed at B0 > 0.
 *
 * mF is the rounded expectation of Sz + Iz (exact quantum number for a field
 * along z). Within each mF sector, states are ranked by energy and receive F
 * values in descending order from I + S, skipping values with |mF| > F. This
 * is adiabatic continuation from B0 -> 0+ for A > 0, valid as long as no two
 * states of the same sector cross (none do for S = 1/2: the 2x2 sector
 * blocks always have an avoided crossing).
 *
 * Output ordering: ascending energy, ties (within 1e-9 of the spectral scale)
 * broken by ascending mF.
 */
LabeledEigenSystem label_states(const EigenSystem& eig, const SpinSystem& system, double B0);

/// hamiltonian + diagonalize + label_states.
LabeledEigenSystem solve_labeled(const SpinSystem& system, double B0);

/// Field used in place of B0 = 0 wherever labels are needed.
inline constexpr double kZeroFieldLabelingB0 = 1e-6;

/**
 * Energy of every labeled level at B0, B0 = 0 included. At zero field the
 * labels come from kZeroFieldLabelingB0 and are matched to the zero-field
 * spectrum by energy rank, which is exact because levels are degenerate
 * within each F manifold.
 */
std::map<StateLabel, double> labeled_energies(const SpinSystem& system, double B0);

}  // namespace bispin
