// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file fieldmap.hpp
 * @brief Quasi-static microwave field of a coplanar waveguide cross-section.
 *
 * Coordinates: x runs across the structure with the center strip centred on
 * x = 0; z is depth into the substrate (z = 0 is the surface, the metal film
 * occupies -t <= z <= 0). Current flows along +y. Each strip is replaced by
 * infinitely long filaments at the film mid-plane z = -t/2, and the field is
 * the Biot-Savart sum
 *     Bx =  mu0 I dz / (2 pi r^2),   Bz = -mu0 I dx / (2 pi r^2).
 * The center strip carries +I, each ground returns -I/2.
 *
 * The filament set is stored as mirror pairs (x, -x) and summed pairwise, so
 * Bz(-x) = -Bz(x) and Bx(-x) = Bx(x) hold bit for bit.
 */

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bispin {

enum class CurrentProfile {
  /// 1/sqrt(1 - (2u/w)^2) across each strip independently.
  EdgePeaked,
  Uniform,
  /// Thin-film CPW distribution with coupled edges, center
  /// 1/sqrt((a^2-x^2)(b^2-x^2)), grounds 1/sqrt((x^2-a^2)(x^2-b^2)),
  /// truncated at the ground width and renormalized per strip.
  Coupled,
};

std::string to_string(CurrentProfile p);
CurrentProfile parse_current_profile(const std::string& name);

struct CPWGeometry {
  double center_width = 30e-6;
  double gap_width = 17.4e-6;
  double ground_width = 200e-6;
  double film_thickness = 100e-9;
  double drive_current_total = 1.0;  // A
  CurrentProfile profile = CurrentProfile::EdgePeaked;
  int filaments_per_strip = 400;

  void validate() const;
  double half_center() const { return 0.5 * center_width; }
  double gap_center() const { return half_center() + 0.5 * gap_width; }
};

enum class GapSide { Positive, Negative };

struct ImplantRegion {
  double strip_width = 9e-6;
  double strip_length = 1.6e-3;  // metadata only
  double depth_min = 0.0;
  double depth_max = 100e-9;
  /// Lateral centre of the implanted strip; defaults to the middle of the gap.
  std::optional<double> lateral_center;
  GapSide side = GapSide::Positive;

  double center_x(const CPWGeometry& geometry) const;
};

struct Position {
  double x = 0;
  double z = 0;
};

struct FieldVector {
  double Bx = 0;
  double Bz = 0;

  double magnitude() const;
};

struct FieldSample {
  Position position;
  FieldVector b1;              // T per A of drive
  double magnitude = 0;        // |b1|
  double angle_from_normal = 0;  // radians in [0, pi/2]
  double weight = 0;
};

struct Filament {
  double x = 0;        // >= 0; a twin sits at -x unless self_mirror
  double current = 0;  // per unit drive current
  bool self_mirror = false;
};

/// Precomputed filament set for one geometry.
class CPWFieldModel {
 public:
  explicit CPWFieldModel(const CPWGeometry& geometry);

  /// Throws InvalidArgument inside a conductor.
  FieldVector field_at(Position p) const;

  const CPWGeometry& geometry() const { return geometry_; }
  std::span<const Filament> filaments() const { return filaments_; }
  bool inside_conductor(Position p) const;

 private:
  CPWGeometry geometry_;
  std::vector<Filament> filaments_;
};

FieldVector cpw_field_at(const CPWGeometry& geometry, Position p);

/// Deterministic midpoint grid over the implant box, lateral index outermost.
std::vector<FieldSample> sample_donors(const CPWGeometry& geometry, const ImplantRegion& implant,
                                       int n_lateral, int n_depth);

struct FieldStats {
  double mean = 0;
  double std = 0;
  double min = 0;
  double max = 0;
  double mean_angle_from_normal = 0;

  double relative_std() const { return std / mean; }
};

/// Weighted statistics of |b1|, two-pass with compensated sums.
FieldStats field_stats(std::span<const FieldSample> samples);

FieldSample make_sample(Position p, FieldVector b, double weight);

}  // namespace bispin
