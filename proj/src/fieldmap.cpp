// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/fieldmap.hpp"

#include "bispin/detail/compensated_sum.hpp"
#include "bispin/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace bispin {

namespace {

constexpr double kMu0 = 1.25663706212e-6;  // T m / A

double integrate(const std::function<double(double)>& f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 8, 1e-13);
}

// Current carried by [lo, hi] for a strip on [strip_lo, strip_hi], unnormalized.
// `a` and `b` are the half-center width and the outer gap edge.
double cell_weight(CurrentProfile profile, bool center, double lo, double hi, double strip_lo,
                   double strip_hi, double a, double b) {
  switch (profile) {
    case CurrentProfile::Uniform:
      return hi - lo;
    case CurrentProfile::EdgePeaked: {
      const double c = 0.5 * (strip_lo + strip_hi);
      const double h = 0.5 * (strip_hi - strip_lo);
      auto s = [&](double u) { return std::clamp((u - c) / h, -1.0, 1.0); };
      return std::asin(s(hi)) - std::asin(s(lo));
    }
    case CurrentProfile::Coupled: {
      if (center) {
        // u = a sin(theta) removes the edge singularity.
        auto th = [&](double u) { return std::asin(std::clamp(u / a, -1.0, 1.0)); };
        return integrate(
            [&](double q) {
              const double s = a * std::sin(q);
              return 1.0 / std::sqrt(b * b - s * s);
            },
            th(lo), th(hi));
      }
      // v = sqrt(u^2 - b^2).
      auto v = [&](double u) { return std::sqrt(std::max(u * u - b * b, 0.0)); };
      return integrate(
          [&](double q) { return 1.0 / (std::sqrt(b * b + q * q) * std::sqrt(b * b - a * a + q * q)); },
          v(lo), v(hi));
    }
  }
  return 0.0;
}

}  // namespace

std::string to_string(CurrentProfile p) {
  switch (p) {
    case CurrentProfile::EdgePeaked:
      return "edge_peaked";
    case CurrentProfile::Uniform:
      return "uniform";
    case CurrentProfile::Coupled:
      return "coupled";
  }
  return "?";
}

CurrentProfile parse_current_profile(const std::string& name) {
  if (name == "edge_peaked") return CurrentProfile::EdgePeaked;
  if (name == "uniform") return CurrentProfile::Uniform;
  if (name == "coupled") return CurrentProfile::Coupled;
  throw InvalidArgument("unknown current profile '" + name + "'");
}

void CPWGeometry::validate() const {
  for (double v : {center_width, gap_width, ground_width, film_thickness}) {
    if (!(v > 0) || !std::isfinite(v)) throw InvalidArgument("CPW lengths must be positive");
  }
  if (!std::isfinite(drive_current_total)) throw InvalidArgument("drive current must be finite");
  if (filaments_per_strip < 1) throw InvalidArgument("filaments_per_strip must be >= 1");
}

double ImplantRegion::center_x(const CPWGeometry& geometry) const {
  const double d = lateral_center.value_or(geometry.gap_center());
  return side == GapSide::Positive ? d : -d;
}

double FieldVector::magnitude() const { return std::hypot(Bx, Bz); }

CPWFieldModel::CPWFieldModel(const CPWGeometry& geometry) : geometry_(geometry) {
  geometry_.validate();
  const int n = geometry_.filaments_per_strip;
  const double a = geometry_.half_center();
  const double b = a + geometry_.gap_width;
  const double outer = b + geometry_.ground_width;

  // Center strip: cells over [-a, a]; keep those right of the axis, plus the
  // middle cell when n is odd.
  std::vector<Filament> center;
  double center_total = 0.0;
  const double hc = 2.0 * a / n;
  for (int j = 0; j < n; ++j) {
    const double lo = -a + j * hc;
    const double hi = j + 1 == n ? a : -a + (j + 1) * hc;
    const bool middle = (n % 2 == 1) && (2 * j + 1 == n);
    if (!middle && 2 * j + 1 < n) continue;
    const double w = cell_weight(geometry_.profile, true, lo, hi, -a, a, a, b);
    center.push_back({middle ? 0.0 : 0.5 * (lo + hi), w, middle});
    center_total += middle ? w : 2.0 * w;
  }

  std::vector<Filament> ground;
  double ground_total = 0.0;
  const double hg = geometry_.ground_width / n;
  for (int j = 0; j < n; ++j) {
    const double lo = b + j * hg;
    const double hi = j + 1 == n ? outer : b + (j + 1) * hg;
    const double w = cell_weight(geometry_.profile, false, lo, hi, b, outer, a, b);
    ground.push_back({0.5 * (lo + hi), w, false});
    ground_total += w;
  }

  for (auto& f : center) f.current /= center_total;
  for (auto& f : ground) f.current *= -0.5 / ground_total;
  filaments_ = std::move(center);
  filaments_.insert(filaments_.end(), ground.begin(), ground.end());
}

bool CPWFieldModel::inside_conductor(Position p) const {
  if (p.z < -geometry_.film_thickness || p.z > 0.0) return false;
  const double ax = std::abs(p.x);
  const double a = geometry_.half_center();
  const double b = a + geometry_.gap_width;
  return ax <= a || (ax >= b && ax <= b + geometry_.ground_width);
}

FieldVector CPWFieldModel::field_at(Position p) const {
  if (inside_conductor(p)) throw InvalidArgument("cpw_field_at: position lies inside a conductor");
  const double dz = p.z + 0.5 * geometry_.film_thickness;
  const double k = kMu0 / (2.0 * std::numbers::pi);
  double bx = 0.0;
  double bz = 0.0;
  auto term = [&](double dx, double current, double& tx, double& tz) {
    const double c = k * current / (dx * dx + dz * dz);
    tx = c * dz;
    tz = -c * dx;
  };
  for (const Filament& f : filaments_) {
    double ax, az;
    term(p.x - f.x, f.current, ax, az);
    if (!f.self_mirror) {
      double mx, mz;
      term(p.x + f.x, f.current, mx, mz);
      ax += mx;
      az += mz;
    }
    bx += ax;
    bz += az;
  }
  return {geometry_.drive_current_total * bx, geometry_.drive_current_total * bz};
}

FieldVector cpw_field_at(const CPWGeometry& geometry, Position p) {
  return CPWFieldModel(geometry).field_at(p);
}

FieldSample make_sample(Position p, FieldVector b, double weight) {
  FieldSample s;
  s.position = p;
  s.b1 = b;
  s.magnitude = b.magnitude();
  s.angle_from_normal = std::atan2(std::abs(b.Bx), std::abs(b.Bz));
  s.weight = weight;
  return s;
}

std::vector<FieldSample> sample_donors(const CPWGeometry& geometry, const ImplantRegion& implant,
                                       int n_lateral, int n_depth) {
  if (n_lateral < 1 || n_depth < 1) throw InvalidArgument("sample_donors: grid counts must be >= 1");
  if (!(implant.strip_width > 0)) throw InvalidArgument("implant strip_width must be positive");
  if (!(implant.depth_min >= 0) || !(implant.depth_max > implant.depth_min)) {
    throw InvalidArgument("implant depths must satisfy 0 <= depth_min < depth_max");
  }
  const CPWFieldModel model(geometry);
  const double xc = implant.center_x(geometry);
  const double half = 0.5 * implant.strip_width;
  const double a = geometry.half_center();
  const double b = a + geometry.gap_width;
  if (std::abs(xc) - half <= a || std::abs(xc) + half >= b) {
    throw InvalidArgument("sample_donors: implant region overlaps a conductor footprint");
  }

  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(n_lateral) * static_cast<std::size_t>(n_depth));
  const double weight = 1.0 / (static_cast<double>(n_lateral) * n_depth);
  const double depth = implant.depth_max - implant.depth_min;
  for (int i = 0; i < n_lateral; ++i) {
    const double x = xc - half + (i + 0.5) * implant.strip_width / n_lateral;
    for (int j = 0; j < n_depth; ++j) {
      const double z = implant.depth_min + (j + 0.5) * depth / n_depth;
      const Position p{x, z};
      out.push_back(make_sample(p, model.field_at(p), weight));
    }
  }
  return out;
}

FieldStats field_stats(std::span<const FieldSample> samples) {
  if (samples.empty()) throw InvalidArgument("field_stats: no samples");
  detail::CompensatedSum wsum, msum, asum;
  FieldStats st;
  st.min = std::numeric_limits<double>::infinity();
  st.max = -std::numeric_limits<double>::infinity();
  for (const FieldSample& s : samples) {
    wsum.add(s.weight);
    msum.add(s.weight * s.magnitude);
    asum.add(s.weight * s.angle_from_normal);
    st.min = std::min(st.min, s.magnitude);
    st.max = std::max(st.max, s.magnitude);
  }
  const double w = wsum.value();
  if (!(w > 0)) throw InvalidArgument("field_stats: weights must sum to a positive value");
  st.mean = msum.value() / w;
  st.mean_angle_from_normal = asum.value() / w;
  detail::CompensatedSum vsum;
  for (const FieldSample& s : samples) {
    const double d = s.magnitude - st.mean;
    vsum.add(s.weight * d * d);
  }
  st.std = st.min == st.max ? 0.0 : std::sqrt(std::max(vsum.value() / w, 0.0));
  return st;
}

}  // namespace bispin
