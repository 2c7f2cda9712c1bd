#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "eqed/types.hpp"

namespace eqed {

/// Point in space, in units of the cavity wavelength.
struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  bool finite() const;

  friend Position3 operator+(const Position3& a, const Position3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Position3 operator-(const Position3& a, const Position3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Position3 operator*(double s, const Position3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend Position3 operator-(const Position3& a) { return {-a.x, -a.y, -a.z}; }
  friend bool operator==(const Position3&, const Position3&) = default;
};

/// Target emitter A, ensemble B and the bare emitter constants. Rates are in
/// units of g0_A, lengths in units of lambda; all dipoles point along z.
struct EmitterLayout {
  Position3 target;
  std::vector<Position3> ensemble;
  /// omega_j - omega_A for each ensemble emitter.
  std::vector<double> detunings;
  double gamma_A = 0.0;
  double gamma_B = 0.0;
  double g0_A = 1.0;
  double g0_B = 1.0;
  double wavenumber = kDefaultWavenumber;

  std::size_t size() const { return ensemble.size(); }

  /// Throws InvalidArgument on bad sizes/rates and KernelSingularity when two
  /// emitters (target included) sit closer than kMinSeparation.
  void validate() const;

  friend bool operator==(const EmitterLayout&, const EmitterLayout&) = default;
};

enum class DisorderKind { Spectral, Positional };

struct DisorderSpec {
  DisorderKind kind = DisorderKind::Spectral;
  /// Rate for spectral disorder; multiple of `spacing` for positional disorder.
  double strength = 0.0;
  /// Lattice spacing d used to scale positional strengths (lambda units).
  double spacing = 1.0;
  std::uint64_t seed = 0;
  int realizations = 1;

  void validate() const;
};

/// n_side^3 sites of a simple cubic grid with its corner at `origin`.
/// Sites are ordered z-fastest, then y, then x.
std::vector<Position3> build_cubic_lattice(int n_side, double spacing, const Position3& origin);

/// Same lattice translated so its centroid sits at `center`.
std::vector<Position3> build_centered_cube(int n_side, double spacing, const Position3& center);

Position3 centroid(const std::vector<Position3>& points);

/// Replace the ensemble by one point dipole at its centroid, with
/// g0_B -> sqrt(N) g0_B and gamma_B -> N gamma_B. Requires equal detunings.
EmitterLayout collapse_to_point_dipole(const EmitterLayout& layout);

/// Uniform displacement in [-W/2, W/2] per axis, W = strength * spacing.
/// Emitter j draws x, y, z in that order from CounterRng(seed, j).
EmitterLayout apply_positional_disorder(const EmitterLayout& layout, const DisorderSpec& spec);

/// Detuning j drawn uniformly from [D_j - W/2, D_j + W/2], where D_j is the
/// input detuning, using CounterRng(seed, N + j).
EmitterLayout apply_spectral_disorder(const EmitterLayout& layout, const DisorderSpec& spec);

/// Smallest pairwise distance among target and ensemble (infinity if < 2 points).
double min_pair_separation(const EmitterLayout& layout);

void to_json(nlohmann::json& j, const Position3& p);
void from_json(const nlohmann::json& j, Position3& p);
void to_json(nlohmann::json& j, const EmitterLayout& layout);
void from_json(const nlohmann::json& j, EmitterLayout& layout);

}  // namespace eqed
