#include "eqed/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "eqed/error.hpp"
#include "eqed/random.hpp"

namespace eqed {

double Position3::norm() const { return std::sqrt(x * x + y * y + z * z); }

bool Position3::finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

namespace {

void check_rate(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    std::ostringstream os;
    os << "layout: " << name << " must be finite and >= 0, got " << value;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

double min_pair_separation(const EmitterLayout& layout) {
  double best = std::numeric_limits<double>::infinity();
  const auto& pts = layout.ensemble;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    best = std::min(best, (pts[i] - layout.target).norm());
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, (pts[i] - pts[j]).norm());
  }
  return best;
}

void EmitterLayout::validate() const {
  if (detunings.size() != ensemble.size()) {
    std::ostringstream os;
    os << "layout: " << detunings.size() << " detunings for " << ensemble.size() << " emitters";
    throw InvalidArgument(os.str());
  }
  check_rate(gamma_A, "gamma_A");
  check_rate(gamma_B, "gamma_B");
  check_rate(g0_A, "g0_A");
  check_rate(g0_B, "g0_B");
  if (!(wavenumber > 0.0)) throw InvalidArgument("layout: wavenumber must be positive");
  if (!target.finite()) throw InvalidArgument("layout: non-finite target position");
  for (std::size_t j = 0; j < ensemble.size(); ++j) {
    if (!ensemble[j].finite() || !std::isfinite(detunings[j])) {
      std::ostringstream os;
      os << "layout: non-finite data for ensemble emitter " << j;
      throw InvalidArgument(os.str());
    }
  }
  const double sep = min_pair_separation(*this);
  if (sep < kMinSeparation) {
    std::ostringstream os;
    os << "layout: emitters separated by " << sep << " lambda (< " << kMinSeparation << ")";
    throw KernelSingularity(os.str());
  }
}

void DisorderSpec::validate() const {
  if (!(strength >= 0.0) || !std::isfinite(strength)) throw InvalidArgument("disorder: strength must be >= 0");
  if (!(spacing > 0.0)) throw InvalidArgument("disorder: spacing must be > 0");
  if (realizations < 1) throw InvalidArgument("disorder: realizations must be >= 1");
}

std::vector<Position3> build_cubic_lattice(int n_side, double spacing, const Position3& origin) {
  if (n_side < 1) throw InvalidArgument("cubic lattice: n_side must be >= 1");
  if (!(spacing > 0.0)) throw InvalidArgument("cubic lattice: spacing must be > 0");
  std::vector<Position3> sites;
  sites.reserve(static_cast<std::size_t>(n_side) * n_side * n_side);
  for (int ix = 0; ix < n_side; ++ix)
    for (int iy = 0; iy < n_side; ++iy)
      for (int iz = 0; iz < n_side; ++iz)
        sites.push_back({origin.x + ix * spacing, origin.y + iy * spacing, origin.z + iz * spacing});
  return sites;
}

std::vector<Position3> build_centered_cube(int n_side, double spacing, const Position3& center) {
  const double half = 0.5 * (n_side - 1) * spacing;
  return build_cubic_lattice(n_side, spacing, center - Position3{half, half, half});
}

Position3 centroid(const std::vector<Position3>& points) {
  if (points.empty()) throw InvalidArgument("centroid of an empty point set");
  Position3 sum;
  for (const auto& p : points) sum = sum + p;
  return (1.0 / static_cast<double>(points.size())) * sum;
}

EmitterLayout collapse_to_point_dipole(const EmitterLayout& layout) {
  if (layout.ensemble.empty()) throw InvalidArgument("collapse: ensemble is empty");
  if (layout.detunings.size() != layout.ensemble.size()) throw InvalidArgument("collapse: detuning count mismatch");
  const double d0 = layout.detunings.front();
  if (std::any_of(layout.detunings.begin(), layout.detunings.end(), [d0](double d) { return d != d0; }))
    throw InvalidArgument("collapse: ensemble detunings differ, point-dipole collapse undefined");
  if (layout.ensemble.size() == 1) return layout;

  const double n = static_cast<double>(layout.ensemble.size());
  EmitterLayout out = layout;
  out.ensemble = {centroid(layout.ensemble)};
  out.detunings = {d0};
  out.g0_B = std::sqrt(n) * layout.g0_B;
  out.gamma_B = n * layout.gamma_B;
  return out;
}

EmitterLayout apply_positional_disorder(const EmitterLayout& layout, const DisorderSpec& spec) {
  spec.validate();
  if (spec.kind != DisorderKind::Positional) throw InvalidArgument("positional disorder requires kind = positional");
  EmitterLayout out = layout;
  const double width = spec.strength * spec.spacing;
  if (width == 0.0) return out;
  for (std::size_t j = 0; j < out.ensemble.size(); ++j) {
    CounterRng rng(spec.seed, j);
    auto& p = out.ensemble[j];
    p.x += rng.uniform(-0.5 * width, 0.5 * width);
    p.y += rng.uniform(-0.5 * width, 0.5 * width);
    p.z += rng.uniform(-0.5 * width, 0.5 * width);
  }
  const double sep = min_pair_separation(out);
  if (sep < kMinSeparation) {
    std::ostringstream os;
    os << "positional disorder (W=" << spec.strength << ", seed=" << spec.seed
       << ") produced emitters " << sep << " lambda apart";
    throw KernelSingularity(os.str());
  }
  return out;
}

EmitterLayout apply_spectral_disorder(const EmitterLayout& layout, const DisorderSpec& spec) {
  spec.validate();
  if (spec.kind != DisorderKind::Spectral) throw InvalidArgument("spectral disorder requires kind = spectral");
  EmitterLayout out = layout;
  const double w = spec.strength;
  if (w == 0.0) return out;
  const std::size_t n = out.ensemble.size();
  for (std::size_t j = 0; j < n; ++j) {
    CounterRng rng(spec.seed, n + j);
    out.detunings[j] = rng.uniform(out.detunings[j] - 0.5 * w, out.detunings[j] + 0.5 * w);
  }
  return out;
}

void to_json(nlohmann::json& j, const Position3& p) { j = nlohmann::json::array({p.x, p.y, p.z}); }

void from_json(const nlohmann::json& j, Position3& p) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("position must be an array [x, y, z]");
  p = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

void to_json(nlohmann::json& j, const EmitterLayout& layout) {
  j = nlohmann::json{{"target", layout.target},
                     {"ensemble", layout.ensemble},
                     {"detunings", layout.detunings},
                     {"gamma_A", layout.gamma_A},
                     {"gamma_B", layout.gamma_B},
                     {"g0_A", layout.g0_A},
                     {"g0_B", layout.g0_B},
                     {"wavenumber", layout.wavenumber}};
}

void from_json(const nlohmann::json& j, EmitterLayout& layout) {
  layout.target = j.at("target").get<Position3>();
  layout.ensemble = j.at("ensemble").get<std::vector<Position3>>();
  layout.detunings = j.at("detunings").get<std::vector<double>>();
  layout.gamma_A = j.at("gamma_A").get<double>();
  layout.gamma_B = j.at("gamma_B").get<double>();
  layout.g0_A = j.at("g0_A").get<double>();
  layout.g0_B = j.at("g0_B").get<double>();
  layout.wavenumber = j.value("wavenumber", kDefaultWavenumber);
}

}  // namespace eqed
