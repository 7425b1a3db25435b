#include "nvcav/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nvcav {

void FieldGrid::validate() const {
  if (nodes.empty()) throw ValidationError("field grid: no nodes");
  bool any_ir = false;
  bool any_excitation = false;
  for (const auto& n : nodes) {
    if (n.weight < 0.0 || n.e2_ir < 0.0 || n.e2_nv < 0.0 || n.e2_green < 0.0)
      throw ValidationError("field grid: negative weight or intensity");
    if (!(n.eps > 0.0)) throw ValidationError("field grid: dielectric constant must be positive");
    any_ir = any_ir || n.e2_ir > 0.0;
    any_excitation = any_excitation || (n.in_excitation && n.e2_nv > 0.0);
  }
  if (!any_ir) throw ValidationError("field grid: IR field is identically zero");
  if (!any_excitation)
    throw ValidationError("field grid: no excitation-region node with collection-mode weight");
}

double mode_volume(const FieldGrid& grid) {
  if (grid.nodes.empty()) throw ValidationError("mode volume: empty grid");
  double integral = 0.0;
  double peak = 0.0;
  for (const auto& n : grid.nodes) {
    const double u = n.eps * n.e2_ir;  // energy density up to a factor 1/2
    integral += u * n.weight;
    peak = std::max(peak, u);
  }
  if (!(peak > 0.0)) throw DegenerateError("mode volume: field is identically zero");
  return integral / peak;
}

double confinement_factor(const FieldGrid& grid, int order, ExcitationWeighting weighting) {
  if (order < 1) throw ValidationError("confinement factor: photon order must be >= 1");
  if (weighting == ExcitationWeighting::green_intensity && !grid.has_green)
    throw ValidationError("confinement factor: grid has no green-intensity column");

  double peak = 0.0;  // global maximum of the IR intensity
  for (const auto& n : grid.nodes) peak = std::max(peak, n.e2_ir);
  if (!(peak > 0.0)) throw DegenerateError("confinement factor: IR field is identically zero");

  double num = 0.0;
  double den = 0.0;
  for (const auto& n : grid.nodes) {
    const double green = weighting == ExcitationWeighting::indicator
                             ? (n.in_excitation ? 1.0 : 0.0)
                             : n.e2_green;
    const double w = green * n.e2_nv * n.weight;
    if (w == 0.0) continue;
    const double f = n.e2_ir / peak;
    num += std::pow(f, order) * w;
    den += w;
  }
  if (!(den > 0.0)) throw DegenerateError("confinement factor: excitation region is empty");
  return num / den;
}

namespace {

double rate_factor(const CavityMode& mode) {
  if (!mode.mode_volume) throw ValidationError("cross section: mode volume not set");
  if (!mode.group_index) throw ValidationError("cross section: group index not set");
  return kSpeedOfLight / *mode.group_index / *mode.mode_volume;  // 1/(m^2 s)
}

}  // namespace

double rate_from_cross_section(const CrossSection& sigma, double n_photons,
                               const CavityMode& mode, double gamma_p) {
  if (sigma.order < 1) throw ValidationError("cross section: order must be >= 1");
  if (!(sigma.value > 0.0)) throw ValidationError("cross section: value must be positive");
  if (n_photons < 0.0) throw ValidationError("cross section: photon number must be nonnegative");
  if (gamma_p < 0.0 || gamma_p > 1.0)
    throw ValidationError("cross section: confinement factor must lie in [0, 1]");
  return sigma.value * std::pow(rate_factor(mode) * n_photons, sigma.order) * gamma_p;
}

CrossSection cross_section_from_rate(double rate_coefficient, int order,
                                     const CavityMode& mode, double gamma_p) {
  if (order < 1) throw ValidationError("cross section: order must be >= 1");
  if (!(rate_coefficient > 0.0))
    throw ValidationError("cross section: rate coefficient must be positive");
  if (gamma_p < 0.0 || gamma_p > 1.0)
    throw ValidationError("cross section: confinement factor must lie in [0, 1]");
  if (gamma_p == 0.0)
    throw DegenerateError("cross section: confinement factor is zero, extraction is singular");
  return {order, rate_coefficient / (std::pow(rate_factor(mode), order) * gamma_p)};
}

double median(std::span<const double> values) {
  if (values.empty()) throw ValidationError("median of empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

FieldGrid synthetic_grid(const SyntheticGridSpec& spec, int refine) {
  if (spec.nr < 2 || spec.nz < 2) throw ValidationError("synthetic grid: need nr, nz >= 2");
  if (refine < 1) throw ValidationError("synthetic grid: refine must be >= 1");
  if (!(spec.r_max > spec.r_min && spec.r_min >= 0.0 && spec.z_half > 0.0))
    throw ValidationError("synthetic grid: bad extents");

  auto ring = [](const GaussianRing& g, double r, double z) {
    const double dr = (r - g.r0) / g.sigma_r;
    const double dz = (z - g.z0) / g.sigma_z;
    return std::exp(-(dr * dr + dz * dz));
  };

  const int nr = spec.nr * refine;
  const int nz = spec.nz * refine;
  const double dr = (spec.r_max - spec.r_min) / nr;
  const double dz = 2.0 * spec.z_half / nz;
  const double eps = dielectric_constant(spec.refractive_index);

  // Snap the excitation-annulus edges to cell boundaries of the *base* grid,
  // so refined grids cut the indicator at identical radii and quadrature
  // refinement studies are not dominated by boundary-cell flips.
  const double base_dr = (spec.r_max - spec.r_min) / spec.nr;
  auto snap = [&](double r) {
    return spec.r_min + std::round((r - spec.r_min) / base_dr) * base_dr;
  };
  double edge_lo = snap(spec.spot_r_center - spec.spot_half_width);
  double edge_hi = snap(spec.spot_r_center + spec.spot_half_width);
  if (!(edge_hi > edge_lo)) edge_hi = edge_lo + base_dr;

  FieldGrid grid;
  grid.has_green = spec.green.has_value();
  grid.nodes.reserve(static_cast<std::size_t>(nr) * nz + 2);
  for (int i = 0; i < nr; ++i) {
    const double r = spec.r_min + (i + 0.5) * dr;  // cell midpoints
    for (int j = 0; j < nz; ++j) {
      const double z = -spec.z_half + (j + 0.5) * dz;
      FieldNode node;
      node.r = r;
      node.z = z;
      node.weight = 2.0 * std::numbers::pi * r * dr * dz;
      node.e2_ir = ring(spec.ir, r, z);
      node.e2_nv = ring(spec.nv, r, z);
      node.eps = eps;
      node.in_excitation = r > edge_lo && r < edge_hi;
      if (spec.green) node.e2_green = ring(*spec.green, r, z);
      grid.nodes.push_back(node);
    }
  }
  // Zero-weight sentinel nodes at the analytic profile peaks, so that
  // peak-normalized quantities (mode volume, confinement factors) see the
  // exact maximum regardless of how cell midpoints fall around it.
  FieldNode peak_ir{spec.ir.r0, spec.ir.z0, 0.0, 1.0, ring(spec.nv, spec.ir.r0, spec.ir.z0),
                    eps, spec.ir.r0 > edge_lo && spec.ir.r0 < edge_hi, 0.0};
  FieldNode peak_nv{spec.nv.r0, spec.nv.z0, 0.0, ring(spec.ir, spec.nv.r0, spec.nv.z0), 1.0,
                    eps, spec.nv.r0 > edge_lo && spec.nv.r0 < edge_hi, 0.0};
  if (spec.green) {
    peak_ir.e2_green = ring(*spec.green, spec.ir.r0, spec.ir.z0);
    peak_nv.e2_green = ring(*spec.green, spec.nv.r0, spec.nv.z0);
  }
  grid.nodes.push_back(peak_ir);
  grid.nodes.push_back(peak_nv);
  return grid;
}

}  // namespace nvcav
