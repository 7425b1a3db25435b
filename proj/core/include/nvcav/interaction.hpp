#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nvcav/cavity.hpp"

namespace nvcav {

// One node of an axisymmetric field-profile export. Field magnitudes carry an
// arbitrary common scale (only ratios enter the overlap integrals); weight is
// the node's volume element 2*pi*r*dr*dz.
struct FieldNode {
  double r = 0.0;       // m
  double z = 0.0;       // m
  double weight = 0.0;  // m^3
  double e2_ir = 0.0;   // |E_IR|^2
  double e2_nv = 0.0;   // |E_NV|^2 of the collection mode
  double eps = 0.0;     // dielectric constant, F/m
  bool in_excitation = false;
  double e2_green = 0.0;  // optional |E_532|^2 weight
};

struct FieldGrid {
  std::vector<FieldNode> nodes;
  bool has_green = false;
  void validate() const;
};

// How the excitation-laser profile weights the overlap: a constant spot
// (boolean in_excitation region) or the recorded |E_532|^2 column.
enum class ExcitationWeighting { indicator, green_intensity };

// V_o = integral(eps |E|^2 dV) / max(eps |E|^2).
double mode_volume(const FieldGrid& grid);

// Gamma^(p): weighted average over the excitation region of the p-th power of
// the IR intensity normalized to its global maximum, weighted by the
// collection-mode intensity. Lies in [0, 1].
double confinement_factor(const FieldGrid& grid, int order,
                          ExcitationWeighting weighting = ExcitationWeighting::indicator);

// p-photon cross section, units m^(2p) s^(p-1).
struct CrossSection {
  int order = 1;
  double value = 0.0;
};

// <K^(p)> = sigma^(p) * ((c/n_g) N / V_o)^p * Gamma^(p), in Hz.
double rate_from_cross_section(const CrossSection& sigma, double n_photons,
                               const CavityMode& mode, double gamma_p);

// Inverse of the above for a fitted per-photon^p coefficient (Hz/photon^p).
CrossSection cross_section_from_rate(double rate_coefficient, int order,
                                     const CavityMode& mode, double gamma_p);

// Median of a set of candidate confinement factors; the convention for
// reducing a range of simulated mode overlaps to one number.
double median(std::span<const double> values);

// Analytic Gaussian-ring test grids, mirroring the gridgen subcommand.
struct GaussianRing {
  double r0 = 0.0;       // m
  double z0 = 0.0;       // m
  double sigma_r = 1.0;  // m
  double sigma_z = 1.0;  // m
};

struct SyntheticGridSpec {
  int nr = 160;
  int nz = 80;
  double r_min = 1.0e-6;
  double r_max = 3.0e-6;
  double z_half = 0.4e-6;
  GaussianRing ir{2.2e-6, 0.0, 0.25e-6, 0.12e-6};
  GaussianRing nv{2.1e-6, 0.0, 0.35e-6, 0.15e-6};
  std::optional<GaussianRing> green;  // else the indicator column is used
  double spot_r_center = 2.2e-6;      // excitation annulus |r - center| <= half_width
  double spot_half_width = 0.4e-6;
  double refractive_index = kDiamondRefractiveIndex;
};

// refine > 1 subdivides every cell in both directions, keeping the analytic
// profiles; used for quadrature-refinement cross checks.
FieldGrid synthetic_grid(const SyntheticGridSpec& spec, int refine = 1);

}  // namespace nvcav
