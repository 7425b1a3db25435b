#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvcav/calib.hpp"
#include "nvcav/cavity.hpp"
#include "nvcav/interaction.hpp"
#include "nvcav/kinetics.hpp"
#include "nvcav/provenance.hpp"
#include "nvcav/thresholds.hpp"

// File formats of the toolkit:
//   detuning scan   CSV   wavelength_nm,transmission[,pl_nv0,pl_nvm] + JSON sidecar
//   cavity mode     JSON  SI fields plus derived Q_loaded
//   field grid      CSV   r_m,z_m,weight_m3,e2_ir,e2_nv,eps,in_excitation[,e2_green]
//   coefficients    JSON  keyed like the rate table (K_f_minus, K_25_2IR, ...)
//   energy ledger   JSON  point values or [lo, hi] intervals with provenance
//   dataset         CSV   n_ir,pl_norm,channel,green_power_mW,ir_label
// CSV readers skip '#' comment lines, so provenance headers round-trip.

namespace nvcav {

DetuningScan load_detuning_scan(const std::filesystem::path& csv,
                                const std::optional<std::filesystem::path>& sidecar = {});
void save_detuning_scan(const std::filesystem::path& csv, const DetuningScan& scan,
                        const Provenance& prov = {});

CavityMode cavity_mode_from_json(const std::string& text);
std::string cavity_mode_to_json(const CavityMode& mode, const Provenance* prov = nullptr);
CavityMode load_cavity_mode(const std::filesystem::path& path);
void save_cavity_mode(const std::filesystem::path& path, const CavityMode& mode,
                      const Provenance& prov = {});

FieldGrid load_field_grid(const std::filesystem::path& path);
void save_field_grid(const std::filesystem::path& path, const FieldGrid& grid,
                     const Provenance& prov = {});

RateCoefficients rate_coefficients_from_json(const std::string& text);
std::string rate_coefficients_to_json(const RateCoefficients& coeffs,
                                      const Provenance* prov = nullptr);
// Accepts either a bare coefficient document or a fit result (which nests the
// coefficients under "coefficients").
RateCoefficients load_rate_coefficients(const std::filesystem::path& path);
void save_rate_coefficients(const std::filesystem::path& path, const RateCoefficients& coeffs,
                            const Provenance& prov = {});

EnergyLedger ledger_from_json(const std::string& text);
std::string ledger_to_json(const EnergyLedger& ledger);
EnergyLedger load_ledger(const std::filesystem::path& path);

std::vector<ChargeProcess> catalog_from_json(const std::string& text);
std::vector<ChargeProcess> load_catalog(const std::filesystem::path& path);

// One CSV may carry several datasets; rows group by (green_power_mW, ir_label).
std::vector<CompiledDataset> load_compiled_datasets(const std::filesystem::path& path);
void save_compiled_datasets(const std::filesystem::path& path,
                            std::span<const CompiledDataset> datasets,
                            const Provenance& prov = {});

std::string fit_result_to_json(const FitResult& result, const Provenance& prov = {});

// Candidate confinement factors per IR label; medians are taken on load.
struct GammaSet {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};
std::map<std::string, GammaSet> gammas_from_json(const std::string& text);
std::map<std::string, GammaSet> load_gammas(const std::filesystem::path& path);

void save_sweep_csv(const std::filesystem::path& path, std::span<const SweepPoint> sweep,
                    const Provenance& prov = {});

struct TraceRow {
  double t = 0.0;
  Populations populations;
  double pl_nvm_norm = 0.0;
  double pl_nv0_norm = 0.0;
  double n_ir = 0.0;
};
void save_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows,
                    const Provenance& prov = {});

struct ContrastRow {
  double omega_eom = 0.0;  // rad/s
  double contrast = 0.0;
  bool settled = true;
};
void save_contrast_csv(const std::filesystem::path& path, std::span<const ContrastRow> rows,
                       const Provenance& prov = {});

std::string threshold_report_json(const EnergyLedger& ledger,
                                  std::span<const ProcessVerdict> verdicts,
                                  const std::map<std::string, double>& delta0_bounds,
                                  const std::map<std::string, int>& photon_counts,
                                  const Provenance& prov = {});
std::string threshold_report_table(const EnergyLedger& ledger,
                                   std::span<const ProcessVerdict> verdicts,
                                   const std::map<std::string, double>& delta0_bounds,
                                   const std::map<std::string, int>& photon_counts);

}  // namespace nvcav
