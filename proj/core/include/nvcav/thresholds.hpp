#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "nvcav/errors.hpp"
#include "nvcav/units.hpp"

namespace nvcav {

// Energy in eV known either exactly (lo == hi) or as an interval. Interval
// arithmetic propagates endpoints, so derived bounds stay bounds.
struct EnergyBound {
  double lo = 0.0;
  double hi = 0.0;
  std::string provenance;

  static EnergyBound point(double ev, std::string prov = {});
  static EnergyBound interval(double lo, double hi, std::string prov = {});
  static EnergyBound upper(double hi, std::string prov = {});  // [0, hi]

  bool is_point() const { return lo == hi; }
  void validate() const;
};

EnergyBound operator+(const EnergyBound& a, const EnergyBound& b);
EnergyBound operator-(const EnergyBound& a, const EnergyBound& b);

// Level energetics of the charge-conversion bookkeeping. Defaults carry the
// measured/estimated values with their provenance strings.
struct EnergyLedger {
  EnergyBound ip_3a2_2e;    // ionization potential of the NV- ground state
  EnergyBound e_zpl_minus;  // NV- zero-phonon line
  EnergyBound e_zpl_0;      // NV0 zero-phonon line
  EnergyBound delta_minus;  // E(1E) - E(3A2)
  EnergyBound delta_0;      // E(4A2) - E(2E)
  EnergyBound r_2a2_1e;     // recombination threshold 2A2 -> 1E (upper bound)
  EnergyBound singlet_gap;  // E(1A1) - E(1E)

  static EnergyLedger defaults();
  void validate() const;
};

// The four derived quantities, keyed "IP(1E->2E)", "IP(3E->2A2)",
// "IP(3E->4A2)", "R(4A2->3A2)".
std::map<std::string, EnergyBound> derived_thresholds(const EnergyLedger& ledger);

// Smallest n with n * E_photon >= threshold; exact equality counts.
int min_photons(double threshold_ev, const PhotonEnergy& photon);

// Lower bound on delta_0 implied by requiring two IR photons for ionization
// out of the NV- excited state: delta_0 > h_bar*omega_IR - (ip - E_zpl_minus).
double constrain_delta0(const EnergyLedger& ledger, const PhotonEnergy& ir_photon);

enum class ProcessDirection { ionization, recombination };

// Threshold expressions over the ledger.
enum class ThresholdRule {
  ip_ground,            // ip
  ip_singlet_ground,    // ip - delta_minus
  ip_singlet_excited,   // ip - delta_minus - singlet_gap
  ip_excited_to_2a2,    // ip - zpl_minus + zpl_0
  ip_excited_to_4a2,    // ip - zpl_minus + delta_0
  rec_2a2_to_1e,        // r
  rec_2a2_to_1a1,       // r + singlet_gap
  rec_2a2_to_3a2,       // r - delta_minus
  rec_4a2_to_3a2,       // r - delta_minus + zpl_0 - delta_0
};

EnergyBound evaluate_threshold(ThresholdRule rule, const EnergyLedger& ledger);
std::string threshold_rule_name(ThresholdRule rule);

// One candidate charge-conversion process. green_route records whether the
// model admits a single-green-photon route for it (the route structure is
// part of the model, not derivable from the energetics alone). A nonempty
// veto_reason rejects the process regardless of photon counting.
struct ChargeProcess {
  std::string name;  // e.g. "Ki25"
  int from_level = 0;
  int to_level = 0;
  ProcessDirection direction = ProcessDirection::ionization;
  ThresholdRule threshold = ThresholdRule::ip_ground;
  bool green_route = true;
  std::string veto_reason;
  std::string note;
};

std::vector<ChargeProcess> default_process_catalog();

struct LightSource {
  std::string label;
  double energy_ev = 0.0;
  bool is_green = false;
};

struct ProcessVerdict {
  ChargeProcess process;
  bool active = false;
  std::map<std::string, int> photon_order;  // per source label, threshold upper bound
  bool order_ambiguous = false;             // interval endpoints imply different orders
  int ir_order = 0;                         // common IR photon order, 0 if none
  bool green_active = false;                // single-green-photon route survives
  std::string reason;                       // rejection reason or route summary
};

// Classifies every cataloged process. A process survives if its IR photon
// order is identical across all IR sources and at most max_order, or if its
// admitted green route needs at most green_max_order photons. Output is
// sorted by process name, so it is invariant under reordering of the catalog
// and of the sources.
std::vector<ProcessVerdict> select_processes(std::span<const ChargeProcess> catalog,
                                             const EnergyLedger& ledger,
                                             std::span<const LightSource> sources,
                                             int max_order, int green_max_order = 1);

}  // namespace nvcav
