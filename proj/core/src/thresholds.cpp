#include "nvcav/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nvcav {

EnergyBound EnergyBound::point(double ev, std::string prov) {
  EnergyBound b{ev, ev, std::move(prov)};
  b.validate();
  return b;
}

EnergyBound EnergyBound::interval(double lo, double hi, std::string prov) {
  EnergyBound b{lo, hi, std::move(prov)};
  b.validate();
  return b;
}

EnergyBound EnergyBound::upper(double hi, std::string prov) {
  EnergyBound b{0.0, hi, std::move(prov)};
  b.validate();
  return b;
}

void EnergyBound::validate() const {
  if (!(lo <= hi)) throw ValidationError("energy bound: lower endpoint above upper");
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ValidationError("energy bound: non-finite endpoint");
}

EnergyBound operator+(const EnergyBound& a, const EnergyBound& b) {
  return {a.lo + b.lo, a.hi + b.hi, {}};
}

EnergyBound operator-(const EnergyBound& a, const EnergyBound& b) {
  return {a.lo - b.hi, a.hi - b.lo, {}};
}

EnergyLedger EnergyLedger::defaults() {
  EnergyLedger l;
  l.ip_3a2_2e = EnergyBound::point(2.65, "measured ionization potential of the 3A2 ground state");
  l.e_zpl_minus = EnergyBound::point(1.946, "NV- zero-phonon line");
  l.e_zpl_0 = EnergyBound::point(2.16, "NV0 zero-phonon line");
  l.delta_minus = EnergyBound::point(0.38, "theoretical singlet-ground offset E(1E)-E(3A2)");
  l.delta_0 = EnergyBound::interval(
      0.58, 0.68,
      "quartet offset E(4A2)-E(2E); lower endpoint from the two-photon constraint, "
      "upper from theory");
  l.r_2a2_1e = EnergyBound::upper(0.81, "recombination 2A2->1E limited by one-photon access at "
                                        "the longer IR wavelength");
  l.singlet_gap = EnergyBound::point(1.19, "singlet gap E(1A1)-E(1E)");
  return l;
}

void EnergyLedger::validate() const {
  ip_3a2_2e.validate();
  e_zpl_minus.validate();
  e_zpl_0.validate();
  delta_minus.validate();
  delta_0.validate();
  r_2a2_1e.validate();
  singlet_gap.validate();
  for (const EnergyBound* b : {&ip_3a2_2e, &e_zpl_minus, &e_zpl_0, &delta_minus, &delta_0,
                               &singlet_gap}) {
    if (!(b->hi > 0.0)) throw ValidationError("energy ledger: entries must be positive");
  }
}

namespace {

EnergyBound clamp_nonnegative(EnergyBound b) {
  b.lo = std::max(b.lo, 0.0);
  b.hi = std::max(b.hi, 0.0);
  return b;
}

}  // namespace

EnergyBound evaluate_threshold(ThresholdRule rule, const EnergyLedger& l) {
  switch (rule) {
    case ThresholdRule::ip_ground:
      return l.ip_3a2_2e;
    case ThresholdRule::ip_singlet_ground:
      return l.ip_3a2_2e - l.delta_minus;
    case ThresholdRule::ip_singlet_excited:
      return clamp_nonnegative(l.ip_3a2_2e - l.delta_minus - l.singlet_gap);
    case ThresholdRule::ip_excited_to_2a2:
      return (l.ip_3a2_2e - l.e_zpl_minus) + l.e_zpl_0;
    case ThresholdRule::ip_excited_to_4a2:
      return (l.ip_3a2_2e - l.e_zpl_minus) + l.delta_0;
    case ThresholdRule::rec_2a2_to_1e:
      return l.r_2a2_1e;
    case ThresholdRule::rec_2a2_to_1a1:
      return l.r_2a2_1e + l.singlet_gap;
    case ThresholdRule::rec_2a2_to_3a2:
      return clamp_nonnegative(l.r_2a2_1e - l.delta_minus);
    case ThresholdRule::rec_4a2_to_3a2:
      return clamp_nonnegative((l.r_2a2_1e - l.delta_minus) + (l.e_zpl_0 - l.delta_0));
  }
  throw ValidationError("unknown threshold rule");
}

std::string threshold_rule_name(ThresholdRule rule) {
  switch (rule) {
    case ThresholdRule::ip_ground: return "IP(3A2->2E)";
    case ThresholdRule::ip_singlet_ground: return "IP(1E->2E)";
    case ThresholdRule::ip_singlet_excited: return "IP(1A1->2E)";
    case ThresholdRule::ip_excited_to_2a2: return "IP(3E->2A2)";
    case ThresholdRule::ip_excited_to_4a2: return "IP(3E->4A2)";
    case ThresholdRule::rec_2a2_to_1e: return "R(2A2->1E)";
    case ThresholdRule::rec_2a2_to_1a1: return "R(2A2->1A1)";
    case ThresholdRule::rec_2a2_to_3a2: return "R(2A2->3A2)";
    case ThresholdRule::rec_4a2_to_3a2: return "R(4A2->3A2)";
  }
  throw ValidationError("unknown threshold rule");
}

std::map<std::string, EnergyBound> derived_thresholds(const EnergyLedger& ledger) {
  ledger.validate();
  std::map<std::string, EnergyBound> out;
  for (ThresholdRule rule : {ThresholdRule::ip_singlet_ground, ThresholdRule::ip_excited_to_2a2,
                             ThresholdRule::ip_excited_to_4a2, ThresholdRule::rec_4a2_to_3a2}) {
    out.emplace(threshold_rule_name(rule), evaluate_threshold(rule, ledger));
  }
  return out;
}

int min_photons(double threshold_ev, const PhotonEnergy& photon) {
  if (!(threshold_ev > 0.0)) throw ValidationError("min photons: threshold must be positive");
  const double ev = photon.ev();
  double n = std::floor(threshold_ev / ev);
  if (n < 1.0) n = 1.0;
  if (n * ev >= threshold_ev) return static_cast<int>(n);
  return static_cast<int>(n) + 1;
}

double constrain_delta0(const EnergyLedger& ledger, const PhotonEnergy& ir_photon) {
  ledger.validate();
  // ip(3E->2E) = ip - zpl; requiring two IR photons gives
  // delta_0 + ip(3E->2E) > h_bar*omega. Only the largest admissible
  // ip(3E->2E) yields a guaranteed bound, so interval endpoints enter as
  // ip.hi - zpl.lo.
  const double ip_excited = ledger.ip_3a2_2e.hi - ledger.e_zpl_minus.lo;
  return ir_photon.ev() - ip_excited;
}

std::vector<ChargeProcess> default_process_catalog() {
  std::vector<ChargeProcess> catalog;
  catalog.push_back({"Ki16", 1, 6, ProcessDirection::ionization, ThresholdRule::ip_ground,
                     true, "",
                     "ionization of the 3A2 ground state"});
  catalog.push_back({"Ki46", 4, 6, ProcessDirection::ionization, ThresholdRule::ip_singlet_ground,
                     false, "",
                     "ionization of the 1E singlet ground state; no green route in the model"});
  catalog.push_back({"Ki36", 3, 6, ProcessDirection::ionization, ThresholdRule::ip_singlet_excited,
                     false, "comparably large decay rate from the 1A1 state",
                     "ionization of the 1A1 singlet excited state"});
  catalog.push_back({"Ki27", 2, 7, ProcessDirection::ionization, ThresholdRule::ip_excited_to_2a2,
                     true, "",
                     "ionization of the 3E excited state to the NV0 excited state"});
  catalog.push_back({"Ki25", 2, 5, ProcessDirection::ionization, ThresholdRule::ip_excited_to_4a2,
                     true, "",
                     "ionization of the 3E excited state to the NV0 quartet"});
  catalog.push_back({"Kr74", 7, 4, ProcessDirection::recombination, ThresholdRule::rec_2a2_to_1e,
                     true, "",
                     "recombination of the NV0 excited state to the 1E singlet"});
  catalog.push_back({"Kr73", 7, 3, ProcessDirection::recombination, ThresholdRule::rec_2a2_to_1a1,
                     false, "",
                     "recombination of the NV0 excited state to the 1A1 singlet; no green route "
                     "in the model"});
  catalog.push_back({"Kr71", 7, 1, ProcessDirection::recombination, ThresholdRule::rec_2a2_to_3a2,
                     true, "including it does not improve or change the fit significantly",
                     "recombination of the NV0 excited state straight to the NV- ground state"});
  catalog.push_back({"Kr51", 5, 1, ProcessDirection::recombination, ThresholdRule::rec_4a2_to_3a2,
                     true, "",
                     "recombination of the NV0 quartet to the NV- ground state"});
  return catalog;
}

namespace {

// Photon order against an interval threshold: the upper endpoint gives the
// guaranteed order; a mismatch with the lower endpoint is flagged.
struct OrderResult {
  int order = 0;
  bool ambiguous = false;
};

OrderResult order_for(const EnergyBound& threshold, double energy_ev) {
  const PhotonEnergy photon = PhotonEnergy::from_ev(energy_ev);
  OrderResult r;
  r.order = threshold.hi > 0.0 ? min_photons(threshold.hi, photon) : 1;
  const int order_lo = threshold.lo > 0.0 ? min_photons(threshold.lo, photon) : 1;
  r.ambiguous = order_lo != r.order;
  return r;
}

}  // namespace

std::vector<ProcessVerdict> select_processes(std::span<const ChargeProcess> catalog,
                                             const EnergyLedger& ledger,
                                             std::span<const LightSource> sources,
                                             int max_order, int green_max_order) {
  ledger.validate();
  if (sources.empty()) throw ValidationError("select processes: no light sources given");
  if (max_order < 0) throw ValidationError("select processes: max_order must be nonnegative");

  std::vector<LightSource> ir_sources;
  std::vector<LightSource> green_sources;
  for (const auto& s : sources) {
    (s.is_green ? green_sources : ir_sources).push_back(s);
  }

  std::vector<ProcessVerdict> verdicts;
  for (const auto& process : catalog) {
    ProcessVerdict v;
    v.process = process;
    const EnergyBound threshold = evaluate_threshold(process.threshold, ledger);

    std::vector<int> ir_orders;
    for (const auto& s : sources) {
      const OrderResult r = order_for(threshold, s.energy_ev);
      v.photon_order[s.label] = r.order;
      v.order_ambiguous = v.order_ambiguous || r.ambiguous;
      if (!s.is_green) ir_orders.push_back(r.order);
    }

    const bool ir_uniform =
        !ir_orders.empty() &&
        std::all_of(ir_orders.begin(), ir_orders.end(), [&](int o) { return o == ir_orders[0]; });
    const bool ir_valid = ir_uniform && ir_orders[0] <= max_order;
    const int max_ir_order = ir_orders.empty() ? 0 : *std::max_element(ir_orders.begin(), ir_orders.end());

    // The green route is capped both by its own order limit and by the
    // overall photon budget, so max_order = 0 disables everything.
    const int green_cap = std::min(green_max_order, max_order);
    bool green_valid = false;
    if (process.green_route && !green_sources.empty()) {
      green_valid = true;
      for (const auto& s : green_sources) {
        if (v.photon_order[s.label] > green_cap) green_valid = false;
      }
    }

    if (!process.veto_reason.empty()) {
      v.active = false;
      v.reason = "vetoed: " + process.veto_reason;
    } else if (ir_valid || green_valid) {
      v.active = true;
      v.ir_order = ir_valid ? ir_orders[0] : 0;
      v.green_active = green_valid;
      std::ostringstream os;
      if (ir_valid) os << ir_orders[0] << " IR photon" << (ir_orders[0] > 1 ? "s" : "");
      if (ir_valid && green_valid) os << " or ";
      if (green_valid) os << "1 green";
      if (!ir_valid && green_valid) os << " only";
      v.reason = os.str();
    } else {
      v.active = false;
      std::ostringstream os;
      if (!ir_orders.empty() && max_ir_order > max_order && !ir_uniform) {
        os << "order > " << max_order << " and mismatched";
      } else if (!ir_uniform && !ir_orders.empty()) {
        os << "mismatched IR photon order";
      } else if (!ir_orders.empty()) {
        os << "order > " << max_order;
      } else {
        os << "no IR sources";
      }
      if (process.green_route && !green_valid && !green_sources.empty()) {
        os << "; green route needs more than " << green_cap << " photon"
           << (green_cap > 1 ? "s" : "");
      }
      v.reason = os.str();
    }
    verdicts.push_back(std::move(v));
  }

  std::sort(verdicts.begin(), verdicts.end(),
            [](const ProcessVerdict& a, const ProcessVerdict& b) {
              return a.process.name < b.process.name;
            });
  return verdicts;
}

}  // namespace nvcav
