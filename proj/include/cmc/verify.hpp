#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cmc/axisym.hpp"
#include "cmc/critical.hpp"
#include "cmc/solver.hpp"

namespace cmc {

enum class PropertyStatus { Pass, Fail, Warn, Skip };
const char* to_string(PropertyStatus s);

struct PropertyRecord {
  std::string name;
  std::string anchor;  // the statement the property checks
  PropertyStatus status = PropertyStatus::Skip;
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::pair<std::string, double>> tolerances;
  std::string note;
};

enum class Verdict { Pass, Fail, Error };
const char* to_string(Verdict v);

struct VerificationReport {
  std::vector<PropertyRecord> properties;
  Verdict verdict = Verdict::Pass;
  std::string error;  // set when the verdict is Error
};

struct VerifyTolerances {
  double sign_deadband = 1e-10;
  double trace_rel = 0.1;
  double monotone_tol = 1e-10;
  double axis_cross_rel = 0.1;
  // Relative revolved-volume error allowed, in units of h^2.
  double volume_h2 = 1.0;
  double feasibility_rel = 1e-4;
  // Degenerate contact needs at least this many sectors and this fitted degree.
  int contact_sectors = 6;
  double contact_degree = 3.0;
  CriticalOptions critical;
};

// Registered property names in report order. Unknown names are rejected.
const std::vector<std::string>& property_names();
const std::string& property_anchor(const std::string& name);
void check_property_names(const std::vector<std::string>& names);

PropertyRecord verify_sign_conditions(const ScalarField& u, const ProblemSpec& spec,
                                      const VerifyTolerances& tol = {});

// critical_count, critical_minimum, morse_nondegenerate, no_interior_maximum,
// index_sum, critical_identity.
std::vector<PropertyRecord> verify_critical_structure(const ScalarField& u, double H,
                                                      const CriticalAnalysis& cp,
                                                      const VerifyTolerances& tol = {});

// (min count >= 2) <=> (saddle count >= 1).
PropertyRecord verify_saddle_equivalence(const CriticalAnalysis& cp);

PropertyRecord verify_feasibility(const FeasibilityReport& f);

// One minimum, no saddle and Morse at every recorded t; positive curvature at
// t = 0 for Robin data. An incomplete trace gives Warn, never Pass.
PropertyRecord verify_homotopy_stability(const HomotopyTrace& trace, const ProblemSpec& spec);

// Difference against the cylinder matched at the critical point: sector count
// >= contact_sectors together with fitted degree >= contact_degree would mean
// a degenerate contact.
PropertyRecord verify_degenerate_contact(const ScalarField& u, double H,
                                         const CriticalAnalysis& cp,
                                         const VerifyTolerances& tol = {});

// Meridian properties: axis_critical_point, axis_hessian_positive,
// radial_monotone, axial_nodal_curve, revolution_measure.
std::vector<PropertyRecord> verify_axisymmetric(const ScalarField& v, const MeridianProblem& problem,
                                                const VerifyTolerances& tol = {});

// Verdict: Pass iff every property that is neither Warn nor Skip passes.
VerificationReport aggregate(std::vector<PropertyRecord> properties);

}  // namespace cmc
