#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vnoip {

struct GradCheckReport {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Central-difference checks (h = 1e-5) for every differentiable primitive
/// (tolerance 1e-6), the jump-ODE pass plus fusion on a 3-event cascade
/// (1e-4), and the full training loss on a toy cascade over every parameter
/// (1e-4).
std::vector<GradCheckReport> run_gradcheck_suite();

/// One line per check; returns true when everything passed.
bool print_gradcheck_report(const std::vector<GradCheckReport>& reports, std::ostream& out);

}  // namespace vnoip
