#pragma once

#include <cmath>

namespace pcanatomy {

/// Quarterly discount factor calibrated from an annual 0.99.
inline const double kDefaultBeta = std::pow(0.99, 0.25);

/// Reduced-form slope psi with slack persistence rho and discount beta,
/// mapped to the structural Phillips-curve slope kappa = psi*(1 - beta*rho).
double kappa_from_psi(double psi, double rho, double beta = kDefaultBeta);

/// Inverse mapping, psi = kappa / (1 - beta*rho). Throws when beta*rho = 1.
double psi_from_kappa(double kappa, double rho, double beta = kDefaultBeta);

/// Post-onset (or tight-regime) slope implied by a base slope plus a shift.
double implied_post_slope(double psi_base, double delta);

/// Calvo pricing slope kappa = (1-xi)(1-beta*xi)/xi for reset hazard 1-xi.
/// Requires xi in (0, 1]; beta in (0, 1).
double calvo_kappa(double xi, double beta);

/// One regime's slope bundle: reduced-form slope, its persistence, and the
/// structural slope the two imply.
struct SlopeMapping {
  double psi = 0.0;
  double rho = 0.0;
  double beta = kDefaultBeta;
  double kappa = 0.0;

  static SlopeMapping make(double psi, double rho, double beta = kDefaultBeta);
};

}  // namespace pcanatomy
