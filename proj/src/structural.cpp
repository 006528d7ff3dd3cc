#include "pcanatomy/structural.hpp"

#include <cmath>
#include <string>

#include "pcanatomy/errors.hpp"

namespace pcanatomy {

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw EstimationError("discount factor beta must lie in (0,1), got " + std::to_string(beta));
  }
}

}  // namespace

double kappa_from_psi(double psi, double rho, double beta) {
  check_beta(beta);
  return psi * (1.0 - beta * rho);
}

double psi_from_kappa(double kappa, double rho, double beta) {
  check_beta(beta);
  double factor = 1.0 - beta * rho;
  if (factor == 0.0) {
    throw EstimationError("psi_from_kappa: beta*rho = 1, mapping is singular");
  }
  return kappa / factor;
}

double implied_post_slope(double psi_base, double delta) { return psi_base + delta; }

double calvo_kappa(double xi, double beta) {
  check_beta(beta);
  if (!(xi > 0.0 && xi <= 1.0)) {
    throw EstimationError("Calvo parameter xi must lie in (0,1], got " + std::to_string(xi));
  }
  return (1.0 - xi) * (1.0 - beta * xi) / xi;
}

SlopeMapping SlopeMapping::make(double psi, double rho, double beta) {
  SlopeMapping m;
  m.psi = psi;
  m.rho = rho;
  m.beta = beta;
  m.kappa = kappa_from_psi(psi, rho, beta);
  return m;
}

}  // namespace pcanatomy
