#pragma once

#include <span>

#include "ueglab/sampler.hpp"

namespace ueglab {

/// Kinetic energy per electron of the ideal Fermi gas, (3/10)(3 pi^2)^(2/3) rho^(2/3).
double thomas_fermi(double density);
/// Exchange energy per electron of the plane-wave determinant, -(3/4)(3/pi)^(1/3) rho^(1/3).
double dirac_exchange(double density);

/// (1/8) <|grad_1 log f|^2> = (gamma^2 / 8) <|F_1|^2>, from the gamma-free
/// |F_1|^2 estimate. Exactly zero at gamma = 0.
EstimateWithError nonlocal_kinetic(const EstimateWithError& reference_force_sq, double gamma);
/// Same, from a chain accumulator; rejects fewer than minimum_blocks blocks.
EstimateWithError nonlocal_kinetic(const BlockAccumulator& accumulator, double gamma);

/// Mean pair energy per electron from a chain accumulator.
EstimateWithError pair_energy(const BlockAccumulator& accumulator);

/// Variational objective w = t_nloc + v_ee per electron, formed block by
/// block so that the covariance of the two observables enters the error.
EstimateWithError objective(const BlockAccumulator& accumulator, double gamma);

/// Estimate of sum_i coefficient_i * observable_i, formed from block means.
EstimateWithError linear_combination(const BlockAccumulator& accumulator, std::span<const double> coefficients);

/// Per-electron correlation energies at one density (hartree).
struct CorrelationBreakdown {
  double density = 0;
  double thomas_fermi = 0;
  EstimateWithError t_nloc;
  EstimateWithError v_ee;
  double dirac_exchange = 0;
  EstimateWithError t_c;  // t_nloc
  EstimateWithError v_c;  // v_ee - dirac_exchange
  EstimateWithError e_c;  // t_c + v_c, errors added in quadrature
};

CorrelationBreakdown assemble(double density, const EstimateWithError& t_nloc, const EstimateWithError& v_ee);

}  // namespace ueglab
