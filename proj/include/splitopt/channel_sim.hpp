#pragma once

#include <complex>
#include <span>
#include <vector>

#include "splitopt/rng.hpp"

namespace splitopt {

using Complex = std::complex<double>;

// Mean per-symbol power ||h||^2 / S.
double mean_symbol_power(std::span<const Complex> latent);

// Noise variance for a target SNR: per-symbol signal power divided by
// 10^(snr_db/10). The expected signal power is read off the given vector,
// which is the only computable interpretation without a trained encoder.
// Throws if the vector carries no power.
double noise_variance(std::span<const Complex> latent, double snr_db);

// y = h + z with z circularly-symmetric complex gaussian noise of per-symbol
// variance sigma^2 (each component gets sigma^2/2). SNRs of 200 dB and above
// take the noiseless path and return the input unchanged.
std::vector<Complex> transmit(std::span<const Complex> latent, double snr_db,
                              Rng& rng);

// Empirical SNR in dB: 10*log10(||sent||^2 / ||received - sent||^2).
// Throws on dimension mismatch, a zero-power signal or zero noise.
double measure_snr(std::span<const Complex> sent,
                   std::span<const Complex> received);

// Synthetic latent vector with i.i.d. unit-power complex gaussian symbols.
std::vector<Complex> random_unit_power_latent(std::size_t dim, Rng& rng);

// Rescales a vector to unit mean per-symbol power.
std::vector<Complex> normalize_to_unit_power(std::vector<Complex> latent);

}  // namespace splitopt
