#include "splitopt/channel_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace splitopt {

namespace {

constexpr double kNoiselessSnrDb = 200.0;

double total_power(std::span<const Complex> v) {
  double sum = 0.0;
  for (const Complex& c : v) sum += std::norm(c);
  return sum;
}

}  // namespace

double mean_symbol_power(std::span<const Complex> latent) {
  if (latent.empty()) {
    throw std::invalid_argument("latent vector must be non-empty");
  }
  return total_power(latent) / static_cast<double>(latent.size());
}

double noise_variance(std::span<const Complex> latent, double snr_db) {
  const double power = mean_symbol_power(latent);
  if (power <= 0.0) {
    throw std::invalid_argument(
        "latent vector has zero power; SNR is undefined");
  }
  return power / std::pow(10.0, snr_db / 10.0);
}

std::vector<Complex> transmit(std::span<const Complex> latent, double snr_db,
                              Rng& rng) {
  std::vector<Complex> received(latent.begin(), latent.end());
  if (snr_db >= kNoiselessSnrDb) {
    return received;
  }
  const double sigma_sq = noise_variance(latent, snr_db);
  const double component_sd = std::sqrt(sigma_sq / 2.0);
  for (Complex& symbol : received) {
    const double re = rng.gaussian() * component_sd;
    const double im = rng.gaussian() * component_sd;
    symbol += Complex(re, im);
  }
  return received;
}

double measure_snr(std::span<const Complex> sent,
                   std::span<const Complex> received) {
  if (sent.size() != received.size()) {
    throw std::invalid_argument("vector dimensions differ");
  }
  const double signal = total_power(sent);
  if (signal <= 0.0) {
    throw std::invalid_argument("signal has zero power");
  }
  double noise = 0.0;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    noise += std::norm(received[i] - sent[i]);
  }
  if (noise <= 0.0) {
    throw std::invalid_argument("received vector carries no noise");
  }
  return 10.0 * std::log10(signal / noise);
}

std::vector<Complex> random_unit_power_latent(std::size_t dim, Rng& rng) {
  if (dim == 0) {
    throw std::invalid_argument("latent dimension must be positive");
  }
  // Component variance 1/2 gives unit expected per-symbol power.
  const double component_sd = std::sqrt(0.5);
  std::vector<Complex> latent(dim);
  for (Complex& symbol : latent) {
    const double re = rng.gaussian() * component_sd;
    const double im = rng.gaussian() * component_sd;
    symbol = Complex(re, im);
  }
  return latent;
}

std::vector<Complex> normalize_to_unit_power(std::vector<Complex> latent) {
  const double power = mean_symbol_power(latent);
  if (power <= 0.0) {
    throw std::invalid_argument("cannot normalize a zero-power vector");
  }
  const double scale = 1.0 / std::sqrt(power);
  for (Complex& symbol : latent) symbol *= scale;
  return latent;
}

}  // namespace splitopt
