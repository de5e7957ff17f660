#pragma once
// Domain types and random channel generation for the relay-assisted
// wireless-powered network: a hybrid relay first charges the K energy-free
// sources, then forwards their data over TDMA slots or FDMA subcarriers.
// All internal quantities are linear (watts/joules); dBm only at the CLI.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace rwpcn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Vec2& a, const Vec2& b);

struct SystemParams {
  int num_pairs = 4;         // K
  int num_subcarriers = 64;  // N (FDMA only)
  double total_energy = 1.0; // P: relay energy budget over the unit block [J]
  double peak_power = 2.0;   // P_peak [W]
  double conversion_efficiency = 0.8;  // eta
  double noise_density = 3.9810717055349694e-21;  // N0 [W/Hz] (-174 dBm/Hz)
  double bandwidth = 1.0e7;  // B [Hz]
  std::vector<double> processing_cost;  // E^c_k [J], length K
  double block_duration = 1.0;

  // Throws std::invalid_argument on violated invariants.
  void validate() const;
};

struct Geometry {
  std::vector<Vec2> source_positions;       // length K
  std::vector<Vec2> destination_positions;  // length K
  Vec2 relay_position{0.0, 0.0};
  double pathloss_exponent = 3.0;
  double rician_factor = 3.0;

  void validate(int num_pairs) const;
};

// Sampling regions for Monte-Carlo geometry draws: sources and destinations
// uniform in axis-aligned squares, relay on the x-axis.
struct ScenarioLayout {
  Vec2 source_center{-5.0, 0.0};
  Vec2 dest_center{5.0, 0.0};
  double region_side = 2.0;
  Vec2 relay_position{0.0, 0.0};
  double pathloss_exponent = 3.0;
  double rician_factor = 3.0;
};

struct ChannelInstance {
  std::vector<double> g_wpt;      // K: relay -> source k power gain
  std::vector<std::vector<double>> g_ss;  // KxK source i -> source k, symmetric, diag 0 (unused)
  std::vector<double> h1_tdma;    // K: source k -> relay
  std::vector<double> h2_tdma;    // K: relay -> destination k
  std::vector<std::vector<double>> h1_fdma;  // KxN per-subcarrier first hop
  std::vector<std::vector<double>> h2_fdma;  // KxN per-subcarrier second hop
  double noise_power_tdma = 0.0;  // N0 * B [W]
  double noise_power_fdma = 0.0;  // N0 * B / N [W]
};

// sigma^2 = N0*B, or N0*B/N per subcarrier.
double noise_power(const SystemParams& params, bool per_subcarrier);

Geometry sample_geometry(const ScenarioLayout& layout, int num_pairs,
                         std::uint64_t seed);

// Gains: distance^(-pathloss_exponent) * |rician fade|^2 with unit-mean-power
// Rician fading. Deterministic under a fixed seed. Throws on coincident
// node positions.
ChannelInstance generate_instance(const SystemParams& params,
                                  const Geometry& geom, std::uint64_t seed);

// Defaults matching the simulation setup (K pairs, 1e-7 J processing cost,
// eta=0.8, -174 dBm/Hz, 10 MHz, P=1 W, P_peak=2P, N=64).
SystemParams default_params(int num_pairs = 4, int num_subcarriers = 64);

namespace detail {

// Box-Muller standard normal on top of mt19937_64; avoids the
// implementation-defined std::normal_distribution for reproducibility.
double std_normal(std::mt19937_64& rng);
double uniform01(std::mt19937_64& rng);

// |LOS + scatter|^2 with Rician K-factor and unit mean power.
double rician_power_gain(std::mt19937_64& rng, double k_factor);

}  // namespace detail

}  // namespace rwpcn
