#include "rwpcn/model.hpp"

#include <cmath>

namespace rwpcn {

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void SystemParams::validate() const {
  if (num_pairs < 1) throw std::invalid_argument("num_pairs must be >= 1");
  if (num_subcarriers < 1)
    throw std::invalid_argument("num_subcarriers must be >= 1");
  if (!(total_energy > 0.0))
    throw std::invalid_argument("total_energy must be > 0");
  if (!(peak_power >= total_energy))
    throw std::invalid_argument("peak_power must be >= total_energy");
  if (!(conversion_efficiency > 0.0 && conversion_efficiency < 1.0))
    throw std::invalid_argument("conversion_efficiency must be in (0,1)");
  if (!(noise_density > 0.0))
    throw std::invalid_argument("noise_density must be > 0");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  if (processing_cost.size() != static_cast<std::size_t>(num_pairs))
    throw std::invalid_argument("processing_cost must have num_pairs entries");
  for (double c : processing_cost)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("processing_cost entries must be >= 0");
  if (block_duration != 1.0)
    throw std::invalid_argument("block_duration is normalized to 1.0");
}

void Geometry::validate(int num_pairs) const {
  const auto k = static_cast<std::size_t>(num_pairs);
  if (source_positions.size() != k || destination_positions.size() != k)
    throw std::invalid_argument("geometry position lists must have K entries");
  auto finite = [](const Vec2& v) {
    return std::isfinite(v.x) && std::isfinite(v.y);
  };
  for (const auto& p : source_positions)
    if (!finite(p)) throw std::invalid_argument("non-finite source position");
  for (const auto& p : destination_positions)
    if (!finite(p))
      throw std::invalid_argument("non-finite destination position");
  if (!finite(relay_position))
    throw std::invalid_argument("non-finite relay position");
  if (!(pathloss_exponent >= 0.0))
    throw std::invalid_argument("pathloss_exponent must be >= 0");
  if (!(rician_factor >= 0.0))
    throw std::invalid_argument("rician_factor must be >= 0");
}

double noise_power(const SystemParams& params, bool per_subcarrier) {
  const double full = params.noise_density * params.bandwidth;
  return per_subcarrier ? full / params.num_subcarriers : full;
}

SystemParams default_params(int num_pairs, int num_subcarriers) {
  SystemParams p;
  p.num_pairs = num_pairs;
  p.num_subcarriers = num_subcarriers;
  p.total_energy = 1.0;  // 30 dBm
  p.peak_power = 2.0;
  p.processing_cost.assign(num_pairs, 1e-7);
  return p;
}

namespace detail {

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa draw in [0,1); independent of std library internals.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double std_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

double rician_power_gain(std::mt19937_64& rng, double k_factor) {
  // LOS amplitude sqrt(K/(K+1)), scatter CN(0, 1/(K+1)): E|h|^2 = 1.
  const double los = std::sqrt(k_factor / (k_factor + 1.0));
  const double sigma = std::sqrt(0.5 / (k_factor + 1.0));
  const double re = los + sigma * std_normal(rng);
  const double im = sigma * std_normal(rng);
  return re * re + im * im;
}

}  // namespace detail

Geometry sample_geometry(const ScenarioLayout& layout, int num_pairs,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Geometry g;
  g.relay_position = layout.relay_position;
  g.pathloss_exponent = layout.pathloss_exponent;
  g.rician_factor = layout.rician_factor;
  const double half = 0.5 * layout.region_side;
  auto draw = [&](const Vec2& center) {
    return Vec2{center.x + (2.0 * detail::uniform01(rng) - 1.0) * half,
                center.y + (2.0 * detail::uniform01(rng) - 1.0) * half};
  };
  for (int k = 0; k < num_pairs; ++k) g.source_positions.push_back(draw(layout.source_center));
  for (int k = 0; k < num_pairs; ++k)
    g.destination_positions.push_back(draw(layout.dest_center));
  return g;
}

namespace {

double pathloss_gain(const Vec2& a, const Vec2& b, double exponent) {
  const double d = distance(a, b);
  if (d <= 0.0)
    throw std::invalid_argument("degenerate geometry: coincident nodes");
  return std::pow(d, -exponent);
}

}  // namespace

ChannelInstance generate_instance(const SystemParams& params,
                                  const Geometry& geom, std::uint64_t seed) {
  params.validate();
  geom.validate(params.num_pairs);

  const int k_pairs = params.num_pairs;
  const int n_sc = params.num_subcarriers;
  const double rf = geom.rician_factor;
  std::mt19937_64 rng(seed);

  ChannelInstance inst;
  inst.noise_power_tdma = noise_power(params, false);
  inst.noise_power_fdma = noise_power(params, true);

  // Draw order is fixed: WPT links, source-source links, TDMA hops, then
  // per-subcarrier FDMA hops.
  inst.g_wpt.resize(k_pairs);
  for (int k = 0; k < k_pairs; ++k) {
    const double pl = pathloss_gain(geom.relay_position,
                                    geom.source_positions[k],
                                    geom.pathloss_exponent);
    inst.g_wpt[k] = pl * detail::rician_power_gain(rng, rf);
  }

  inst.g_ss.assign(k_pairs, std::vector<double>(k_pairs, 0.0));
  for (int i = 0; i < k_pairs; ++i)
    for (int k = i + 1; k < k_pairs; ++k) {
      const double pl = pathloss_gain(geom.source_positions[i],
                                      geom.source_positions[k],
                                      geom.pathloss_exponent);
      const double gain = pl * detail::rician_power_gain(rng, rf);
      inst.g_ss[i][k] = gain;
      inst.g_ss[k][i] = gain;
    }

  inst.h1_tdma.resize(k_pairs);
  inst.h2_tdma.resize(k_pairs);
  for (int k = 0; k < k_pairs; ++k) {
    const double pl1 = pathloss_gain(geom.source_positions[k],
                                     geom.relay_position,
                                     geom.pathloss_exponent);
    const double pl2 = pathloss_gain(geom.relay_position,
                                     geom.destination_positions[k],
                                     geom.pathloss_exponent);
    inst.h1_tdma[k] = pl1 * detail::rician_power_gain(rng, rf);
    inst.h2_tdma[k] = pl2 * detail::rician_power_gain(rng, rf);
  }

  inst.h1_fdma.assign(k_pairs, std::vector<double>(n_sc));
  inst.h2_fdma.assign(k_pairs, std::vector<double>(n_sc));
  for (int k = 0; k < k_pairs; ++k) {
    const double pl1 = pathloss_gain(geom.source_positions[k],
                                     geom.relay_position,
                                     geom.pathloss_exponent);
    const double pl2 = pathloss_gain(geom.relay_position,
                                     geom.destination_positions[k],
                                     geom.pathloss_exponent);
    for (int n = 0; n < n_sc; ++n)
      inst.h1_fdma[k][n] = pl1 * detail::rician_power_gain(rng, rf);
    for (int n = 0; n < n_sc; ++n)
      inst.h2_fdma[k][n] = pl2 * detail::rician_power_gain(rng, rf);
  }

  return inst;
}

}  // namespace rwpcn
