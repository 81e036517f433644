// Copyright 2026 The radseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "radseg/radar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

RADSEG_NAMESPACE_BEGIN

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_coverage(const RadarParams& p, const PointTarget& t) {
  const double rb = p.range_bin(t.range);
  if (!(t.range >= 0) || rb > static_cast<double>(p.n_range - 1)) {
    throw ConfigError("target outside coverage: range " + fmt(t.range) +
                      " m not in [0, " +
                      fmt(p.range_of_bin(static_cast<double>(p.n_range - 1))) +
                      "] m");
  }
  const double db = p.doppler_bin(t.velocity);
  if (!(std::abs(t.velocity) < p.max_speed) || db < 0 ||
      db > static_cast<double>(p.n_doppler - 1)) {
    throw ConfigError("target outside coverage: velocity " + fmt(t.velocity) +
                      " m/s exceeds max_speed " + fmt(p.max_speed) + " m/s");
  }
  const double ab = p.angle_bin(t.angle);
  if (!(std::abs(t.angle) < std::numbers::pi / 2) || ab < 0 ||
      ab > static_cast<double>(p.n_angle - 1)) {
    throw ConfigError("target outside coverage: angle " + fmt(t.angle) +
                      " rad outside the field of view");
  }
  if (!(t.rcs > 0)) throw ConfigError("target rcs must be positive");
  for (Index e : t.extent) {
    if (e < 1) throw ConfigError("target extent must be >= 1 bin on every axis");
  }
}

std::vector<Complex> phasor(double bins_per_cycle_offset, Index n) {
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double ph = kTwoPi * bins_per_cycle_offset * static_cast<double>(i) /
                      static_cast<double>(n);
    out[i] = Complex(std::cos(ph), std::sin(ph));
  }
  return out;
}

Index clamp_bin(double bin, Index n) {
  return std::clamp<Index>(static_cast<Index>(std::lround(bin)), 0, n - 1);
}

void paint_ellipse(LabelMap& m, Index r0, Index c0, Index er, Index ec,
                   std::uint8_t label) {
  for (Index r = std::max<Index>(0, r0 - er); r <= std::min(m.rows - 1, r0 + er);
       ++r) {
    const double dr = static_cast<double>(r - r0) / static_cast<double>(er);
    for (Index c = std::max<Index>(0, c0 - ec);
         c <= std::min(m.cols - 1, c0 + ec); ++c) {
      const double dc = static_cast<double>(c - c0) / static_cast<double>(ec);
      if (dr * dr + dc * dc <= 1.0) m.labels[r * m.cols + c] = label;
    }
  }
}

bool inside(const RadarParams& p, const PointTarget& t) {
  try {
    check_coverage(p, t);
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

}  // namespace

RadarParams RadarParams::with_extents(Index n_range, Index n_angle,
                                      Index n_doppler) {
  RadarParams p;
  p.n_range = n_range;
  p.n_angle = n_angle;
  p.n_doppler = n_doppler;
  p.noise_std = std::sqrt(static_cast<double>(n_range * n_angle) / 30.0);
  return p;
}

RadarParams RadarParams::full() { return with_extents(256, 256, 64); }
RadarParams RadarParams::desk() { return with_extents(128, 128, 32); }
RadarParams RadarParams::small() { return with_extents(64, 64, 16); }

RadarParams RadarParams::profile(const std::string& name) {
  if (name == "full") return full();
  if (name == "desk") return desk();
  if (name == "small") return small();
  throw ConfigError("unknown radar profile '" + name + "' (full, desk, small)");
}

void RadarParams::validate() const {
  if (n_range < 2 || n_angle < 2 || n_doppler < 2) {
    throw ConfigError("radar: bin counts must be >= 2");
  }
  if (!(max_range > 0) || !(max_speed > 0) || !(carrier_hz > 0)) {
    throw ConfigError("radar: max_range, max_speed and carrier must be positive");
  }
  if (noise_std < 0) throw ConfigError("radar: noise_std must be >= 0");
}

double RadarParams::bandwidth() const {
  return kSpeedOfLight * static_cast<double>(n_range) / (2.0 * max_range);
}

double RadarParams::velocity_resolution() const {
  return 2.0 * max_speed / static_cast<double>(n_doppler);
}

double RadarParams::range_bin(double range) const {
  return range / range_resolution();
}

double RadarParams::doppler_bin(double velocity) const {
  return static_cast<double>(n_doppler / 2) + velocity / velocity_resolution();
}

double RadarParams::angle_bin(double angle) const {
  return static_cast<double>(n_angle / 2) +
         static_cast<double>(n_angle) * std::sin(angle) / 2.0;
}

double RadarParams::range_of_bin(double bin) const {
  return bin * range_resolution();
}

double RadarParams::velocity_of_bin(double bin) const {
  return (bin - static_cast<double>(n_doppler / 2)) * velocity_resolution();
}

double RadarParams::angle_of_bin(double bin) const {
  const double s = 2.0 * (bin - static_cast<double>(n_angle / 2)) /
                   static_cast<double>(n_angle);
  return std::asin(std::clamp(s, -1.0, 1.0));
}

RadCube::RadCube(Index r, Index a, Index d)
    : n_range(r),
      n_angle(a),
      n_doppler(d),
      values(static_cast<std::size_t>(r * a * d), Complex(0, 0)) {}

RadCube synthesize_adc(const RadarParams& params,
                       const std::vector<PointTarget>& targets,
                       std::uint64_t seed) {
  params.validate();
  RadCube cube(params.n_range, params.n_angle, params.n_doppler);
  const Index na = params.n_angle, nd = params.n_doppler;
  for (const auto& t : targets) {
    check_coverage(params, t);
    // Beat frequency in cycles per fast-time record equals the range bin;
    // chirp-to-chirp and antenna-to-antenna phase steps give the Doppler and
    // spatial frequencies.
    const auto fast = phasor(params.range_bin(t.range), params.n_range);
    const auto space = phasor(params.angle_bin(t.angle) - static_cast<double>(na / 2), na);
    const auto slow = phasor(params.doppler_bin(t.velocity) - static_cast<double>(nd / 2), nd);
    const Complex amp = std::polar(std::sqrt(t.rcs), t.phase);
    std::vector<Complex> plane(static_cast<std::size_t>(na * nd));
    for (Index a = 0; a < na; ++a) {
      const Complex sa = amp * space[a];
      for (Index d = 0; d < nd; ++d) plane[a * nd + d] = sa * slow[d];
    }
    for (Index r = 0; r < params.n_range; ++r) {
      Complex* row = cube.values.data() + r * na * nd;
      const Complex fr = fast[r];
      for (Index i = 0; i < na * nd; ++i) row[i] += fr * plane[i];
    }
  }
  if (params.noise_std > 0) {
    Rng rng(seed);
    const double s = params.noise_std / std::sqrt(2.0);
    for (auto& v : cube.values) v += Complex(rng.normal(0, s), rng.normal(0, s));
  }
  return cube;
}

RadCube fft_chain(RadCube cube) {
  const Index nr = cube.n_range, na = cube.n_angle, nd = cube.n_doppler;
  for (Index n : {nr, na, nd}) {
    if (!is_power_of_two(n)) {
      throw ConfigError("fft_chain: extent " + std::to_string(n) +
                        " is not a power of two");
    }
  }
  Complex* v = cube.values.data();
  // Range-FFT over fast-time samples.
  for (Index i = 0; i < na * nd; ++i) fft_inplace(v + i, nr, na * nd);
  // Angle-FFT across antennas.
  for (Index r = 0; r < nr; ++r) {
    for (Index d = 0; d < nd; ++d) {
      Complex* line = v + r * na * nd + d;
      fft_inplace(line, na, nd);
      fft_shift(line, na, nd);
    }
  }
  // Doppler-FFT across chirps.
  for (Index i = 0; i < nr * na; ++i) {
    fft_inplace(v + i * nd, nd, 1);
    fft_shift(v + i * nd, nd, 1);
  }
  return cube;
}

RadCube apply_speckle(RadCube rad, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& v : rad.values) {
    const double intensity = rng.exponential();
    const double phase = kTwoPi * rng.uniform();
    v *= std::polar(std::sqrt(intensity), phase);
  }
  return rad;
}

ViewSet aggregate_views(const RadCube& rad) {
  const Index nr = rad.n_range, na = rad.n_angle, nd = rad.n_doppler;
  ViewSet out;
  out.rd = Map2D{nr, nd, std::vector<double>(static_cast<std::size_t>(nr * nd), 0.0)};
  out.ad = Map2D{na, nd, std::vector<double>(static_cast<std::size_t>(na * nd), 0.0)};
  out.ra = Map2D{nr, na, std::vector<double>(static_cast<std::size_t>(nr * na), 0.0)};
  for (Index r = 0; r < nr; ++r) {
    for (Index a = 0; a < na; ++a) {
      const Complex* line = rad.values.data() + (r * na + a) * nd;
      double ra_acc = 0;
      for (Index d = 0; d < nd; ++d) {
        const double p = std::norm(line[d]);
        out.rd.values[r * nd + d] += p;
        out.ad.values[a * nd + d] += p;
        ra_acc += p;
      }
      out.ra.values[r * na + a] = ra_acc;
    }
  }
  auto to_db = [](Map2D& m, double count) {
    for (double& v : m.values) v = 10.0 * std::log10(std::max(v / count, kLogFloor));
  };
  to_db(out.rd, static_cast<double>(na));
  to_db(out.ad, static_cast<double>(nr));
  to_db(out.ra, static_cast<double>(nd));
  return out;
}

std::pair<LabelMap, LabelMap> render_masks(const RadarParams& params,
                                           const std::vector<PointTarget>& targets) {
  LabelMap rd{params.n_range, params.n_doppler,
              std::vector<std::uint8_t>(static_cast<std::size_t>(params.n_range * params.n_doppler), 0)};
  LabelMap ra{params.n_range, params.n_angle,
              std::vector<std::uint8_t>(static_cast<std::size_t>(params.n_range * params.n_angle), 0)};
  for (const auto& t : targets) {
    const Index r0 = clamp_bin(params.range_bin(t.range), params.n_range);
    const Index d0 = clamp_bin(params.doppler_bin(t.velocity), params.n_doppler);
    const Index a0 = clamp_bin(params.angle_bin(t.angle), params.n_angle);
    const auto label = static_cast<std::uint8_t>(t.label);
    const Index er = std::max<Index>(1, t.extent[0]);
    paint_ellipse(rd, r0, d0, er, std::max<Index>(1, t.extent[1]), label);
    paint_ellipse(ra, r0, a0, er, std::max<Index>(1, t.extent[2]), label);
  }
  return {std::move(rd), std::move(ra)};
}

SceneObject make_object(const RadarParams& params, ObjectClass label,
                        double range, double velocity, double angle) {
  // Footprints are given for the 128 x 128 x 32 profile and scaled.
  struct Template {
    std::array<double, 3> extent;
    double rcs;
    int scatterers;
  };
  Template t{};
  switch (label) {
    case ObjectClass::kPedestrian: t = {{2, 2, 2}, 1.0, 4}; break;
    case ObjectClass::kCyclist: t = {{3, 2, 3}, 2.0, 6}; break;
    case ObjectClass::kCar: t = {{5, 1, 5}, 6.0, 10}; break;
    default: throw ConfigError("make_object: background is not an object");
  }
  const std::array<double, 3> scale{static_cast<double>(params.n_range) / 128.0,
                                    static_cast<double>(params.n_doppler) / 32.0,
                                    static_cast<double>(params.n_angle) / 128.0};
  SceneObject o;
  o.label = label;
  o.range = range;
  o.velocity = velocity;
  o.angle = angle;
  o.rcs = t.rcs;
  o.scatterers = t.scatterers;
  for (int a = 0; a < 3; ++a) {
    o.extent[a] = std::max<Index>(1, std::lround(t.extent[a] * scale[a]));
  }
  return o;
}

SimulatedSequence simulate_sequence(const RadarParams& params,
                                    const Scenario& scenario, Index n_frames,
                                    std::uint64_t seed, bool speckle) {
  params.validate();
  if (n_frames < 1) throw ConfigError("simulate_sequence: need >= 1 frame");

  // Rigid scatterer layout per object, fixed for the whole sequence:
  // (range, Doppler, angle) offsets in bins and an amplitude factor.
  struct Offset {
    double dr, dd, da, gain;
  };
  std::vector<std::vector<Offset>> layouts;
  for (std::size_t i = 0; i < scenario.objects.size(); ++i) {
    const auto& o = scenario.objects[i];
    Rng rng(derive_seed(seed, 0x5CA7'0000ULL + i));
    std::vector<Offset> layout{{0, 0, 0, 1.0}};
    for (int s = 1; s < o.scatterers; ++s) {
      double u, v, w;
      do {
        u = rng.uniform(-1, 1);
        v = rng.uniform(-1, 1);
        w = rng.uniform(-1, 1);
      } while (u * u + v * v + w * w > 1.0);
      layout.push_back({0.8 * u * o.extent[0], 0.8 * v * o.extent[1],
                        0.8 * w * o.extent[2], rng.uniform(0.4, 1.0)});
    }
    layouts.push_back(std::move(layout));
  }

  SimulatedSequence seq;
  std::vector<bool> alive(scenario.objects.size(), true);
  for (Index f = 0; f < n_frames; ++f) {
    const std::uint64_t frame_seed = derive_seed(seed, static_cast<std::uint64_t>(f));
    Rng phase_rng(derive_seed(frame_seed, 1));
    std::vector<PointTarget> mains;
    std::vector<PointTarget> scatterers;
    for (std::size_t i = 0; i < scenario.objects.size(); ++i) {
      if (!alive[i]) continue;
      const auto& o = scenario.objects[i];
      PointTarget main;
      main.range = o.range + o.velocity * scenario.frame_period * static_cast<double>(f);
      main.velocity = o.velocity;
      main.angle = o.angle;
      main.rcs = o.rcs;
      main.label = o.label;
      main.extent = o.extent;
      if (!inside(params, main)) {
        alive[i] = false;
        seq.events.push_back("frame " + std::to_string(f) + ": object " +
                             std::to_string(i) + " left the coverage and was dropped");
        continue;
      }
      mains.push_back(main);
      for (const auto& off : layouts[i]) {
        PointTarget s = main;
        s.range = params.range_of_bin(params.range_bin(main.range) + off.dr);
        s.velocity = params.velocity_of_bin(params.doppler_bin(main.velocity) + off.dd);
        s.angle = params.angle_of_bin(params.angle_bin(main.angle) + off.da);
        s.rcs = main.rcs * off.gain * off.gain;
        s.phase = kTwoPi * phase_rng.uniform();
        if (inside(params, s)) scatterers.push_back(s);
      }
    }
    RadCube rad = fft_chain(synthesize_adc(params, scatterers, derive_seed(frame_seed, 2)));
    if (speckle) rad = apply_speckle(std::move(rad), derive_seed(frame_seed, 3));
    ViewFrame frame;
    frame.views = aggregate_views(rad);
    auto [rd, ra] = render_masks(params, mains);
    frame.rd_mask = std::move(rd);
    frame.ra_mask = std::move(ra);
    frame.timestamp = f;
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

Scenario random_scenario(const RadarParams& params, Rng& rng, Index n_frames,
                         ObjectClass first) {
  Scenario sc;
  const int count = rng.coin() ? 2 : 1;
  const double span_t = sc.frame_period * static_cast<double>(std::max<Index>(0, n_frames - 1));
  for (int i = 0; i < count; ++i) {
    auto label = static_cast<ObjectClass>(1 + rng.below(3));
    if (i == 0 && first != ObjectClass::kBackground) label = first;
    // Radial speed bands per class, as fractions of max_speed.
    double lo_v = 0.04, hi_v = 0.15;
    if (label == ObjectClass::kCyclist) lo_v = 0.15, hi_v = 0.45;
    if (label == ObjectClass::kCar) lo_v = 0.25, hi_v = 0.7;
    double velocity = rng.uniform(lo_v, hi_v) * params.max_speed;
    if (rng.coin()) velocity = -velocity;
    const double lo = 0.15 * params.max_range, hi = 0.85 * params.max_range;
    // Keep the whole trajectory inside [lo, hi].
    const double travel = std::abs(velocity) * span_t;
    if (travel > hi - lo) velocity *= (hi - lo) / travel * 0.95;
    const double moved = velocity * span_t;
    const double start_lo = moved >= 0 ? lo : lo - moved;
    const double start_hi = moved >= 0 ? hi - moved : hi;
    const double range = rng.uniform(start_lo, start_hi);
    const double angle = std::asin(rng.uniform(-0.6, 0.6));
    sc.objects.push_back(make_object(params, label, range, velocity, angle));
  }
  return sc;
}

RADSEG_NAMESPACE_END
