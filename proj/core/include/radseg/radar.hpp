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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "radseg/fft.hpp"
#include "radseg/rng.hpp"

RADSEG_NAMESPACE_BEGIN

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kLogFloor = 1e-12;

enum class ObjectClass : std::uint8_t {
  kBackground = 0,
  kPedestrian = 1,
  kCyclist = 2,
  kCar = 3,
};

inline constexpr int kNumClasses = 4;

// FMCW radar with complex (IQ) sampling, a uniform linear array of
// half-wavelength spaced virtual antennas, and chirp constants derived from
// the requested coverage so every bin mapping is linear:
//
//   bandwidth      B   = c * n_range / (2 * max_range)
//   range bin          = R / (c / 2B)                   in [0, n_range)
//   chirp period   T_r = lambda / (4 * max_speed)
//   Doppler bin        = n_doppler/2 + v / (2 max_speed / n_doppler)
//   angle bin          = n_angle/2 + n_angle * sin(theta) / 2
struct RadarParams {
  Index n_range = 256;
  Index n_angle = 256;
  Index n_doppler = 64;
  double carrier_hz = 77e9;
  double max_range = 50.0;   // m
  double max_speed = 13.0;   // m/s
  double noise_std = 1.0;    // complex AWGN std per ADC sample

  // Full 256 x 256 x 64 cube, the halved desk profile (128 x 128 x 32) and a
  // quarter-scale profile (64 x 64 x 16) for quick experiments. Noise is set
  // so a unit-rcs scatterer sits roughly 15 dB above the floor in RA.
  static RadarParams full();
  static RadarParams desk();
  static RadarParams small();
  static RadarParams profile(const std::string& name);
  static RadarParams with_extents(Index n_range, Index n_angle, Index n_doppler);

  void validate() const;

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  double bandwidth() const;
  double range_resolution() const { return max_range / static_cast<double>(n_range); }
  double chirp_period() const { return wavelength() / (4.0 * max_speed); }
  double velocity_resolution() const;
  Index n_antennas() const { return n_angle; }
  // Element counts of the RAD cube and of the three views together.
  Index cube_elements() const { return n_range * n_angle * n_doppler; }
  Index view_elements() const {
    return n_range * n_doppler + n_angle * n_doppler + n_range * n_angle;
  }

  double range_bin(double range) const;
  double doppler_bin(double velocity) const;
  double angle_bin(double angle) const;
  double range_of_bin(double bin) const;
  double velocity_of_bin(double bin) const;
  double angle_of_bin(double bin) const;
};

// One point scatterer plus the footprint its object paints in the masks.
struct PointTarget {
  double range = 0;     // m
  double velocity = 0;  // m/s, radial, positive = receding
  double angle = 0;     // rad, 0 = boresight
  double rcs = 1;       // relative reflectivity, amplitude = sqrt(rcs)
  double phase = 0;     // rad
  ObjectClass label = ObjectClass::kCar;
  // Mask half-widths in bins along range, Doppler and angle.
  std::array<Index, 3> extent{1, 1, 1};
};

// Complex cube indexed [range][angle][doppler]. The ADC cube uses the same
// layout with axes (fast-time sample, antenna, chirp).
struct RadCube {
  Index n_range = 0;
  Index n_angle = 0;
  Index n_doppler = 0;
  std::vector<Complex> values;

  RadCube() = default;
  RadCube(Index r, Index a, Index d);
  Complex& at(Index r, Index a, Index d) {
    return values[static_cast<std::size_t>((r * n_angle + a) * n_doppler + d)];
  }
  const Complex& at(Index r, Index a, Index d) const {
    return values[static_cast<std::size_t>((r * n_angle + a) * n_doppler + d)];
  }
};

struct Map2D {
  Index rows = 0;
  Index cols = 0;
  std::vector<double> values;
  double at(Index r, Index c) const { return values[r * cols + c]; }
};

struct LabelMap {
  Index rows = 0;
  Index cols = 0;
  std::vector<std::uint8_t> labels;
  std::uint8_t at(Index r, Index c) const { return labels[r * cols + c]; }
};

struct ViewSet {
  Map2D rd;  // n_range x n_doppler
  Map2D ad;  // n_angle x n_doppler
  Map2D ra;  // n_range x n_angle
};

struct ViewFrame {
  ViewSet views;       // dB scale
  LabelMap rd_mask;    // n_range x n_doppler
  LabelMap ra_mask;    // n_range x n_angle
  Index timestamp = 0;
};

// Sum over targets of separable complex exponentials plus complex white noise
// of std params.noise_std (no noise when 0). Throws ConfigError naming the
// violated bound when a target is outside the radar coverage.
RadCube synthesize_adc(const RadarParams& params,
                       const std::vector<PointTarget>& targets,
                       std::uint64_t seed);

// Range-FFT, Angle-FFT and Doppler-FFT, with the angle and Doppler axes
// shifted so boresight and zero velocity sit at the centre bins.
RadCube fft_chain(RadCube adc);

// Fully developed speckle: every bin's intensity is scaled by an i.i.d.
// unit-mean exponential draw and its phase is re-randomized.
RadCube apply_speckle(RadCube rad, std::uint64_t seed);

// Averages |X|^2 over the absent axis of each view and converts to dB with a
// 1e-12 floor inside the log.
ViewSet aggregate_views(const RadCube& rad);

// Filled ellipses centred on each target's bins; later targets overwrite
// earlier ones. Returns (rd_mask, ra_mask).
std::pair<LabelMap, LabelMap> render_masks(const RadarParams& params,
                                           const std::vector<PointTarget>& targets);

// A moving object: its main scatterer follows constant radial velocity and
// carries a rigid cloud of secondary scatterers within its footprint.
struct SceneObject {
  ObjectClass label = ObjectClass::kCar;
  double range = 10;
  double velocity = 0;
  double angle = 0;
  double rcs = 1;
  std::array<Index, 3> extent{1, 1, 1};
  int scatterers = 1;  // including the main one
};

struct Scenario {
  std::vector<SceneObject> objects;
  double frame_period = 0.1;  // s
};

struct SimulatedSequence {
  std::vector<ViewFrame> frames;
  std::vector<std::string> events;  // e.g. objects leaving the coverage
};

// Per frame: propagate, synthesize, FFT chain, speckle, aggregate, masks.
// Frame f draws its randomness from derive_seed(seed, f).
SimulatedSequence simulate_sequence(const RadarParams& params,
                                    const Scenario& scenario, Index n_frames,
                                    std::uint64_t seed, bool speckle = true);

// Class-specific footprint and reflectivity, scaled to the profile extents.
SceneObject make_object(const RadarParams& params, ObjectClass label,
                        double range, double velocity, double angle);

// One or two objects with random classes, class-typical radial speeds and
// states that stay inside the coverage for `n_frames` frames. A non-background
// `first` fixes the class of the first object.
Scenario random_scenario(const RadarParams& params, Rng& rng, Index n_frames,
                         ObjectClass first = ObjectClass::kBackground);

RADSEG_NAMESPACE_END
