// Copyright 2026 The veridrive Authors
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

#include "veridrive/error.hpp"
#include "veridrive/geometry.hpp"

namespace veridrive {

struct VehicleShape {
  double length{4.5};
  double width{2.0};
};

/// Ego limits and thresholds used across verification and rules.
struct EgoParams {
  Interval a_lon_range{-6.0, 6.0};  // m/s^2
  Interval a_lat_range{-4.0, 4.0};  // m/s^2
  double v_max{30.0};               // m/s
  double a_min{-6.0};               // braking floor, m/s^2 (< 0)
  double t_d{0.4};                  // reaction time, s
  double a_lim{0.2};                // accelerate/decelerate threshold, m/s^2
  double v_err{0.1};                // standstill tolerance, m/s

  void validate() const
  {
    if (!(a_lon_range.lo < 0.0 && 0.0 < a_lon_range.hi)) {
      throw InputError("ego params: a_lon_range must straddle zero");
    }
    if (v_max <= 0.0) {
      throw InputError("ego params: v_max must be positive");
    }
    if (a_min >= 0.0) {
      throw InputError("ego params: a_min must be negative");
    }
    if (a_lim < 0.0 || v_err < 0.0) {
      throw InputError("ego params: a_lim and v_err must be non-negative");
    }
  }
};

/// Thresholds of the formalized general traffic rules.
struct RuleConfig {
  double a_abrupt{2.0};              // abrupt-braking threshold, m/s^2 (> 0)
  double a_obs_min{-12.0};           // assumed obstacle braking floor, m/s^2
  double speed_limit_default{30.0};  // m/s, used when a lanelet has no limit
  double fov_speed_cap{50.0};        // m/s
  double type_speed_cap{50.0};       // m/s
  double braking_speed_cap{50.0};    // m/s

  void validate() const
  {
    if (a_abrupt <= 0.0) {
      throw InputError("rule config: a_abrupt must be positive");
    }
    if (speed_limit_default <= 0.0 || fov_speed_cap <= 0.0 || type_speed_cap <= 0.0 ||
        braking_speed_cap <= 0.0) {
      throw InputError("rule config: speed caps must be positive");
    }
    if (a_obs_min >= 0.0) {
      throw InputError("rule config: a_obs_min must be negative");
    }
  }
};

struct SetPredictionParams {
  double a_max_abs{12.0};          // m/s^2
  double v_max_obs{30.0};          // m/s
  bool lane_following_only{true};  // widen to same-direction neighbours when false

  void validate() const
  {
    if (a_max_abs <= 0.0) {
      throw InputError("set prediction: a_max_abs must be positive");
    }
    if (v_max_obs <= 0.0) {
      throw InputError("set prediction: v_max_obs must be positive");
    }
  }
};

/// Intelligent-driver-model parameters for simulated traffic.
struct IdmParams {
  double desired_speed{25.0};  // m/s
  double time_headway{1.5};    // s
  double min_gap{2.0};         // m
  double max_accel{3.0};       // m/s^2
  double comfort_decel{2.0};   // m/s^2
  double exponent{4.0};

  void validate() const
  {
    if (desired_speed <= 0.0 || time_headway <= 0.0 || min_gap <= 0.0 || max_accel <= 0.0 ||
        comfort_decel <= 0.0 || exponent <= 0.0) {
      throw InputError("idm params: all parameters must be positive");
    }
  }
};

}  // namespace veridrive
