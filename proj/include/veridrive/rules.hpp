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

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "veridrive/ltlf.hpp"
#include "veridrive/scenario.hpp"

namespace veridrive {

/// Robustness series are capped at this value when a rule is vacuously
/// satisfied, keeping the series plottable.
inline constexpr double kRobustnessCap = 1e6;

/// Safe distance to a preceding vehicle given the ego reaction time and
/// the braking floors of both vehicles (a_obs_min < a_min < 0).
inline double safe_distance(double v, double v_obs, const EgoParams & params, double a_obs_min)
{
  if (v < 0.0 || v_obs < 0.0) {
    throw DomainError("safe_distance: speeds must be non-negative");
  }
  if (a_obs_min >= params.a_min) {
    throw DomainError(
      "safe_distance: a_obs_min (" + std::to_string(a_obs_min) +
      ") must be below a_min (" + std::to_string(params.a_min) + ")");
  }
  return v_obs * v_obs / (-2.0 * std::abs(a_obs_min)) - v * v / (-2.0 * std::abs(params.a_min)) +
         v * params.t_d;
}

/// Snapshot of the world at one time step, the unit of predicate
/// evaluation and of episode logs.
struct WorldStep {
  EgoState ego;
  std::vector<std::pair<int, EgoState>> obstacles;  // (obstacle id, state)
  int current_lane{0};
  std::optional<int> adjacent_left_lane;
  std::optional<int> adjacent_right_lane;
  bool fail_safe_active{false};
};

// Parameterized atom names.
inline std::string in_lane_atom(int lane_id) { return "in_lane_" + std::to_string(lane_id); }
inline std::string precedes_atom(int obstacle_id)
{
  return "precedes_" + std::to_string(obstacle_id);
}
inline std::string keeps_safe_distance_atom(int obstacle_id)
{
  return "keeps_safe_distance_" + std::to_string(obstacle_id);
}

inline std::optional<int> parse_suffix_id(const std::string & name, const std::string & prefix)
{
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) {
    return std::nullopt;
  }
  try {
    return std::stoi(name.substr(prefix.size()));
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

namespace detail {

struct EgoCurvilinear {
  double s;
  double d;
};

inline EgoCurvilinear ego_in_lane_frame(const EgoState & ego, const Lane & lane)
{
  const auto pos = lane.frame->project(ego.position, kDefaultProjectionBand);
  if (!pos) {
    throw DomainError("predicate: ego is out of the projection band of lane " +
                      std::to_string(lane.id));
  }
  return {pos->s, pos->d};
}

inline const EgoState & obstacle_state_in_step(const WorldStep & step, int obstacle_id)
{
  for (const auto & [id, st] : step.obstacles) {
    if (id == obstacle_id) {
      return st;
    }
  }
  throw DomainError("predicate: obstacle " + std::to_string(obstacle_id) +
                    " missing from world step");
}

/// Bumper-to-bumper longitudinal gap from the ego front to the obstacle
/// rear, measured in the given lane frame. Negative when the obstacle
/// trails the ego front.
inline double bumper_gap(
  const Scenario & scenario, const WorldStep & step, const EgoState & obs_state,
  const VehicleShape & obs_shape, const Lane & lane)
{
  const auto ego_cl = ego_in_lane_frame(step.ego, lane);
  const auto obs_cl = lane.frame->project(obs_state.position, kDefaultProjectionBand);
  if (!obs_cl) {
    throw DomainError("predicate: obstacle is out of the projection band of lane " +
                      std::to_string(lane.id));
  }
  const double ego_front = ego_cl.s + scenario.ego_shape.length;  // rear-axle reference
  const double obs_rear = obs_cl->s - 0.5 * obs_shape.length;     // center reference
  return obs_rear - ego_front;
}

inline bool lateral_overlap(
  const Scenario & scenario, const WorldStep & step, const EgoState & obs_state,
  const VehicleShape & obs_shape, const Lane & lane)
{
  const auto ego_cl = ego_in_lane_frame(step.ego, lane);
  const auto obs_cl = lane.frame->project(obs_state.position, kDefaultProjectionBand);
  if (!obs_cl) {
    return false;
  }
  return std::abs(ego_cl.d - obs_cl->d) <= 0.5 * (scenario.ego_shape.width + obs_shape.width);
}

inline bool obstacle_in_lane(
  const Scenario & scenario, const Obstacle & obs, const EgoState & obs_state, int lane_id)
{
  const ConvexPolygon occ = scenario.obstacle_occupancy(obs, obs_state);
  for (int lid : scenario.lane(lane_id).lanelets) {
    for (const auto & quad : scenario.lanelet(lid).occupancy()) {
      if (occ.intersects(quad)) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace detail

/// Whether the obstacle precedes the ego: it occupies the ego's current
/// lane, lies ahead of the ego front bumper, and overlaps laterally.
inline bool precedes(const WorldStep & step, int obstacle_id, const Scenario & scenario)
{
  const EgoState & obs_state = detail::obstacle_state_in_step(step, obstacle_id);
  const Obstacle & obs = scenario.obstacle(obstacle_id);
  const Lane & lane = scenario.lane(step.current_lane);
  if (!detail::obstacle_in_lane(scenario, obs, obs_state, step.current_lane)) {
    return false;
  }
  if (!detail::lateral_overlap(scenario, step, obs_state, obs.shape, lane)) {
    return false;
  }
  return detail::bumper_gap(scenario, step, obs_state, obs.shape, lane) >= 0.0;
}

inline bool eval_predicate(
  const std::string & name, const WorldStep & step, const RuleConfig & config,
  const Scenario & scenario)
{
  const EgoParams & params = scenario.params;
  if (name == "true") {
    return true;
  }
  if (name == "false") {
    return false;
  }
  if (name == "in_standstill") {
    return -params.v_err <= step.ego.v && step.ego.v <= params.v_err;
  }
  if (name == "brakes_abruptly") {
    return step.ego.a < -config.a_abrupt;
  }
  if (name == "braking_justification") {
    return step.fail_safe_active;
  }
  if (name == "accel_within_limit") {
    return std::abs(step.ego.a) <= params.a_lim;
  }
  if (name == "accel_above_limit") {
    return step.ego.a > params.a_lim;
  }
  if (name == "accel_below_neg_limit") {
    return step.ego.a < -params.a_lim;
  }
  if (name == "keeps_lane_speed_limit") {
    const auto limit = scenario.lane_speed_limit(step.current_lane);
    return step.ego.v <= limit.value_or(config.speed_limit_default);
  }
  if (name == "keeps_fov_speed_limit") {
    return step.ego.v <= config.fov_speed_cap;
  }
  if (name == "keeps_type_speed_limit") {
    return step.ego.v <= config.type_speed_cap;
  }
  if (name == "keeps_braking_speed_limit") {
    return step.ego.v <= config.braking_speed_cap;
  }
  if (const auto lane_id = parse_suffix_id(name, "in_lane_")) {
    const ConvexPolygon occ = scenario.ego_occupancy(step.ego);
    for (int lid : scenario.lane(*lane_id).lanelets) {
      for (const auto & quad : scenario.lanelet(lid).occupancy()) {
        if (occ.intersects(quad)) {
          return true;
        }
      }
    }
    return false;
  }
  if (const auto obs_id = parse_suffix_id(name, "precedes_")) {
    return precedes(step, *obs_id, scenario);
  }
  if (const auto obs_id = parse_suffix_id(name, "keeps_safe_distance_")) {
    const EgoState & obs_state = detail::obstacle_state_in_step(step, *obs_id);
    const Obstacle & obs = scenario.obstacle(*obs_id);
    const Lane & lane = scenario.lane(step.current_lane);
    const double gap = detail::bumper_gap(scenario, step, obs_state, obs.shape, lane);
    return gap > safe_distance(step.ego.v, obs_state.v, params, config.a_obs_min);
  }
  throw DomainError("eval_predicate: unknown atom '" + name + "'");
}

/// True when the atom name matches a registered predicate for this
/// scenario (including valid lane / obstacle parameters).
inline bool is_registered_atom(const std::string & name, const Scenario & scenario)
{
  static const char * kPlain[] = {
    "true",
    "false",
    "in_standstill",
    "brakes_abruptly",
    "braking_justification",
    "accel_within_limit",
    "accel_above_limit",
    "accel_below_neg_limit",
    "keeps_lane_speed_limit",
    "keeps_fov_speed_limit",
    "keeps_type_speed_limit",
    "keeps_braking_speed_limit",
  };
  for (const char * p : kPlain) {
    if (name == p) {
      return true;
    }
  }
  if (const auto lane_id = parse_suffix_id(name, "in_lane_")) {
    for (const auto & lane : scenario.lanes) {
      if (lane.id == *lane_id) {
        return true;
      }
    }
    return false;
  }
  const auto obs_id = [&]() -> std::optional<int> {
    if (auto id = parse_suffix_id(name, "precedes_")) {
      return id;
    }
    return parse_suffix_id(name, "keeps_safe_distance_");
  }();
  if (obs_id) {
    for (const auto & o : scenario.obstacles) {
      if (o.id == *obs_id) {
        return true;
      }
    }
  }
  return false;
}

/// Formalized general rules, instantiated for this scenario. The safe
/// distance rule is unrolled once per obstacle.
inline std::vector<Formula> rule_formulas(
  const RuleConfig & config, const std::vector<RuleId> & enabled, const Scenario & scenario)
{
  (void)config;
  std::vector<Formula> out;
  for (RuleId rule : enabled) {
    switch (rule) {
      case RuleId::RG1:
        for (const auto & obs : scenario.obstacles) {
          out.push_back(Formula::always(Formula::implication(
            Formula::atom(precedes_atom(obs.id)),
            Formula::atom(keeps_safe_distance_atom(obs.id)))));
        }
        break;
      case RuleId::RG2:
        out.push_back(Formula::always(Formula::implication(
          Formula::atom("brakes_abruptly"), Formula::atom("braking_justification"))));
        break;
      case RuleId::RG3:
        out.push_back(Formula::always(Formula::conjunction(
          Formula::conjunction(
            Formula::atom("keeps_lane_speed_limit"), Formula::atom("keeps_fov_speed_limit")),
          Formula::conjunction(
            Formula::atom("keeps_type_speed_limit"),
            Formula::atom("keeps_braking_speed_limit")))));
        break;
    }
  }
  return out;
}

/// Whether the rule's per-step body holds (the G operand of the rule).
inline bool rule_body_holds(
  RuleId rule, const WorldStep & step, const RuleConfig & config, const Scenario & scenario)
{
  switch (rule) {
    case RuleId::RG1:
      for (const auto & [id, st] : step.obstacles) {
        if (eval_predicate(precedes_atom(id), step, config, scenario) &&
            !eval_predicate(keeps_safe_distance_atom(id), step, config, scenario)) {
          return false;
        }
      }
      return true;
    case RuleId::RG2:
      return !eval_predicate("brakes_abruptly", step, config, scenario) ||
             eval_predicate("braking_justification", step, config, scenario);
    case RuleId::RG3:
      return eval_predicate("keeps_lane_speed_limit", step, config, scenario) &&
             eval_predicate("keeps_fov_speed_limit", step, config, scenario) &&
             eval_predicate("keeps_type_speed_limit", step, config, scenario) &&
             eval_predicate("keeps_braking_speed_limit", step, config, scenario);
  }
  return true;
}

/// Signed per-step robustness margin of a rule, in the SI unit of the
/// rule's defining inequality. Positive iff the rule body holds.
inline std::vector<double> robustness_margin(
  RuleId rule, const std::vector<WorldStep> & log, const RuleConfig & config,
  const Scenario & scenario)
{
  if (log.empty()) {
    throw DomainError("robustness_margin: log must be non-empty");
  }
  std::vector<double> out;
  out.reserve(log.size());
  for (const WorldStep & step : log) {
    double margin = kRobustnessCap;
    switch (rule) {
      case RuleId::RG1: {
        for (const auto & [id, st] : step.obstacles) {
          if (!eval_predicate(precedes_atom(id), step, config, scenario)) {
            continue;
          }
          const Obstacle & obs = scenario.obstacle(id);
          const Lane & lane = scenario.lane(step.current_lane);
          const double gap = detail::bumper_gap(scenario, step, st, obs.shape, lane);
          const double d_safe =
            safe_distance(step.ego.v, st.v, scenario.params, config.a_obs_min);
          margin = std::min(margin, gap - d_safe);
        }
        break;
      }
      case RuleId::RG2: {
        if (!step.fail_safe_active) {
          margin = step.ego.a + config.a_abrupt;
        }
        break;
      }
      case RuleId::RG3: {
        const auto lane_limit = scenario.lane_speed_limit(step.current_lane);
        margin = std::min(
          {lane_limit.value_or(config.speed_limit_default) - step.ego.v,
           config.fov_speed_cap - step.ego.v, config.type_speed_cap - step.ego.v,
           config.braking_speed_cap - step.ego.v});
        break;
      }
    }
    out.push_back(std::min(margin, kRobustnessCap));
  }
  return out;
}

// ---------------------------------------------------------------------------
// WorldStep serialization (episode logs are JSON lines of these).

inline nlohmann::json to_json(const WorldStep & step)
{
  nlohmann::json obstacles = nlohmann::json::array();
  for (const auto & [id, st] : step.obstacles) {
    obstacles.push_back({{"id", id}, {"state", detail::dump_state(st)}});
  }
  nlohmann::json j{
    {"ego", detail::dump_state(step.ego)},
    {"obstacles", obstacles},
    {"current_lane", step.current_lane},
    {"fail_safe_active", step.fail_safe_active},
  };
  if (step.adjacent_left_lane) {
    j["adjacent_left_lane"] = *step.adjacent_left_lane;
  }
  if (step.adjacent_right_lane) {
    j["adjacent_right_lane"] = *step.adjacent_right_lane;
  }
  return j;
}

inline WorldStep world_step_from_json(const nlohmann::json & j)
{
  WorldStep step;
  step.ego = detail::parse_state(detail::require_field(j, "ego", "world step"), "world step.ego");
  step.ego.s = j["ego"].value("s", 0.0);
  step.ego.d = j["ego"].value("d", 0.0);
  for (const auto & jo : j.value("obstacles", nlohmann::json::array())) {
    step.obstacles.emplace_back(
      jo.at("id").get<int>(), detail::parse_state(jo.at("state"), "world step.obstacle"));
  }
  step.current_lane = j.value("current_lane", 0);
  if (j.contains("adjacent_left_lane")) {
    step.adjacent_left_lane = j["adjacent_left_lane"].get<int>();
  }
  if (j.contains("adjacent_right_lane")) {
    step.adjacent_right_lane = j["adjacent_right_lane"].get<int>();
  }
  step.fail_safe_active = j.value("fail_safe_active", false);
  return step;
}

}  // namespace veridrive
