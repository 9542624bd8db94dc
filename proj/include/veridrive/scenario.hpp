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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "veridrive/config.hpp"
#include "veridrive/error.hpp"
#include "veridrive/geometry.hpp"

namespace veridrive {

struct AdjacentRef {
  int id{0};
  bool same_direction{true};
};

struct Lanelet {
  int id{0};
  std::vector<Vec2> left_boundary;
  std::vector<Vec2> right_boundary;
  std::vector<int> successors;
  std::optional<AdjacentRef> adjacent_left;
  std::optional<AdjacentRef> adjacent_right;
  std::optional<double> speed_limit;  // m/s

  /// One convex quad per boundary segment pair; their union is the
  /// lanelet's spatial occupancy.
  std::vector<ConvexPolygon> occupancy() const
  {
    std::vector<ConvexPolygon> quads;
    for (std::size_t i = 0; i + 1 < left_boundary.size(); ++i) {
      quads.emplace_back(std::vector<Vec2>{
        left_boundary[i], right_boundary[i], right_boundary[i + 1], left_boundary[i + 1]});
    }
    return quads;
  }

  bool contains(const Vec2 & p) const
  {
    for (const auto & quad : occupancy()) {
      if (quad.contains(p)) {
        return true;
      }
    }
    return false;
  }
};

/// A maximal chain of lanelets connected by successors.
struct Lane {
  int id{0};
  std::vector<int> lanelets;
  std::vector<Vec2> centerline;
  std::vector<double> arclengths;
  std::vector<Vec2> left_boundary;
  std::vector<Vec2> right_boundary;
  std::optional<AdjacentRef> adjacent_left;   // lane-level adjacency
  std::optional<AdjacentRef> adjacent_right;
  std::shared_ptr<const CurvilinearFrame> frame;

  bool contains(const Vec2 & p, const std::vector<Lanelet> & all) const;
};

struct EgoState {
  Vec2 position;
  double s{0.0};      // longitudinal arclength in the current lane frame, m
  double d{0.0};      // signed lateral deviation (left positive), m
  double v{0.0};      // speed, m/s
  double theta{0.0};  // orientation, rad
  double delta{0.0};  // steering angle, rad
  double a{0.0};      // acceleration, m/s^2
};

enum class ObstacleKind { Car, Truck, Static };

inline std::string to_string(ObstacleKind k)
{
  switch (k) {
    case ObstacleKind::Car:
      return "car";
    case ObstacleKind::Truck:
      return "truck";
    case ObstacleKind::Static:
      return "static";
  }
  return "car";
}

inline ObstacleKind obstacle_kind_from_string(const std::string & s)
{
  if (s == "car") return ObstacleKind::Car;
  if (s == "truck") return ObstacleKind::Truck;
  if (s == "static") return ObstacleKind::Static;
  throw InputError("unknown obstacle kind '" + s + "'");
}

struct Obstacle {
  int id{0};
  ObstacleKind kind{ObstacleKind::Car};
  VehicleShape shape;
  EgoState state;  // current state; equals trajectory front when recorded
  std::optional<std::vector<EgoState>> trajectory;
  std::optional<IdmParams> behavior;
};

enum class RuleId { RG1, RG2, RG3 };

inline std::string to_string(RuleId r)
{
  switch (r) {
    case RuleId::RG1:
      return "R_G1";
    case RuleId::RG2:
      return "R_G2";
    case RuleId::RG3:
      return "R_G3";
  }
  return "R_G1";
}

inline RuleId rule_id_from_string(const std::string & s)
{
  if (s == "R_G1") return RuleId::RG1;
  if (s == "R_G2") return RuleId::RG2;
  if (s == "R_G3") return RuleId::RG3;
  throw InputError("unknown rule id '" + s + "'");
}

enum class ReferencePoint { Center, RearAxle };

/// Oriented-rectangle footprint of a vehicle state. Ego trajectories are
/// referenced at the rear axle (footprint extends forward from the
/// reference point); obstacles use their geometric center.
inline ConvexPolygon occupancy_of(
  const Vec2 & position, double theta, const VehicleShape & shape, ReferencePoint ref)
{
  if (shape.length <= 0.0 || shape.width <= 0.0) {
    throw DomainError("occupancy_of: shape dimensions must be positive");
  }
  Vec2 center = position;
  if (ref == ReferencePoint::RearAxle) {
    center = center + (0.5 * shape.length) * Vec2{std::cos(theta), std::sin(theta)};
  }
  return ConvexPolygon::oriented_rect(center, shape.length, shape.width, theta);
}

struct Scenario {
  std::vector<Lanelet> lanelets;
  std::vector<Lane> lanes;
  EgoState ego;
  VehicleShape ego_shape;
  EgoParams params;
  std::vector<Obstacle> obstacles;
  double dt{0.2};
  int horizon{15};
  std::string country{"DEU"};
  std::string road_type{"urban"};  // rural | urban | highway
  std::vector<RuleId> rules_enabled;
  RuleConfig rule_config;
  SetPredictionParams set_prediction;
  int ego_lane_id{0};  // lane containing the ego at load time

  const Lanelet & lanelet(int id) const
  {
    for (const auto & l : lanelets) {
      if (l.id == id) {
        return l;
      }
    }
    throw DomainError("unknown lanelet id " + std::to_string(id));
  }

  const Lane & lane(int id) const
  {
    for (const auto & l : lanes) {
      if (l.id == id) {
        return l;
      }
    }
    throw DomainError("unknown lane id " + std::to_string(id));
  }

  const Lane & ego_lane() const { return lane(ego_lane_id); }

  ConvexPolygon ego_occupancy(const EgoState & state) const
  {
    return occupancy_of(state.position, state.theta, ego_shape, ReferencePoint::RearAxle);
  }

  ConvexPolygon obstacle_occupancy(const Obstacle & obs, const EgoState & state) const
  {
    return occupancy_of(state.position, state.theta, obs.shape, ReferencePoint::Center);
  }

  const Obstacle & obstacle(int id) const
  {
    for (const auto & o : obstacles) {
      if (o.id == id) {
        return o;
      }
    }
    throw DomainError("unknown obstacle id " + std::to_string(id));
  }

  std::optional<double> lane_speed_limit(int lane_id) const
  {
    const Lane & l = lane(lane_id);
    std::optional<double> limit;
    for (int lid : l.lanelets) {
      const auto & ll = lanelet(lid);
      if (ll.speed_limit) {
        limit = limit ? std::min(*limit, *ll.speed_limit) : *ll.speed_limit;
      }
    }
    return limit;
  }
};

inline bool Lane::contains(const Vec2 & p, const std::vector<Lanelet> & all) const
{
  for (int lid : lanelets) {
    for (const auto & ll : all) {
      if (ll.id == lid && ll.contains(p)) {
        return true;
      }
    }
  }
  return false;
}

inline constexpr double kDefaultProjectionBand = 50.0;  // m

/// Arclength/lateral-offset of a point in a lane's centerline frame.
inline CurvilinearPos project_to_curvilinear(
  const Vec2 & position, const Lane & lane, double band = kDefaultProjectionBand)
{
  const auto pos = lane.frame->project(position, band);
  if (!pos) {
    throw DomainError(
      "point (" + std::to_string(position.x) + ", " + std::to_string(position.y) +
      ") is more than " + std::to_string(band) + " m away from lane " + std::to_string(lane.id));
  }
  return *pos;
}

/// All lanes whose spatial occupancy contains the point (boundary inclusive).
inline std::vector<int> lanes_at(const Scenario & scenario, const Vec2 & position)
{
  std::vector<int> hits;
  for (const auto & lane : scenario.lanes) {
    if (lane.contains(position, scenario.lanelets)) {
      hits.push_back(lane.id);
    }
  }
  return hits;
}

namespace detail {

inline bool segments_properly_intersect(
  const Vec2 & a, const Vec2 & b, const Vec2 & c, const Vec2 & d)
{
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 1e-12 && d2 < -1e-12) || (d1 < -1e-12 && d2 > 1e-12)) &&
         ((d3 > 1e-12 && d4 < -1e-12) || (d3 < -1e-12 && d4 > 1e-12));
}

inline bool polylines_coincide(
  const std::vector<Vec2> & a, const std::vector<Vec2> & b, double tol)
{
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (norm(a[i] - b[i]) > tol) {
      return false;
    }
  }
  return true;
}

inline std::vector<Vec2> reversed(std::vector<Vec2> pts)
{
  std::reverse(pts.begin(), pts.end());
  return pts;
}

inline void validate_lanelet(const Lanelet & l)
{
  const std::string where = "lanelet " + std::to_string(l.id) + ": ";
  if (l.left_boundary.size() < 2 || l.right_boundary.size() < 2) {
    throw InputError(where + "boundaries need at least 2 points");
  }
  if (l.left_boundary.size() != l.right_boundary.size()) {
    throw InputError(where + "left and right boundaries must have equal point counts");
  }
  for (std::size_t i = 0; i + 1 < l.left_boundary.size(); ++i) {
    for (std::size_t j = 0; j + 1 < l.right_boundary.size(); ++j) {
      if (segments_properly_intersect(
            l.left_boundary[i], l.left_boundary[i + 1], l.right_boundary[j],
            l.right_boundary[j + 1])) {
        throw InputError(where + "left and right boundaries intersect");
      }
    }
  }
}

// Shared borders of declared adjacencies must coincide vertex-wise within
// 1e-3 m (same direction: my left == their right; opposite: my left ==
// their left reversed).
inline void validate_adjacency(const std::vector<Lanelet> & lanelets)
{
  auto find = [&](int id) -> const Lanelet * {
    for (const auto & l : lanelets) {
      if (l.id == id) {
        return &l;
      }
    }
    return nullptr;
  };
  constexpr double kBorderTol = 1e-3;
  for (const auto & l : lanelets) {
    for (int succ : l.successors) {
      if (find(succ) == nullptr) {
        throw InputError(
          "lanelet " + std::to_string(l.id) + ": dangling successor reference " +
          std::to_string(succ));
      }
    }
    auto check_side = [&](const std::optional<AdjacentRef> & adj, bool left_side) {
      if (!adj) {
        return;
      }
      const Lanelet * other = find(adj->id);
      const std::string side = left_side ? "adjacent_left" : "adjacent_right";
      if (other == nullptr) {
        throw InputError(
          "lanelet " + std::to_string(l.id) + ": dangling " + side + " reference " +
          std::to_string(adj->id));
      }
      // Symmetry with consistent direction flags.
      const auto & back_ref = adj->same_direction
                                ? (left_side ? other->adjacent_right : other->adjacent_left)
                                : (left_side ? other->adjacent_left : other->adjacent_right);
      if (!back_ref || back_ref->id != l.id || back_ref->same_direction != adj->same_direction) {
        throw InputError(
          "lanelet " + std::to_string(l.id) + ": asymmetric " + side + " declaration with " +
          std::to_string(adj->id));
      }
      const auto & mine = left_side ? l.left_boundary : l.right_boundary;
      const auto theirs = [&]() -> std::vector<Vec2> {
        if (adj->same_direction) {
          return left_side ? other->right_boundary : other->left_boundary;
        }
        return reversed(left_side ? other->left_boundary : other->right_boundary);
      }();
      if (!polylines_coincide(mine, theirs, kBorderTol)) {
        throw InputError(
          "lanelet " + std::to_string(l.id) + ": shared border with " + side + " " +
          std::to_string(adj->id) + " does not coincide within 1e-3 m");
      }
    };
    check_side(l.adjacent_left, true);
    check_side(l.adjacent_right, false);
  }
}

/// Chains lanelets along successors and builds lane centerlines as
/// pointwise midpoints of the boundaries.
inline std::vector<Lane> assemble_lanes(const std::vector<Lanelet> & lanelets)
{
  std::map<int, const Lanelet *> by_id;
  std::set<int> has_predecessor;
  for (const auto & l : lanelets) {
    by_id[l.id] = &l;
    for (int s : l.successors) {
      has_predecessor.insert(s);
    }
  }
  std::vector<Lane> lanes;
  std::map<int, int> lanelet_to_lane;
  int next_lane_id = 1;
  for (const auto & [id, head] : by_id) {
    if (has_predecessor.count(id) > 0) {
      continue;
    }
    Lane lane;
    lane.id = next_lane_id++;
    const Lanelet * cur = head;
    while (cur != nullptr) {
      lane.lanelets.push_back(cur->id);
      lanelet_to_lane[cur->id] = lane.id;
      for (std::size_t i = 0; i < cur->left_boundary.size(); ++i) {
        const Vec2 mid = 0.5 * (cur->left_boundary[i] + cur->right_boundary[i]);
        const bool duplicate_joint =
          !lane.centerline.empty() && norm(lane.centerline.back() - mid) < 1e-9;
        if (!duplicate_joint) {
          lane.centerline.push_back(mid);
          lane.left_boundary.push_back(cur->left_boundary[i]);
          lane.right_boundary.push_back(cur->right_boundary[i]);
        }
      }
      if (cur->successors.empty()) {
        cur = nullptr;
      } else if (cur->successors.size() == 1) {
        const auto it = by_id.find(cur->successors.front());
        cur = it->second;
      } else {
        throw InputError(
          "lanelet " + std::to_string(cur->id) + ": branching successor chains are unsupported");
      }
    }
    lane.frame = std::make_shared<CurvilinearFrame>(lane.centerline);
    lane.arclengths = lane.frame->arclengths();
    lanes.push_back(std::move(lane));
  }
  // Lift lanelet adjacency to lanes via the first member lanelet.
  for (auto & lane : lanes) {
    const Lanelet & head = *by_id.at(lane.lanelets.front());
    if (head.adjacent_left) {
      lane.adjacent_left =
        AdjacentRef{lanelet_to_lane.at(head.adjacent_left->id), head.adjacent_left->same_direction};
    }
    if (head.adjacent_right) {
      lane.adjacent_right = AdjacentRef{
        lanelet_to_lane.at(head.adjacent_right->id), head.adjacent_right->same_direction};
    }
  }
  return lanes;
}

using nlohmann::json;

inline const json & require_field(const json & j, const std::string & key, const std::string & at)
{
  const auto it = j.find(key);
  if (it == j.end()) {
    throw InputError("missing field '" + key + "' in " + at);
  }
  return *it;
}

inline Vec2 parse_point(const json & j, const std::string & at)
{
  if (!j.is_array() || j.size() != 2) {
    throw InputError("expected [x, y] pair in " + at);
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Vec2> parse_polyline(const json & j, const std::string & at)
{
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < j.size(); ++i) {
    pts.push_back(parse_point(j[i], at + "[" + std::to_string(i) + "]"));
  }
  return pts;
}

inline EgoState parse_state(const json & j, const std::string & at)
{
  EgoState st;
  st.position = parse_point(require_field(j, "position", at), at + ".position");
  st.v = require_field(j, "v", at).get<double>();
  if (st.v < 0.0) {
    throw InputError(at + ": speed must be non-negative");
  }
  st.theta = j.value("theta", 0.0);
  st.delta = j.value("delta", 0.0);
  st.a = j.value("a", 0.0);
  return st;
}

inline VehicleShape parse_shape(const json & j, const std::string & at)
{
  if (!j.is_array() || j.size() != 2) {
    throw InputError("expected [length, width] in " + at);
  }
  VehicleShape shape{j[0].get<double>(), j[1].get<double>()};
  if (shape.length <= 0.0 || shape.width <= 0.0) {
    throw InputError(at + ": shape dimensions must be positive");
  }
  return shape;
}

inline json dump_state(const EgoState & st)
{
  return json{
    {"position", {st.position.x, st.position.y}}, {"v", st.v},
    {"theta", st.theta},                          {"delta", st.delta},
    {"a", st.a},
  };
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json & j)
{
  using detail::require_field;
  Scenario sc;

  const auto & network = require_field(j, "network", "scenario");
  for (const auto & jl : require_field(network, "lanelets", "network")) {
    Lanelet l;
    l.id = require_field(jl, "id", "lanelet").get<int>();
    const std::string at = "lanelet " + std::to_string(l.id);
    l.left_boundary = detail::parse_polyline(require_field(jl, "left", at), at + ".left");
    l.right_boundary = detail::parse_polyline(require_field(jl, "right", at), at + ".right");
    if (jl.contains("successors")) {
      l.successors = jl["successors"].get<std::vector<int>>();
    }
    auto parse_adj = [&](const char * key) -> std::optional<AdjacentRef> {
      if (!jl.contains(key) || jl[key].is_null()) {
        return std::nullopt;
      }
      const auto & ja = jl[key];
      return AdjacentRef{
        require_field(ja, "id", at).get<int>(), ja.value("same_direction", true)};
    };
    l.adjacent_left = parse_adj("adjacent_left");
    l.adjacent_right = parse_adj("adjacent_right");
    if (jl.contains("speed_limit") && !jl["speed_limit"].is_null()) {
      l.speed_limit = jl["speed_limit"].get<double>();
    }
    detail::validate_lanelet(l);
    sc.lanelets.push_back(std::move(l));
  }
  detail::validate_adjacency(sc.lanelets);
  sc.lanes = detail::assemble_lanes(sc.lanelets);

  const auto & je = require_field(j, "ego", "scenario");
  sc.ego = detail::parse_state(require_field(je, "state", "ego"), "ego.state");
  sc.ego_shape = detail::parse_shape(require_field(je, "shape", "ego"), "ego.shape");
  if (je.contains("params")) {
    const auto & jp = je["params"];
    auto interval = [&](const char * key, Interval def) {
      if (!jp.contains(key)) {
        return def;
      }
      const auto & ji = jp[key];
      return Interval{ji[0].get<double>(), ji[1].get<double>()};
    };
    sc.params.a_lon_range = interval("a_lon_range", sc.params.a_lon_range);
    sc.params.a_lat_range = interval("a_lat_range", sc.params.a_lat_range);
    sc.params.v_max = jp.value("v_max", sc.params.v_max);
    sc.params.a_min = jp.value("a_min", sc.params.a_min);
    sc.params.t_d = jp.value("t_d", sc.params.t_d);
    sc.params.a_lim = jp.value("a_lim", sc.params.a_lim);
    sc.params.v_err = jp.value("v_err", sc.params.v_err);
  }
  sc.params.validate();

  if (j.contains("obstacles")) {
    for (const auto & jo : j["obstacles"]) {
      Obstacle o;
      o.id = require_field(jo, "id", "obstacle").get<int>();
      const std::string at = "obstacle " + std::to_string(o.id);
      o.kind = obstacle_kind_from_string(jo.value("kind", std::string("car")));
      o.shape = detail::parse_shape(require_field(jo, "shape", at), at + ".shape");
      const bool has_traj = jo.contains("trajectory") && !jo["trajectory"].is_null();
      const bool has_behavior = jo.contains("behavior") && !jo["behavior"].is_null();
      if (has_traj == has_behavior) {
        throw InputError(at + ": exactly one of trajectory/behavior must be present");
      }
      if (has_traj) {
        std::vector<EgoState> traj;
        for (std::size_t i = 0; i < jo["trajectory"].size(); ++i) {
          traj.push_back(detail::parse_state(
            jo["trajectory"][i], at + ".trajectory[" + std::to_string(i) + "]"));
        }
        if (traj.empty()) {
          throw InputError(at + ": trajectory must not be empty");
        }
        o.trajectory = std::move(traj);
        o.state = o.trajectory->front();
        if (jo.contains("state")) {
          o.state = detail::parse_state(jo["state"], at + ".state");
        }
      } else {
        o.state = detail::parse_state(require_field(jo, "state", at), at + ".state");
        IdmParams idm;
        const auto & jb = jo["behavior"];
        idm.desired_speed = jb.value("desired_speed", idm.desired_speed);
        idm.time_headway = jb.value("time_headway", idm.time_headway);
        idm.min_gap = jb.value("min_gap", idm.min_gap);
        idm.max_accel = jb.value("max_accel", idm.max_accel);
        idm.comfort_decel = jb.value("comfort_decel", idm.comfort_decel);
        idm.exponent = jb.value("exponent", idm.exponent);
        idm.validate();
        o.behavior = idm;
      }
      sc.obstacles.push_back(std::move(o));
    }
  }

  sc.dt = require_field(j, "dt", "scenario").get<double>();
  sc.horizon = require_field(j, "horizon", "scenario").get<int>();
  if (sc.dt <= 0.0) {
    throw InputError("scenario: dt must be positive");
  }
  if (sc.horizon < 1) {
    throw InputError("scenario: horizon must be at least 1");
  }
  sc.country = j.value("country", std::string("DEU"));
  sc.road_type = j.value("road_type", std::string("urban"));
  if (j.contains("rules_enabled")) {
    for (const auto & jr : j["rules_enabled"]) {
      sc.rules_enabled.push_back(rule_id_from_string(jr.get<std::string>()));
    }
  }
  if (j.contains("rule_config")) {
    const auto & jc = j["rule_config"];
    sc.rule_config.a_abrupt = jc.value("a_abrupt", sc.rule_config.a_abrupt);
    sc.rule_config.a_obs_min = jc.value("a_obs_min", sc.rule_config.a_obs_min);
    sc.rule_config.speed_limit_default =
      jc.value("speed_limit_default", sc.rule_config.speed_limit_default);
    sc.rule_config.fov_speed_cap = jc.value("fov_speed_cap", sc.rule_config.fov_speed_cap);
    sc.rule_config.type_speed_cap = jc.value("type_speed_cap", sc.rule_config.type_speed_cap);
    sc.rule_config.braking_speed_cap =
      jc.value("braking_speed_cap", sc.rule_config.braking_speed_cap);
  }
  sc.rule_config.validate();
  if (j.contains("set_prediction")) {
    const auto & js = j["set_prediction"];
    sc.set_prediction.a_max_abs = js.value("a_max_abs", sc.set_prediction.a_max_abs);
    sc.set_prediction.v_max_obs = js.value("v_max_obs", sc.set_prediction.v_max_obs);
    sc.set_prediction.lane_following_only =
      js.value("lane_following_only", sc.set_prediction.lane_following_only);
  }
  sc.set_prediction.validate();

  // The ego must project onto at least one lane; prefer the lane whose
  // centerline it is closest to.
  const auto hits = lanes_at(sc, sc.ego.position);
  if (hits.empty()) {
    throw InputError("scenario: ego position does not project onto any lane");
  }
  double best_abs_d = std::numeric_limits<double>::infinity();
  for (int lane_id : hits) {
    const auto pos = project_to_curvilinear(sc.ego.position, sc.lane(lane_id));
    if (std::abs(pos.d) < best_abs_d) {
      best_abs_d = std::abs(pos.d);
      sc.ego_lane_id = lane_id;
      sc.ego.s = pos.s;
      sc.ego.d = pos.d;
    }
  }
  return sc;
}

inline Scenario load_scenario(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open scenario file '" + path + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw InputError("scenario '" + path + "': " + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const nlohmann::json::exception & e) {
    throw InputError("scenario '" + path + "': " + e.what());
  }
}

}  // namespace veridrive
