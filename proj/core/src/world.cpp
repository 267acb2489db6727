#include "sagin/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sagin {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::gu: return "GU";
    case NodeKind::uav: return "UAV";
    case NodeKind::bs: return "BS";
    case NodeKind::sat: return "SAT";
  }
  return "?";
}

std::vector<Vec3> uniform_grid(int count, double area_x, double area_y, double z) {
  std::vector<Vec3> points;
  if (count <= 0) return points;
  const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(count * area_x / area_y))));
  const int rows = (count + cols - 1) / cols;
  points.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const int r = k / cols;
    const int c = k % cols;
    // The last row may be partially filled; centre its points.
    const int in_row = (r == rows - 1) ? count - r * cols : cols;
    points.push_back({(c + 0.5) * area_x / in_row, (r + 0.5) * area_y / rows, z});
  }
  return points;
}

World World::build(const ScenarioConfig& config) {
  if (config.num_gus < 1) throw std::invalid_argument("scenario needs at least one GU");
  if (config.num_uavs < 1) throw std::invalid_argument("scenario needs at least one UAV");
  if (!(config.area_x_m > 0.0) || !(config.area_y_m > 0.0))
    throw std::invalid_argument("scenario area must be positive");
  if (!(config.sat_elevation_deg > 0.0) || config.sat_elevation_deg > 90.0)
    throw std::invalid_argument("satellite elevation must be in (0, 90] degrees");
  if (!(config.sat_altitude_m > 0.0)) throw std::invalid_argument("satellite altitude must be positive");
  if (config.gu_min_speed_mps < 0.0 || config.gu_max_speed_mps < config.gu_min_speed_mps)
    throw std::invalid_argument("GU speed range must satisfy 0 <= min <= max");

  World world;
  world.config_ = config;
  world.rng_.seed(config.seed);

  std::uniform_real_distribution<double> ux(0.0, config.area_x_m);
  std::uniform_real_distribution<double> uy(0.0, config.area_y_m);
  for (int i = 0; i < config.num_gus; ++i) {
    Node node{NodeKind::gu, {}, {}, 0.0};
    node.position = {ux(world.rng_), uy(world.rng_), config.gu_height_m};
    world.redraw_waypoint(node);
    world.nodes_.push_back(node);
  }
  for (const Vec3& p : uniform_grid(config.num_uavs, config.area_x_m, config.area_y_m, config.uav_height_m))
    world.nodes_.push_back({NodeKind::uav, p, p, 0.0});

  const Vec3 centre{config.area_x_m / 2.0, config.area_y_m / 2.0, config.bs_height_m};
  world.nodes_.push_back({NodeKind::bs, centre, centre, 0.0});
  // The satellite has no meaningful planar position; only its slant range is used.
  const Vec3 sat{centre.x, centre.y, config.sat_altitude_m};
  world.nodes_.push_back({NodeKind::sat, sat, sat, 0.0});
  return world;
}

double World::draw_speed() {
  if (config_.gu_max_speed_mps == config_.gu_min_speed_mps) return config_.gu_min_speed_mps;
  return std::uniform_real_distribution<double>(config_.gu_min_speed_mps, config_.gu_max_speed_mps)(rng_);
}

void World::redraw_waypoint(Node& node) {
  std::uniform_real_distribution<double> ux(0.0, config_.area_x_m);
  std::uniform_real_distribution<double> uy(0.0, config_.area_y_m);
  node.waypoint = {ux(rng_), uy(rng_), config_.gu_height_m};
  node.speed_mps = draw_speed();
}

World World::advanced(double dt_s) const {
  if (!(dt_s > 0.0)) throw std::invalid_argument("mobility step must be positive");
  World next = *this;
  for (Node& node : next.nodes_) {
    if (node.kind != NodeKind::gu) continue;
    const double dx = node.waypoint.x - node.position.x;
    const double dy = node.waypoint.y - node.position.y;
    const double remaining = std::hypot(dx, dy);
    const double step = node.speed_mps * dt_s;
    if (remaining <= step) {
      node.position.x = node.waypoint.x;
      node.position.y = node.waypoint.y;
      next.redraw_waypoint(node);
    } else {
      node.position.x += dx / remaining * step;
      node.position.y += dy / remaining * step;
    }
    node.position.x = std::clamp(node.position.x, 0.0, config_.area_x_m);
    node.position.y = std::clamp(node.position.y, 0.0, config_.area_y_m);
  }
  return next;
}

double World::slant_range_m() const {
  return config_.sat_altitude_m / std::sin(config_.sat_elevation_deg * std::numbers::pi / 180.0);
}

double World::distance(NodeId a, NodeId b) const {
  if (a == b) throw std::invalid_argument("distance of a node to itself is undefined");
  if (a >= nodes_.size() || b >= nodes_.size()) throw std::out_of_range("node id out of range");
  if (a == sat() || b == sat()) return slant_range_m();
  const Vec3& p = nodes_[a].position;
  const Vec3& q = nodes_[b].position;
  return std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z));
}

NodeId World::gu(int i) const {
  if (i < 0 || i >= config_.num_gus) throw std::out_of_range("GU index " + std::to_string(i));
  return static_cast<NodeId>(i);
}

NodeId World::uav(int j) const {
  if (j < 0 || j >= config_.num_uavs) throw std::out_of_range("UAV index " + std::to_string(j));
  return static_cast<NodeId>(config_.num_gus + j);
}

World World::with_gu_state(int i, Vec3 position, Vec3 waypoint, double speed_mps) const {
  World next = *this;
  Node& node = next.nodes_.at(gu(i));
  node.position = position;
  node.waypoint = waypoint;
  node.speed_mps = speed_mps;
  return next;
}

}  // namespace sagin
