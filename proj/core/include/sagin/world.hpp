#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sagin {

enum class NodeKind { gu, uav, bs, sat };

const char* to_string(NodeKind kind);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Index into World::nodes(). GUs come first, then UAVs, then the BS, then the SAT.
using NodeId = std::size_t;

struct ScenarioConfig {
  int num_gus = 2;
  int num_uavs = 1;
  double area_x_m = 200.0;
  double area_y_m = 100.0;
  double gu_height_m = 1.5;
  double uav_height_m = 25.0;
  double bs_height_m = 100.0;
  double sat_altitude_m = 600e3;
  double sat_elevation_deg = 30.0;
  double gu_min_speed_mps = 10.0;
  double gu_max_speed_mps = 15.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct Node {
  NodeKind kind;
  Vec3 position;
  // Random-waypoint state; only meaningful for GUs.
  Vec3 waypoint;
  double speed_mps = 0.0;
};

/// Immutable geometry snapshot. Advancing mobility returns a new snapshot.
class World {
 public:
  World() = default;

  static World build(const ScenarioConfig& config);

  [[nodiscard]] World advanced(double dt_s) const;

  [[nodiscard]] double distance(NodeId a, NodeId b) const;
  [[nodiscard]] double slant_range_m() const;

  [[nodiscard]] std::span<const Node> nodes() const { return nodes_; }
  [[nodiscard]] const Node& node(NodeId id) const { return nodes_.at(id); }
  [[nodiscard]] NodeKind kind(NodeId id) const { return nodes_.at(id).kind; }

  [[nodiscard]] int num_gus() const { return config_.num_gus; }
  [[nodiscard]] int num_uavs() const { return config_.num_uavs; }
  [[nodiscard]] int num_agents() const { return config_.num_gus + config_.num_uavs; }
  [[nodiscard]] std::size_t num_nodes() const { return nodes_.size(); }

  [[nodiscard]] NodeId gu(int i) const;
  [[nodiscard]] NodeId uav(int j) const;
  [[nodiscard]] NodeId bs() const { return static_cast<NodeId>(num_agents()); }
  [[nodiscard]] NodeId sat() const { return static_cast<NodeId>(num_agents() + 1); }

  [[nodiscard]] const ScenarioConfig& config() const { return config_; }

  /// Replace one GU's mobility state. Used by tests and scripted scenarios.
  [[nodiscard]] World with_gu_state(int i, Vec3 position, Vec3 waypoint, double speed_mps) const;

 private:
  void redraw_waypoint(Node& node);
  [[nodiscard]] double draw_speed();

  ScenarioConfig config_;
  std::vector<Node> nodes_;
  std::mt19937_64 rng_;
};

/// Uniform grid placement for `count` points over an area, one row per
/// ceil(sqrt(count * ax / ay)) columns.
std::vector<Vec3> uniform_grid(int count, double area_x, double area_y, double z);

}  // namespace sagin
