#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cameo/domain.hpp"
#include "cameo/util.hpp"

namespace cameo::scenario {

using domain::DayProfile;
using domain::HistoricalRecord;
using domain::PowerCurve;

/// Uniform-probability collection of representative days (Formulation A input).
struct ScenarioSet {
  std::string set_id;
  std::string site_id;
  std::uint64_t seed = 0;
  std::vector<std::size_t> day_index;  // positions in the source history, ascending
  std::vector<DayProfile> days;

  std::size_t size() const { return days.size(); }
  double probability() const { return days.empty() ? 0.0 : 1.0 / static_cast<double>(days.size()); }
  bool operator==(const ScenarioSet&) const = default;
};

/// Node of a three-stage tree. Stage 1 carries day-ahead information, stage 2 the
/// real-time realization. Unused series are empty.
struct TreeNode {
  int id = 0;
  int stage = 0;
  int parent = -1;
  double probability = 1;  // conditional on the parent
  std::vector<double> da;         // stage 1
  std::vector<double> wind;       // stage 1: centroid wind factor
  std::vector<double> rt;         // stage 2
  std::vector<double> wind_dev;   // stage 2: deviation from the parent's wind
  std::vector<double> res;        // stage 2
  std::vector<std::size_t> members;  // history day indices in this cluster

  bool operator==(const TreeNode&) const = default;
};

struct ScenarioTree {
  std::string tree_id;
  std::string site_id;
  std::uint64_t seed = 0;
  std::vector<TreeNode> nodes;

  const TreeNode& node(int id) const;
  std::vector<int> children(int id) const;
  std::vector<int> leaves() const;
  double absolute_probability(int id) const;
  /// Realized wind factor of a leaf: parent centroid plus deviation, clamped to [0, 1].
  std::vector<double> leaf_wind(int leaf_id) const;
  bool operator==(const ScenarioTree&) const = default;
};

struct Branching {
  int stage1 = 4;
  int stage2 = 3;
};

struct KMeansConfig {
  int max_iter = 100;
  double tol = 1e-9;
};

struct Clustering {
  std::vector<int> assignment;                 // point -> cluster
  std::vector<std::vector<double>> centroids;  // in the (standardized) input space
  int iterations = 0;
};

/// Lloyd's k-means with seeded farthest-point initialization. Ties go to the lowest
/// point index (initialization) and the lowest cluster index (assignment). Empty
/// clusters take the point farthest from its centroid in the largest cluster.
/// Requires points.size() >= k >= 1.
Clustering kmeans(std::span<const std::vector<double>> points, int k, std::uint64_t seed,
                  const KMeansConfig& config = {});

/// Per-dimension z-scores; constant dimensions become 0.
std::vector<std::vector<double>> standardize(std::span<const std::vector<double>> points);

std::vector<ScenarioSet> sample_scenario_sets(const HistoricalRecord& history, std::size_t n_sets,
                                              std::size_t n_days, std::uint64_t seed,
                                              const PowerCurve& curve = {});

ScenarioTree build_scenario_tree(const HistoricalRecord& history, Branching branching,
                                 std::uint64_t seed, const KMeansConfig& config = {},
                                 const PowerCurve& curve = {});

ValidationReport validate_tree(const ScenarioTree& tree);

/// `parent,child,stage,conditional_probability,absolute_probability`
std::string tree_edge_list_csv(const ScenarioTree& tree);

void to_json(json& j, const ScenarioSet& s);
void from_json(const json& j, ScenarioSet& s);
void to_json(json& j, const TreeNode& n);
void from_json(const json& j, TreeNode& n);
void to_json(json& j, const ScenarioTree& t);
void from_json(const json& j, ScenarioTree& t);

}  // namespace cameo::scenario
