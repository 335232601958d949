#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cameo/errors.hpp"
#include "cameo/scenario.hpp"

namespace cameo::scenario {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<std::vector<double>> centroids_of(std::span<const std::vector<double>> points,
                                              const std::vector<int>& assignment, int k) {
  const std::size_t dim = points.front().size();
  std::vector<std::vector<double>> c(k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> count(k, 0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    auto& acc = c[assignment[p]];
    for (std::size_t d = 0; d < dim; ++d) acc[d] += points[p][d];
    ++count[assignment[p]];
  }
  for (int j = 0; j < k; ++j)
    if (count[j])
      for (double& v : c[j]) v /= static_cast<double>(count[j]);
  return c;
}

int nearest(const std::vector<double>& p, const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    double d = sq_dist(p, centroids[j]);
    if (d < best_d) {  // strict: lowest index wins ties
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

// Moves one point into every empty cluster. The donor is the largest cluster (lowest index
// on ties) and the moved point is its member farthest from the donor centroid.
void repair_empty(std::span<const std::vector<double>> points, std::vector<int>& assignment,
                  std::vector<std::vector<double>>& centroids, int k) {
  for (;;) {
    std::vector<std::size_t> count(k, 0);
    for (int a : assignment) ++count[a];
    auto empty = std::find(count.begin(), count.end(), 0u);
    if (empty == count.end()) return;
    int donor = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
    std::size_t pick = points.size();
    double pick_d = -1;
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (assignment[p] != donor) continue;
      double d = sq_dist(points[p], centroids[donor]);
      if (d > pick_d) {
        pick_d = d;
        pick = p;
      }
    }
    int target = static_cast<int>(empty - count.begin());
    assignment[pick] = target;
    centroids = centroids_of(points, assignment, k);
  }
}

}  // namespace

std::vector<std::vector<double>> standardize(std::span<const std::vector<double>> points) {
  std::vector<std::vector<double>> out(points.begin(), points.end());
  if (points.empty()) return out;
  const std::size_t dim = points.front().size();
  const double n = static_cast<double>(points.size());
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0;
    for (const auto& p : points) mean += p[d];
    mean /= n;
    double var = 0;
    for (const auto& p : points) var += (p[d] - mean) * (p[d] - mean);
    double sd = std::sqrt(var / n);
    for (auto& p : out) p[d] = sd > 1e-12 ? (p[d] - mean) / sd : 0.0;
  }
  return out;
}

Clustering kmeans(std::span<const std::vector<double>> points, int k, std::uint64_t seed,
                  const KMeansConfig& config) {
  if (k < 1 || points.size() < static_cast<std::size_t>(k))
    throw InsufficientData("k-means: need at least k=" + std::to_string(k) + " points, have " +
                           std::to_string(points.size()));
  const std::size_t n = points.size();

  // Farthest-point initialization from a seeded first center.
  Rng rng(seed);
  std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.below(n))};
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < static_cast<std::size_t>(k)) {
    const auto& last = points[chosen.back()];
    for (std::size_t p = 0; p < n; ++p) min_d[p] = std::min(min_d[p], sq_dist(points[p], last));
    std::size_t next = n;
    double best = -1;
    for (std::size_t p = 0; p < n; ++p) {
      if (std::find(chosen.begin(), chosen.end(), p) != chosen.end()) continue;
      if (min_d[p] > best) {
        best = min_d[p];
        next = p;
      }
    }
    chosen.push_back(next);
  }

  Clustering result;
  result.centroids.reserve(k);
  for (auto idx : chosen) result.centroids.push_back(points[idx]);
  result.assignment.assign(n, 0);

  for (int it = 0; it < std::max(1, config.max_iter); ++it) {
    result.iterations = it + 1;
    for (std::size_t p = 0; p < n; ++p) result.assignment[p] = nearest(points[p], result.centroids);
    auto next = centroids_of(points, result.assignment, k);
    repair_empty(points, result.assignment, next, k);
    double shift = 0;
    for (int j = 0; j < k; ++j) shift = std::max(shift, sq_dist(next[j], result.centroids[j]));
    result.centroids = std::move(next);
    if (std::sqrt(shift) <= config.tol) break;
  }
  return result;
}

}  // namespace cameo::scenario
