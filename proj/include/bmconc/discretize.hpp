#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmconc/core.hpp"

namespace bmconc {

/// Either unit vectors on S^m (ambient dimension m + 1) with geodesic
/// distance, or an abstract point set with a distance callback.
class PointCloud {
 public:
  using DistanceFn = std::function<double(std::size_t, std::size_t)>;

  /// `coords` holds count * ambient_dim values; each vector is renormalized
  /// and must already have unit norm to within 1e-12.
  static PointCloud unit_vectors(std::size_t ambient_dim, std::vector<double> coords);
  static PointCloud abstract(std::size_t count, DistanceFn distance);

  std::size_t count() const noexcept { return count_; }
  bool on_sphere() const noexcept { return ambient_dim_ > 0; }
  std::size_t ambient_dim() const noexcept { return ambient_dim_; }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * ambient_dim_, ambient_dim_};
  }
  double distance(std::size_t i, std::size_t j) const;

 private:
  std::size_t count_ = 0;
  std::size_t ambient_dim_ = 0;
  std::vector<double> coords_;
  DistanceFn distance_;
};

/// Great-circle distance between unit vectors, 2 atan2(|u - v|, |u + v|).
/// Equal to arccos(<u, v>) but accurate near 0 and pi.
double geodesic_distance(std::span<const double> u, std::span<const double> v);

enum class SphereMethod { Fibonacci, UniformRandom };

SphereMethod parse_sphere_method(const std::string& name);

/// `count` points on the unit sphere S^m in R^(m+1). Fibonacci lattice is
/// only defined for m = 2; uniform_random normalizes Gaussian vectors.
PointCloud sphere_sample(int m, std::size_t count, SphereMethod method, std::uint64_t seed);

struct NetStop {
  std::optional<std::size_t> k;
  std::optional<double> target_eps;
};

struct NetResult {
  std::vector<std::size_t> centers;
  double covering_radius = 0.0;  // max over the cloud of the distance to the nearest center
  bool target_reached = true;    // false when target_eps could not be reached with the cloud
};

/// Greedy farthest-point traversal from index 0; ties go to the lowest index.
NetResult farthest_point_net(const PointCloud& cloud, const NetStop& stop);

struct CellWeights {
  std::vector<double> weights;
  std::vector<double> stderr_values;
  std::vector<std::uint64_t> counts;
  double max_sample_distance = 0.0;  // largest sample-to-center distance seen
};

/// Monte Carlo measure of the Voronoi cells of `centers` under the uniform
/// measure of the sphere. Samples are drawn in fixed-size batches, each from
/// its own seeded stream, so the result does not depend on `workers`.
CellWeights voronoi_weights(const PointCloud& cloud, std::span<const std::size_t> centers,
                            std::uint64_t mc_samples, std::uint64_t seed, unsigned workers = 1);

struct DiscretizationResult {
  MetricMeasureSpace space;
  int m = 2;
  double covering_radius = 0.0;     // measured on the dense cloud
  double mc_covering_radius = 0.0;  // measured on the Monte Carlo samples
  std::vector<std::size_t> center_indices{};
  std::size_t cloud_size = 0;
  std::uint64_t mc_samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> weight_stderr{};

  /// sqrt(sum of squared per-cell standard errors).
  double stderr_budget() const;
};

struct DiscretizeOptions {
  std::size_t cloud_size = 100000;
  std::optional<SphereMethod> cloud_method;  // default: fibonacci for m = 2, else uniform_random
  unsigned workers = 1;
};

DiscretizationResult discretize_sphere(int m, std::size_t center_count, std::uint64_t mc_samples,
                                       std::uint64_t seed, const DiscretizeOptions& options = {});

}  // namespace bmconc
