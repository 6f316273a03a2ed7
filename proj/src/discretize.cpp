#include "bmconc/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bmconc/parallel.hpp"
#include "bmconc/rng.hpp"

namespace bmconc {

namespace {

constexpr std::uint64_t kBatchSize = 1 << 16;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

PointCloud PointCloud::unit_vectors(std::size_t ambient_dim, std::vector<double> coords) {
  if (ambient_dim < 2) throw Error(ErrorCode::InvalidArgument, "ambient dimension must be >= 2");
  if (coords.empty() || coords.size() % ambient_dim != 0)
    throw Error(ErrorCode::DimensionMismatch, "coordinate count is not a multiple of the dimension");
  PointCloud c;
  c.ambient_dim_ = ambient_dim;
  c.count_ = coords.size() / ambient_dim;
  for (std::size_t i = 0; i < c.count_; ++i) {
    std::span<double> p(coords.data() + i * ambient_dim, ambient_dim);
    double len = norm(p);
    if (!(std::abs(len - 1.0) <= 1e-12))
      throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(i) + " is not a unit vector");
    for (double& x : p) x /= len;
  }
  c.coords_ = std::move(coords);
  return c;
}

PointCloud PointCloud::abstract(std::size_t count, DistanceFn distance) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "point cloud must be nonempty");
  if (!distance) throw Error(ErrorCode::InvalidArgument, "distance callback is required");
  PointCloud c;
  c.count_ = count;
  c.distance_ = std::move(distance);
  return c;
}

double PointCloud::distance(std::size_t i, std::size_t j) const {
  return on_sphere() ? geodesic_distance(point(i), point(j)) : distance_(i, j);
}

double geodesic_distance(std::span<const double> u, std::span<const double> v) {
  double diff = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    diff += (u[k] - v[k]) * (u[k] - v[k]);
    sum += (u[k] + v[k]) * (u[k] + v[k]);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

SphereMethod parse_sphere_method(const std::string& name) {
  if (name == "fibonacci") return SphereMethod::Fibonacci;
  if (name == "uniform_random" || name == "uniform") return SphereMethod::UniformRandom;
  throw Error(ErrorCode::InvalidArgument, "method must be fibonacci or uniform_random, got '" + name + "'");
}

PointCloud sphere_sample(int m, std::size_t count, SphereMethod method, std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "sphere dimension must be >= 1");
  if (count < 2) throw Error(ErrorCode::InvalidArgument, "count must be >= 2");
  const std::size_t dim = static_cast<std::size_t>(m) + 1;
  std::vector<double> coords(count * dim);
  if (method == SphereMethod::Fibonacci) {
    if (m != 2)
      throw Error(ErrorCode::UnsupportedDimensionForMethod, "fibonacci lattice is defined only for m = 2");
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
      double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      double phi = golden_angle * static_cast<double>(i);
      double* p = coords.data() + i * 3;
      p[0] = rho * std::cos(phi);
      p[1] = rho * std::sin(phi);
      p[2] = z;
      double len = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      for (int k = 0; k < 3; ++k) p[k] /= len;
    }
  } else {
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
      std::span<double> p(coords.data() + i * dim, dim);
      double len;
      do {
        for (double& x : p) x = rng.normal();
        len = norm(p);
      } while (!(len > 1e-300));
      for (double& x : p) x /= len;
    }
  }
  return PointCloud::unit_vectors(dim, std::move(coords));
}

NetResult farthest_point_net(const PointCloud& cloud, const NetStop& stop) {
  if (!stop.k && !stop.target_eps) throw Error(ErrorCode::InvalidArgument, "need k or target_eps");
  if (stop.k && (*stop.k == 0 || *stop.k > cloud.count()))
    throw Error(ErrorCode::InvalidArgument, "k must lie in [1, cloud size]");
  if (stop.target_eps && !(*stop.target_eps > 0.0))
    throw Error(ErrorCode::InvalidArgument, "target_eps must be > 0");

  const std::size_t n = cloud.count();
  NetResult net;
  std::vector<double> nearest(n);
  auto add_center = [&](std::size_t c) {
    net.centers.push_back(c);
    for (std::size_t x = 0; x < n; ++x) {
      double d = cloud.distance(c, x);
      if (net.centers.size() == 1 || d < nearest[x]) nearest[x] = d;
    }
    nearest[c] = 0.0;
  };
  add_center(0);
  for (;;) {
    std::size_t far = 0;
    for (std::size_t x = 1; x < n; ++x)
      if (nearest[x] > nearest[far]) far = x;
    net.covering_radius = nearest[far];
    if (stop.k && net.centers.size() >= *stop.k) break;
    if (stop.target_eps && net.covering_radius <= *stop.target_eps) break;
    if (net.covering_radius == 0.0) {
      net.target_reached = false;
      break;
    }
    add_center(far);
  }
  if (stop.target_eps && net.covering_radius > *stop.target_eps) net.target_reached = false;
  return net;
}

CellWeights voronoi_weights(const PointCloud& cloud, std::span<const std::size_t> centers,
                            std::uint64_t mc_samples, std::uint64_t seed, unsigned workers) {
  if (!cloud.on_sphere()) throw Error(ErrorCode::InvalidArgument, "voronoi_weights needs points on a sphere");
  if (centers.empty()) throw Error(ErrorCode::InvalidArgument, "centers must be nonempty");
  for (std::size_t c : centers)
    if (c >= cloud.count()) throw Error(ErrorCode::IndexOutOfRange, "center index " + std::to_string(c));
  if (mc_samples < 10 * static_cast<std::uint64_t>(centers.size()))
    throw Error(ErrorCode::BadSampleBudget, "mc_samples must be >= 10 * number of centers");

  const std::size_t dim = cloud.ambient_dim();
  const std::size_t k = centers.size();
  std::vector<double> packed(k * dim);
  for (std::size_t c = 0; c < k; ++c) {
    auto p = cloud.point(centers[c]);
    std::copy(p.begin(), p.end(), packed.begin() + static_cast<std::ptrdiff_t>(c * dim));
  }

  const std::uint64_t batches = (mc_samples + kBatchSize - 1) / kBatchSize;
  struct Partial {
    std::vector<std::uint64_t> counts;
    double max_distance = 0.0;
  };
  std::vector<Partial> partials(workers == 0 ? default_workers() : workers);
  std::size_t chunks = parallel_chunks(batches, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
    Partial local{std::vector<std::uint64_t>(k, 0), 0.0};
    std::vector<double> x(dim);
    for (std::size_t b = begin; b < end; ++b) {
      Rng rng(mix_seed(seed, b + 1));
      const std::uint64_t here = std::min<std::uint64_t>(kBatchSize, mc_samples - b * kBatchSize);
      for (std::uint64_t s = 0; s < here; ++s) {
        double len;
        do {
          for (double& v : x) v = rng.normal();
          len = norm(x);
        } while (!(len > 1e-300));
        for (double& v : x) v /= len;
        // Nearest in geodesic distance is largest inner product.
        std::size_t best = 0;
        double best_dot = -2.0;
        for (std::size_t c = 0; c < k; ++c) {
          const double* p = packed.data() + c * dim;
          double dot = 0.0;
          for (std::size_t q = 0; q < dim; ++q) dot += p[q] * x[q];
          if (dot > best_dot) {
            best_dot = dot;
            best = c;
          }
        }
        ++local.counts[best];
        local.max_distance = std::max(
            local.max_distance, geodesic_distance(std::span<const double>(packed.data() + best * dim, dim), x));
      }
    }
    partials[w] = std::move(local);
  });

  CellWeights out;
  out.counts.assign(k, 0);
  for (std::size_t w = 0; w < chunks; ++w) {
    for (std::size_t c = 0; c < k; ++c) out.counts[c] += partials[w].counts[c];
    out.max_sample_distance = std::max(out.max_sample_distance, partials[w].max_distance);
  }
  const double total = static_cast<double>(mc_samples);
  for (std::size_t c = 0; c < k; ++c) {
    if (out.counts[c] == 0)
      throw Error(ErrorCode::EmptyCell, "cell of center " + std::to_string(c) +
                                            " received no samples; raise mc_samples or use fewer centers");
    double w = static_cast<double>(out.counts[c]) / total;
    out.weights.push_back(w);
    out.stderr_values.push_back(std::sqrt(w * (1.0 - w) / total));
  }
  return out;
}

double DiscretizationResult::stderr_budget() const {
  double s = 0.0;
  for (double e : weight_stderr) s += e * e;
  return std::sqrt(s);
}

DiscretizationResult discretize_sphere(int m, std::size_t center_count, std::uint64_t mc_samples,
                                       std::uint64_t seed, const DiscretizeOptions& options) {
  if (center_count == 0) throw Error(ErrorCode::InvalidArgument, "center_count must be >= 1");
  if (center_count > options.cloud_size)
    throw Error(ErrorCode::InvalidArgument, "center_count exceeds the cloud size");
  SphereMethod method = options.cloud_method.value_or(m == 2 ? SphereMethod::Fibonacci : SphereMethod::UniformRandom);
  PointCloud cloud = sphere_sample(m, options.cloud_size, method, mix_seed(seed, 0xc10dULL));
  NetResult net = farthest_point_net(cloud, NetStop{center_count, std::nullopt});
  CellWeights cells = voronoi_weights(cloud, net.centers, mc_samples, seed, options.workers);

  const std::size_t k = net.centers.size();
  RawSpace raw;
  raw.weights = cells.weights;
  raw.dist.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    raw.labels.push_back("c" + std::to_string(i));
    for (std::size_t j = i + 1; j < k; ++j) {
      double d = cloud.distance(net.centers[i], net.centers[j]);
      raw.dist[i * k + j] = d;
      raw.dist[j * k + i] = d;
    }
  }

  DiscretizationResult result{.space = validate_space(std::move(raw))};
  result.m = m;
  result.covering_radius = net.covering_radius;
  result.mc_covering_radius = cells.max_sample_distance;
  result.center_indices = net.centers;
  result.cloud_size = cloud.count();
  result.mc_samples = mc_samples;
  result.seed = seed;
  result.weight_stderr = cells.stderr_values;
  return result;
}

}  // namespace bmconc
