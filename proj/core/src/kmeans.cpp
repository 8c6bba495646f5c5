#include "protosarc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "protosarc/errors.hpp"
#include "protosarc/random.hpp"

namespace protosarc {

namespace {

std::vector<Vec> distinct_points(const std::vector<Vec>& points, std::size_t limit) {
  std::vector<Vec> out;
  for (const auto& p : points) {
    if (std::find(out.begin(), out.end(), p) == out.end()) {
      out.push_back(p);
      if (out.size() >= limit) break;
    }
  }
  return out;
}

std::vector<Vec> seed_plus_plus(const std::vector<Vec>& points, std::size_t k, Rng& rng) {
  const auto n = points.size();
  std::vector<Vec> centers;
  centers.reserve(k);
  centers.push_back(points[uniform_index(rng, n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Guard against landing on an existing center through rounding at the tail.
      while (d2[pick] == 0.0 && pick > 0) --pick;
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
  }
  return centers;
}

// Assigns every point to its nearest center (lowest index on ties); returns inertia.
double assign(const std::vector<Vec>& points, const std::vector<Vec>& centers, std::vector<std::size_t>& assignment,
              std::vector<double>& dist) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      const double d = squared_distance(points[i], centers[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    assignment[i] = best_j;
    dist[i] = best;
    inertia += best;
  }
  return inertia;
}

// Fills empty clusters; returns the inertia reduction.
double repair_empty(const std::vector<Vec>& points, std::vector<Vec>& centers, std::vector<std::size_t>& assignment,
                    std::vector<double>& dist) {
  double reduction = 0.0;
  const auto k = centers.size();
  for (std::size_t empty = 0; empty < k; ++empty) {
    std::vector<std::size_t> counts(k, 0);
    for (auto a : assignment) ++counts[a];
    if (counts[empty] != 0) continue;
    const auto largest = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    std::size_t far = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (assignment[i] == largest && (far == points.size() || dist[i] > dist[far])) far = i;
    }
    if (far == points.size() || counts[largest] < 2) continue;
    centers[empty] = points[far];
    reduction += dist[far];
    assignment[far] = empty;
    dist[far] = 0.0;
  }
  return reduction;
}

KMeansResult lloyd(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  KMeansResult result;
  const auto n = points.size();
  const auto dim = points.front().size();
  Rng rng(seed);
  auto centers = seed_plus_plus(points, k, rng);
  std::vector<std::size_t> assignment(n);
  std::vector<double> dist(n);

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    double inertia = assign(points, centers, assignment, dist);
    inertia -= repair_empty(points, centers, assignment, dist);
    result.inertia_history.push_back(inertia);
    ++result.iterations;

    std::vector<Vec> next(k, Vec(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& c = next[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) c[d] += points[i][d];
      ++counts[assignment[i]];
    }
    double max_shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) {
        next[j] = centers[j];
        continue;
      }
      for (auto& x : next[j]) x /= static_cast<double>(counts[j]);
      max_shift = std::max(max_shift, std::sqrt(squared_distance(next[j], centers[j])));
    }
    centers = std::move(next);
    if (max_shift < options.tol) break;
  }

  result.inertia = assign(points, centers, assignment, dist);
  result.inertia_history.push_back(result.inertia);
  result.centers = std::move(centers);
  result.assignment = std::move(assignment);
  return result;
}

}  // namespace

KMeansResult kmeans(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  if (points.empty()) throw DataError("kmeans: empty input");
  if (k == 0) throw ConfigError("kmeans: k must be at least 1");
  const auto dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw DataError("kmeans: points have inconsistent dimensions");
  }
  if (points.size() < k) {
    throw DataError("kmeans: " + std::to_string(points.size()) + " points cannot form k=" + std::to_string(k) +
                    " clusters");
  }

  KMeansResult result;
  const auto n = points.size();
  const auto distinct = distinct_points(points, k);
  if (distinct.size() < k) {
    result.warnings.push_back("kmeans: only " + std::to_string(distinct.size()) +
                              " distinct points for k=" + std::to_string(k) + "; returning the distinct points");
    result.centers = distinct;
    result.assignment.resize(n);
    std::vector<double> dist(n);
    result.inertia = assign(points, result.centers, result.assignment, dist);
    result.inertia_history.push_back(result.inertia);
    return result;
  }

  if (options.n_init == 0) throw ConfigError("kmeans: n_init must be at least 1");
  for (std::size_t run = 0; run < options.n_init; ++run) {
    auto candidate = lloyd(points, k, derive_seed(seed, run), options);
    if (run == 0 || candidate.inertia < result.inertia) result = std::move(candidate);
  }
  return result;
}

namespace {

std::vector<TaggedVector> cluster_groups(const std::vector<Vec> (&groups)[2], std::size_t k, std::uint64_t seed,
                                         const KMeansOptions& options, std::vector<std::string>* warnings) {
  std::vector<TaggedVector> out;
  for (int tag = 0; tag < 2; ++tag) {
    auto res = kmeans(groups[tag], k, derive_seed(seed, static_cast<std::uint64_t>(tag)), options);
    if (warnings) warnings->insert(warnings->end(), res.warnings.begin(), res.warnings.end());
    for (auto& c : res.centers) out.push_back({std::move(c), tag});
  }
  return out;
}

}  // namespace

std::vector<TaggedVector> init_semantic_prototypes(const Dataset& ds, std::size_t k_per_class, std::uint64_t seed,
                                                   const KMeansOptions& options, std::vector<std::string>* warnings) {
  if (k_per_class == 0) throw ConfigError("k_per_class must be at least 1");
  std::vector<Vec> groups[2];
  for (const auto& r : ds.records) groups[r.y].push_back(r.e_ct);
  for (int c = 0; c < 2; ++c) {
    if (groups[c].size() < k_per_class) {
      throw DataError("semantic prototype init: class " + std::to_string(c) + " has " +
                      std::to_string(groups[c].size()) + " records, need at least " + std::to_string(k_per_class));
    }
  }
  return cluster_groups(groups, k_per_class, seed, options, warnings);
}

std::vector<TaggedVector> init_sentiment_prototypes(const Dataset& ds, std::size_t k_per_polarity, std::uint64_t seed,
                                                    const KMeansOptions& options, std::vector<std::string>* warnings) {
  if (k_per_polarity == 0) throw ConfigError("k_per_polarity must be at least 1");
  std::vector<Vec> groups[2];
  for (const auto& r : ds.records) {
    if (r.y != 0) continue;
    if (!r.e_st_full) {
      throw DataError("sentiment prototype init: record '" + r.id + "' is missing e_st_full");
    }
    groups[r.z_full].push_back(*r.e_st_full);
  }
  for (int z = 0; z < 2; ++z) {
    if (groups[z].size() < k_per_polarity) {
      throw DataError("sentiment prototype init: " + std::to_string(groups[z].size()) +
                      " non-sarcastic records with z_full=" + std::to_string(z) + ", need at least " +
                      std::to_string(k_per_polarity));
    }
  }
  return cluster_groups(groups, k_per_polarity, seed, options, warnings);
}

}  // namespace protosarc
