// Copyright 2026 The ZSDC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "zsdc/kmeans.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "zsdc/error.h"

namespace zsdc {
namespace {

constexpr Eigen::Index kChunk = 4096;

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::VectorXf SquaredDistancesTo(const Eigen::MatrixXf& points,
                                   const Eigen::VectorXf& c) {
  return (points.colwise() - c).colwise().squaredNorm().transpose();
}

}  // namespace

void NearestCentroids(const Eigen::MatrixXf& centroids,
                      const Eigen::VectorXf& centroid_sq_norms,
                      const Eigen::MatrixXf& points, std::vector<int>* index,
                      std::vector<float>* sq_distance) {
  const Eigen::Index n = points.cols();
  const Eigen::Index k = centroids.cols();
  index->resize(static_cast<size_t>(n));
  if (sq_distance) sq_distance->resize(static_cast<size_t>(n));
  Eigen::MatrixXf dots;
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index cols = std::min(kChunk, n - start);
    dots.noalias() = centroids.transpose() * points.middleCols(start, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      // ||c||^2 - 2 c.x ranks centroids the same as ||x - c||^2.
      Eigen::Index best = 0;
      float best_score = centroid_sq_norms[0] - 2.0f * dots(0, j);
      for (Eigen::Index c = 1; c < k; ++c) {
        const float score = centroid_sq_norms[c] - 2.0f * dots(c, j);
        if (score < best_score) {
          best_score = score;
          best = c;
        }
      }
      (*index)[start + j] = static_cast<int>(best);
      if (sq_distance) {
        (*sq_distance)[start + j] =
            (points.col(start + j) - centroids.col(best)).squaredNorm();
      }
    }
  }
}

KMeansResult KMeans(const Eigen::MatrixXf& points, int k, int iterations,
                    uint64_t seed) {
  const Eigen::Index n = points.cols();
  const Eigen::Index dim = points.rows();
  if (k <= 0 || n < k) {
    Fail(ErrorCode::kInvalidArgument,
         "k-means needs at least k=" + std::to_string(k) + " points, got " +
             std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids.resize(dim, k);

  // k-means++ seeding.
  std::vector<char> chosen(static_cast<size_t>(n), 0);
  Eigen::Index first = static_cast<Eigen::Index>(rng() % static_cast<uint64_t>(n));
  chosen[first] = 1;
  result.centroids.col(0) = points.col(first);
  Eigen::VectorXf d2 = SquaredDistancesTo(points, result.centroids.col(0));
  Eigen::Index next_unchosen = 0;
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += d2[i];
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = Uniform01(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0f) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        // Rounding at the tail: take the last point with positive weight.
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[i] > 0.0f) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every remaining point coincides with a chosen centroid.
      while (chosen[next_unchosen]) ++next_unchosen;
      pick = next_unchosen;
    }
    chosen[pick] = 1;
    result.centroids.col(c) = points.col(pick);
    d2 = d2.cwiseMin(SquaredDistancesTo(points, result.centroids.col(c)));
  }

  // Lloyd iterations.
  std::vector<int> assign, previous;
  std::vector<float> dist;
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  Eigen::MatrixXd sums(dim, k);
  std::vector<int64_t> counts(k);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXf norms = result.centroids.colwise().squaredNorm().transpose();
    NearestCentroids(result.centroids, norms, points, &assign, &dist);

    std::fill(counts.begin(), counts.end(), 0);
    for (int a : assign) ++counts[a];
    bool repaired = false;
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&dist](Eigen::Index a, Eigen::Index b) {
                         return dist[a] > dist[b];
                       });
      size_t cursor = 0;
      for (int c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        // Farthest point whose own cluster would not be emptied.
        while (cursor < order.size() && counts[assign[order[cursor]]] <= 1) ++cursor;
        if (cursor == order.size()) break;
        const Eigen::Index p = order[cursor++];
        --counts[assign[p]];
        assign[p] = c;
        counts[c] = 1;
        repaired = true;
      }
    }

    result.iterations_run = it + 1;
    if (!repaired && assign == previous) break;
    previous = assign;

    sums.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(assign[i]) += points.col(i).cast<double>();
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        result.centroids.col(c) =
            (sums.col(c) / static_cast<double>(counts[c])).cast<float>();
      }
    }
  }

  const Eigen::VectorXf norms = result.centroids.colwise().squaredNorm().transpose();
  NearestCentroids(result.centroids, norms, points, &result.assignment, &dist);
  double total = 0.0;
  for (float d : dist) total += d;
  result.mean_distortion = total / static_cast<double>(n);

  result.degenerate = true;
  for (Eigen::Index i = 1; i < n && result.degenerate; ++i) {
    if (points.col(i) != points.col(0)) result.degenerate = false;
  }
  return result;
}

}  // namespace zsdc
