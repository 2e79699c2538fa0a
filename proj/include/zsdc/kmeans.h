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

#ifndef ZSDC_KMEANS_H_
#define ZSDC_KMEANS_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace zsdc {

// Points and centroids are stored one per column.
struct KMeansResult {
  Eigen::MatrixXf centroids;
  std::vector<int> assignment;
  // Mean squared distance of each point to its centroid.
  double mean_distortion = 0.0;
  int iterations_run = 0;
  // Every point identical, so every centroid collapses onto it.
  bool degenerate = false;
};

// k-means++ seeding followed by at most `iterations` Lloyd steps (stopping
// early once assignments are stable). Empty clusters are repaired by moving
// the point farthest from its centroid into them. Deterministic in `seed`.
KMeansResult KMeans(const Eigen::MatrixXf& points, int k, int iterations,
                    uint64_t seed);

// Index of the nearest centroid for every point (squared L2, lowest index
// wins ties) and the corresponding squared distance.
void NearestCentroids(const Eigen::MatrixXf& centroids,
                      const Eigen::VectorXf& centroid_sq_norms,
                      const Eigen::MatrixXf& points, std::vector<int>* index,
                      std::vector<float>* sq_distance);

}  // namespace zsdc

#endif  // ZSDC_KMEANS_H_
