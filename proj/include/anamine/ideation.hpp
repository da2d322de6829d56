#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anamine/retrieval.hpp"

namespace anamine {

struct PurposeClustering {
    int k = 0;
    std::vector<int> assignment;             // by index row
    Eigen::MatrixXd centers;                 // K x d, unit rows (0 if empty)
    std::vector<std::vector<int>> members;   // rows per cluster
    std::vector<double> homogeneity;         // mean squared distance to center
};

// Spherical k-means on the purpose vectors: Lloyd iterations with k-means++
// style seeding, centers renormalized every update, empty clusters
// re-seeded from the farthest point. Deterministic given seed.
PurposeClustering kmeans_purpose(const EmbeddingIndex& index, int k,
                                 std::uint64_t seed, int max_iters = 100);

struct SeedPick {
    int cluster = -1;
    std::string seed_id;
    std::vector<std::string> pool;  // cluster members minus the seed
    double homogeneity = 0.0;
};

// Drops clusters with fewer than min_pool + 1 members (seed plus pool),
// ranks the rest most-homogeneous first, keeps the top max_clusters, and
// picks each cluster's member nearest its center as the seed. Returns all
// survivors with a warning when fewer than max_clusters remain.
std::vector<SeedPick> pick_seed_clusters(const EmbeddingIndex& index,
                                         const PurposeClustering& clustering,
                                         int max_clusters, int min_pool);

struct InspirationSet {
    std::string seed_id;
    std::vector<std::string> pool;
    std::vector<std::string> selected;  // size M, selection order
    std::optional<double> min_pairwise_distance;  // unset when |selected| < 2
};

// Greedy MAX-MIN dispersion over mechanism distance: starts from the pool
// member farthest from the seed, then repeatedly adds the candidate whose
// minimum distance to the selected set is largest. Ties by product id.
InspirationSet maxmin_diversify(const EmbeddingIndex& index,
                                const std::string& seed_id,
                                const std::vector<std::string>& pool, int m);

// Greedy MAX-AVG variant: the first pick maximizes the mean mechanism
// distance to the rest of the pool, later picks maximize the summed
// distance to the selected set.
std::vector<std::string> maxavg_diversify(const EmbeddingIndex& index,
                                          const std::vector<std::string>& pool,
                                          int m);

struct InspirationParams {
    int clusters = 50;       // K
    int max_seeds = 12;      // P
    int per_seed = 12;       // M
    std::uint64_t seed = 0;  // RNG seed for clustering
    int max_iters = 100;
};

struct InspirationReportEntry {
    std::string id;
    double purpose_similarity = 0.0;    // to the seed product
    double mechanism_similarity = 0.0;
};

struct SeedReport {
    std::string seed_id;
    int cluster = -1;
    double cluster_homogeneity = 0.0;
    std::vector<InspirationReportEntry> inspirations;
    std::optional<double> min_pairwise_distance;
};

std::vector<SeedReport> generate_inspirations(const EmbeddingIndex& index,
                                              const InspirationParams& params);

}  // namespace anamine
