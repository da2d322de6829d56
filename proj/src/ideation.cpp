#include "anamine/ideation.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "anamine/rng.hpp"

namespace anamine {

namespace {

double sq_dist(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    return (a - b).squaredNorm();
}

}  // namespace

PurposeClustering kmeans_purpose(const EmbeddingIndex& index, int k,
                                 std::uint64_t seed, int max_iters) {
    const int n = static_cast<int>(index.size());
    if (k < 1) {
        throw std::runtime_error("cluster count must be >= 1");
    }
    if (n < k) {
        throw std::runtime_error("fewer products (" + std::to_string(n) +
                                 ") than clusters (" + std::to_string(k) + ")");
    }
    const Eigen::MatrixXd& points = index.purpose();
    Rng rng(seed);

    // k-means++ style seeding: first center uniform, then proportional to
    // squared distance to the nearest chosen center.
    Eigen::MatrixXd centers(k, index.dim());
    centers.row(0) = points.row(static_cast<int>(rng.below(n)));
    Eigen::VectorXd nearest_sq(n);
    for (int i = 0; i < n; ++i) {
        nearest_sq(i) = sq_dist(points.row(i), centers.row(0));
    }
    for (int c = 1; c < k; ++c) {
        const double total = nearest_sq.sum();
        int pick;
        if (total <= 0.0) {
            pick = static_cast<int>(rng.below(n));  // all points coincide
        } else {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                acc += nearest_sq(i);
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(c) = points.row(pick);
        for (int i = 0; i < n; ++i) {
            nearest_sq(i) = std::min(nearest_sq(i), sq_dist(points.row(i),
                                                            centers.row(c)));
        }
    }

    // Lloyd iterations. Assignment by maximal cosine against unit centers;
    // for unit vectors this matches minimal squared Euclidean distance.
    std::vector<int> assignment(n, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        std::vector<int> next(n);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_dot = points.row(i).dot(centers.row(0));
            for (int c = 1; c < k; ++c) {
                const double dot = points.row(i).dot(centers.row(c));
                if (dot > best_dot) {
                    best = c;
                    best_dot = dot;
                }
            }
            next[i] = best;
        }

        // Re-seed empty clusters from the farthest point, when one exists.
        std::vector<int> counts(k, 0);
        for (int a : next) ++counts[a];
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            int farthest = -1;
            double far_sq = 0.0;
            for (int i = 0; i < n; ++i) {
                if (counts[next[i]] <= 1) continue;  // would empty its cluster
                const double d = sq_dist(points.row(i), centers.row(next[i]));
                if (d > far_sq || (d == far_sq && farthest < 0)) {
                    far_sq = d;
                    farthest = i;
                }
            }
            if (farthest < 0 || far_sq <= 0.0) continue;  // degenerate data
            --counts[next[farthest]];
            next[farthest] = c;
            ++counts[c];
            centers.row(c) = points.row(farthest);
        }

        const bool converged = next == assignment;
        assignment = std::move(next);

        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(index.dim());
            for (int i = 0; i < n; ++i) {
                if (assignment[i] == c) sum += points.row(i);
            }
            const double norm = sum.norm();
            if (norm > 1e-12) {
                centers.row(c) = sum / norm;  // spherical update
            }
        }
        if (converged) break;
    }

    PurposeClustering out;
    out.k = k;
    out.assignment = assignment;
    out.centers = centers;
    out.members.assign(k, {});
    for (int i = 0; i < n; ++i) out.members[assignment[i]].push_back(i);
    out.homogeneity.assign(k, 0.0);
    for (int c = 0; c < k; ++c) {
        if (out.members[c].empty()) continue;
        double total = 0.0;
        for (int i : out.members[c]) {
            total += sq_dist(points.row(i), centers.row(c));
        }
        out.homogeneity[c] = total / static_cast<double>(out.members[c].size());
    }
    return out;
}

std::vector<SeedPick> pick_seed_clusters(const EmbeddingIndex& index,
                                         const PurposeClustering& clustering,
                                         int max_clusters, int min_pool) {
    if (max_clusters < 1) {
        throw std::runtime_error("max_clusters must be >= 1");
    }
    std::vector<int> survivors;
    for (int c = 0; c < clustering.k; ++c) {
        // seed + min_pool inspirations must fit
        if (static_cast<int>(clustering.members[c].size()) >= min_pool + 1) {
            survivors.push_back(c);
        }
    }
    std::sort(survivors.begin(), survivors.end(), [&](int a, int b) {
        if (clustering.homogeneity[a] != clustering.homogeneity[b]) {
            return clustering.homogeneity[a] < clustering.homogeneity[b];
        }
        return a < b;
    });
    if (static_cast<int>(survivors.size()) < max_clusters) {
        std::cerr << "warning: only " << survivors.size() << " of " << max_clusters
                  << " requested clusters have more than " << min_pool
                  << " members\n";
    } else {
        survivors.resize(static_cast<std::size_t>(max_clusters));
    }

    std::vector<SeedPick> picks;
    for (int c : survivors) {
        SeedPick pick;
        pick.cluster = c;
        pick.homogeneity = clustering.homogeneity[c];

        int best = -1;
        double best_sq = std::numeric_limits<double>::infinity();
        for (int i : clustering.members[c]) {
            const double d = sq_dist(index.purpose().row(i),
                                     clustering.centers.row(c));
            const bool closer =
                d < best_sq ||
                (d == best_sq && best >= 0 &&
                 index.ids()[static_cast<std::size_t>(i)] <
                     index.ids()[static_cast<std::size_t>(best)]);
            if (closer) {
                best = i;
                best_sq = d;
            }
        }
        pick.seed_id = index.ids()[static_cast<std::size_t>(best)];
        for (int i : clustering.members[c]) {
            if (i != best) pick.pool.push_back(index.ids()[static_cast<std::size_t>(i)]);
        }
        picks.push_back(std::move(pick));
    }
    return picks;
}

namespace {

double mech_distance(const EmbeddingIndex& index, int a, int b) {
    return 1.0 - index.mechanism().row(a).dot(index.mechanism().row(b));
}

int require_row(const EmbeddingIndex& index, const std::string& id) {
    const int row = index.row_of(id);
    if (row < 0) {
        throw std::runtime_error("product not in index: " + id);
    }
    return row;
}

}  // namespace

InspirationSet maxmin_diversify(const EmbeddingIndex& index,
                                const std::string& seed_id,
                                const std::vector<std::string>& pool, int m) {
    if (m < 1) {
        throw std::runtime_error("selection size must be >= 1");
    }
    if (static_cast<int>(pool.size()) < m) {
        throw std::runtime_error("pool of " + std::to_string(pool.size()) +
                                 " candidates cannot supply " + std::to_string(m) +
                                 " inspirations");
    }
    const int seed_row = require_row(index, seed_id);
    std::vector<int> rows;
    for (const auto& id : pool) {
        const int r = require_row(index, id);
        if (r == seed_row) {
            throw std::runtime_error("seed " + seed_id + " appears in its own pool");
        }
        rows.push_back(r);
    }

    std::vector<char> taken(rows.size(), 0);
    std::vector<int> selected;
    // min_dist starts as the distance to the seed (first pick: farthest from
    // the seed) and is reset to distance-to-selected once the set is seeded.
    std::vector<double> min_dist(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        min_dist[i] = mech_distance(index, rows[i], seed_row);
    }
    auto pick_best = [&] {
        int best = -1;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (taken[i]) continue;
            if (best < 0 || min_dist[i] > min_dist[static_cast<std::size_t>(best)] ||
                (min_dist[i] == min_dist[static_cast<std::size_t>(best)] &&
                 pool[i] < pool[static_cast<std::size_t>(best)])) {
                best = static_cast<int>(i);
            }
        }
        return best;
    };

    const int first = pick_best();
    taken[static_cast<std::size_t>(first)] = 1;
    selected.push_back(first);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!taken[i]) {
            min_dist[i] =
                mech_distance(index, rows[i], rows[static_cast<std::size_t>(first)]);
        }
    }
    while (static_cast<int>(selected.size()) < m) {
        const int best = pick_best();
        taken[static_cast<std::size_t>(best)] = 1;
        selected.push_back(best);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (taken[i]) continue;
            min_dist[i] = std::min(
                min_dist[i],
                mech_distance(index, rows[i], rows[static_cast<std::size_t>(best)]));
        }
    }

    InspirationSet out;
    out.seed_id = seed_id;
    out.pool = pool;
    for (int i : selected) out.selected.push_back(pool[static_cast<std::size_t>(i)]);
    if (selected.size() >= 2) {
        double min_pair = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < selected.size(); ++i) {
            for (std::size_t j = i + 1; j < selected.size(); ++j) {
                min_pair = std::min(min_pair,
                                    mech_distance(index,
                                                  rows[static_cast<std::size_t>(selected[i])],
                                                  rows[static_cast<std::size_t>(selected[j])]));
            }
        }
        out.min_pairwise_distance = min_pair;
    }
    return out;
}

std::vector<std::string> maxavg_diversify(const EmbeddingIndex& index,
                                          const std::vector<std::string>& pool,
                                          int m) {
    if (m < 1) {
        throw std::runtime_error("selection size must be >= 1");
    }
    if (static_cast<int>(pool.size()) < m) {
        throw std::runtime_error("pool of " + std::to_string(pool.size()) +
                                 " candidates cannot supply " + std::to_string(m) +
                                 " selections");
    }
    std::vector<int> rows;
    for (const auto& id : pool) rows.push_back(require_row(index, id));

    // First pick: largest mean distance to the rest of the pool.
    std::vector<double> sum_dist(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (i != j) sum_dist[i] += mech_distance(index, rows[i], rows[j]);
        }
    }
    std::vector<char> taken(rows.size(), 0);
    std::vector<int> selected;
    auto pick_best = [&](const std::vector<double>& score) {
        int best = -1;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (taken[i]) continue;
            if (best < 0 || score[i] > score[static_cast<std::size_t>(best)] ||
                (score[i] == score[static_cast<std::size_t>(best)] &&
                 pool[i] < pool[static_cast<std::size_t>(best)])) {
                best = static_cast<int>(i);
            }
        }
        return best;
    };

    int first = pick_best(sum_dist);
    taken[static_cast<std::size_t>(first)] = 1;
    selected.push_back(first);

    std::vector<double> to_selected(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!taken[i]) {
            to_selected[i] =
                mech_distance(index, rows[i], rows[static_cast<std::size_t>(first)]);
        }
    }
    while (static_cast<int>(selected.size()) < m) {
        const int best = pick_best(to_selected);
        taken[static_cast<std::size_t>(best)] = 1;
        selected.push_back(best);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!taken[i]) {
                to_selected[i] += mech_distance(index, rows[i],
                                                rows[static_cast<std::size_t>(best)]);
            }
        }
    }

    std::vector<std::string> out;
    for (int i : selected) out.push_back(pool[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<SeedReport> generate_inspirations(const EmbeddingIndex& index,
                                              const InspirationParams& params) {
    const auto clustering =
        kmeans_purpose(index, params.clusters, params.seed, params.max_iters);
    const auto picks = pick_seed_clusters(index, clustering, params.max_seeds,
                                          params.per_seed);

    std::vector<SeedReport> reports;
    for (const auto& pick : picks) {
        const auto set =
            maxmin_diversify(index, pick.seed_id, pick.pool, params.per_seed);
        SeedReport report;
        report.seed_id = pick.seed_id;
        report.cluster = pick.cluster;
        report.cluster_homogeneity = pick.homogeneity;
        report.min_pairwise_distance = set.min_pairwise_distance;
        const int seed_row = index.row_of(pick.seed_id);
        for (const auto& id : set.selected) {
            const int row = index.row_of(id);
            InspirationReportEntry entry;
            entry.id = id;
            entry.purpose_similarity =
                index.purpose().row(seed_row).dot(index.purpose().row(row));
            entry.mechanism_similarity =
                index.mechanism().row(seed_row).dot(index.mechanism().row(row));
            report.inspirations.push_back(std::move(entry));
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace anamine
