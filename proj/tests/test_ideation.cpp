#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "anamine/ideation.hpp"
#include "anamine/rng.hpp"

using namespace anamine;

namespace {

EncodedDoc encoded(const std::string& id, const Eigen::VectorXd& p,
                   const Eigen::VectorXd& m) {
    EncodedDoc doc;
    doc.product_id = id;
    doc.purpose_raw = p;
    doc.mechanism_raw = m;
    doc.purpose_unit = p / p.norm();
    doc.mechanism_unit = m / m.norm();
    return doc;
}

Eigen::VectorXd random_unit(int dim, Rng& rng) {
    Eigen::VectorXd v(dim);
    do {
        for (int i = 0; i < dim; ++i) v(i) = rng.normal();
    } while (v.norm() < 1e-9);
    return v / v.norm();
}

std::string padded(const char* prefix, int i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i);
    return buf;
}

// Planted purpose groups: group g points jitter around axis g.
EmbeddingIndex planted_index(int groups, int per_group, int dim, double jitter,
                             Rng& rng) {
    std::vector<EncodedDoc> docs;
    int n = 0;
    for (int g = 0; g < groups; ++g) {
        for (int i = 0; i < per_group; ++i) {
            Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
            p(g) = 1.0;
            for (int j = 0; j < dim; ++j) p(j) += jitter * rng.normal();
            docs.push_back(encoded(padded("p", n++), p, random_unit(dim, rng)));
        }
    }
    return EmbeddingIndex::build(docs);
}

double mech_dist(const EmbeddingIndex& index, const std::string& a,
                 const std::string& b) {
    return 1.0 - index.mechanism()
                     .row(index.row_of(a))
                     .dot(index.mechanism().row(index.row_of(b)));
}

// Brute-force MAX-MIN optimum over all size-m subsets of the pool.
double brute_force_maxmin(const EmbeddingIndex& index,
                          const std::vector<std::string>& pool, int m) {
    std::vector<int> pick(pool.size(), 0);
    std::fill(pick.begin(), pick.begin() + m, 1);
    std::sort(pick.begin(), pick.end());
    double best = -1.0;
    do {
        double min_pair = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (!pick[i]) continue;
            for (std::size_t j = i + 1; j < pool.size(); ++j) {
                if (!pick[j]) continue;
                min_pair = std::min(min_pair, mech_dist(index, pool[i], pool[j]));
            }
        }
        best = std::max(best, min_pair);
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
}

}  // namespace

TEST_CASE("kmeans separates orthogonal points perfectly") {
    const int k = 5;
    std::vector<EncodedDoc> docs;
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(k);
        p(i) = 1.0;
        docs.push_back(encoded(padded("p", i), p, p));
    }
    const auto index = EmbeddingIndex::build(docs);
    const auto clustering = kmeans_purpose(index, k, 7);
    std::set<int> used(clustering.assignment.begin(), clustering.assignment.end());
    CHECK(used.size() == static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        CHECK(clustering.homogeneity[c] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(clustering.members[c].size() == 1);
    }
}

TEST_CASE("kmeans tolerates identical points and empty clusters") {
    std::vector<EncodedDoc> docs;
    const Eigen::Vector3d p(1, 0, 0);
    for (int i = 0; i < 4; ++i) docs.push_back(encoded(padded("p", i), p, p));
    const auto index = EmbeddingIndex::build(docs);
    const auto clustering = kmeans_purpose(index, 2, 3);
    // one populated cluster, homogeneity zero
    std::size_t populated = 0;
    for (int c = 0; c < 2; ++c) {
        if (!clustering.members[c].empty()) {
            ++populated;
            CHECK(clustering.homogeneity[c] == doctest::Approx(0.0));
            CHECK(clustering.members[c].size() == 4);
        }
    }
    CHECK(populated == 1);
}

TEST_CASE("kmeans rejects more clusters than points") {
    Rng rng(9);
    std::vector<EncodedDoc> docs;
    for (int i = 0; i < 3; ++i) {
        docs.push_back(encoded(padded("p", i), random_unit(4, rng),
                               random_unit(4, rng)));
    }
    const auto index = EmbeddingIndex::build(docs);
    CHECK_THROWS_AS(kmeans_purpose(index, 4, 1), std::runtime_error);
}

TEST_CASE("euclidean and cosine assignment rules agree on unit vectors") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 30, dim = 6, k = 4;
        std::vector<Eigen::VectorXd> points;
        for (int i = 0; i < n; ++i) points.push_back(random_unit(dim, rng));
        std::vector<Eigen::VectorXd> centers;
        for (int c = 0; c < k; ++c) centers.push_back(random_unit(dim, rng));
        for (int i = 0; i < n; ++i) {
            int by_euclid = 0, by_cosine = 0;
            double best_d = (points[i] - centers[0]).squaredNorm();
            double best_s = points[i].dot(centers[0]);
            for (int c = 1; c < k; ++c) {
                const double d = (points[i] - centers[c]).squaredNorm();
                const double s = points[i].dot(centers[c]);
                if (d < best_d) {
                    best_d = d;
                    by_euclid = c;
                }
                if (s > best_s) {
                    best_s = s;
                    by_cosine = c;
                }
            }
            CHECK(by_euclid == by_cosine);
        }
    }
}

TEST_CASE("pick_seed_clusters prunes, ranks, and picks central seeds") {
    // Hand-built clustering over a hand-built index.
    Rng rng(13);
    std::vector<EncodedDoc> docs;
    const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0);
    // cluster 0: three points near e1; cluster 1: exactly min_pool points
    docs.push_back(encoded("a0", e1, random_unit(3, rng)));
    docs.push_back(encoded("a1", Eigen::Vector3d(0.9, 0.1, 0).normalized(),
                           random_unit(3, rng)));
    docs.push_back(encoded("a2", Eigen::Vector3d(0.9, 0, 0.1).normalized(),
                           random_unit(3, rng)));
    docs.push_back(encoded("b0", e2, random_unit(3, rng)));
    docs.push_back(encoded("b1", Eigen::Vector3d(0.1, 0.9, 0).normalized(),
                           random_unit(3, rng)));
    const auto index = EmbeddingIndex::build(docs);

    PurposeClustering clustering;
    clustering.k = 2;
    clustering.assignment = {0, 0, 0, 1, 1};
    clustering.centers.resize(2, 3);
    clustering.centers.row(0) = e1.transpose();
    clustering.centers.row(1) = e2.transpose();
    clustering.members = {{0, 1, 2}, {3, 4}};
    clustering.homogeneity = {0.1, 0.4};

    SUBCASE("clusters of exactly min_pool members are pruned") {
        const auto picks = pick_seed_clusters(index, clustering, 5, 2);
        REQUIRE(picks.size() == 1);
        CHECK(picks[0].cluster == 0);
        CHECK(picks[0].pool.size() == 2);
    }

    SUBCASE("most homogeneous cluster ranks first") {
        const auto picks = pick_seed_clusters(index, clustering, 5, 1);
        REQUIRE(picks.size() == 2);
        CHECK(picks[0].cluster == 0);  // homogeneity 0.1 before 0.4
        CHECK(picks[1].cluster == 1);
    }

    SUBCASE("a member coinciding with the center becomes the seed") {
        const auto picks = pick_seed_clusters(index, clustering, 1, 1);
        REQUIRE(!picks.empty());
        CHECK(picks[0].seed_id == "a0");
        CHECK(std::find(picks[0].pool.begin(), picks[0].pool.end(), "a0") ==
              picks[0].pool.end());
    }

    SUBCASE("ranking depends on homogeneity values, not cluster ids") {
        PurposeClustering relabeled = clustering;
        std::swap(relabeled.members[0], relabeled.members[1]);
        std::swap(relabeled.homogeneity[0], relabeled.homogeneity[1]);
        Eigen::RowVector3d r0 = relabeled.centers.row(0);
        relabeled.centers.row(0) = relabeled.centers.row(1);
        relabeled.centers.row(1) = r0;
        for (auto& a : relabeled.assignment) a = 1 - a;
        const auto before = pick_seed_clusters(index, clustering, 2, 1);
        const auto after = pick_seed_clusters(index, relabeled, 2, 1);
        REQUIRE(before.size() == after.size());
        for (std::size_t i = 0; i < before.size(); ++i) {
            CHECK(before[i].seed_id == after[i].seed_id);
        }
    }
}

TEST_CASE("maxmin_diversify selects dispersed mechanisms") {
    SUBCASE("m equal to the pool size selects everything") {
        Rng rng(17);
        std::vector<EncodedDoc> docs;
        for (int i = 0; i < 5; ++i) {
            docs.push_back(encoded(padded("p", i), random_unit(4, rng),
                                   random_unit(4, rng)));
        }
        const auto index = EmbeddingIndex::build(docs);
        std::vector<std::string> pool{"p001", "p002", "p003", "p004"};
        const auto set = maxmin_diversify(index, "p000", pool, 4);
        CHECK(std::set<std::string>(set.selected.begin(), set.selected.end()) ==
              std::set<std::string>(pool.begin(), pool.end()));
    }

    SUBCASE("square corners: a diagonal pair is chosen") {
        // mechanisms at the corners of a square in a 2-plane (all unit)
        const double s = 1.0 / std::sqrt(2.0);
        std::vector<EncodedDoc> docs{
            encoded("seed", Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(s, s, 0)),
            encoded("c00", Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0)),
            encoded("c01", Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 1, 0)),
            encoded("c10", Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(-1, 0, 0)),
            encoded("c11", Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, -1, 0)),
        };
        const auto index = EmbeddingIndex::build(docs);
        std::vector<std::string> pool{"c00", "c01", "c10", "c11"};
        const auto set = maxmin_diversify(index, "seed", pool, 2);
        REQUIRE(set.min_pairwise_distance);
        // brute force over all pairs: the diameter is an antipodal pair
        CHECK(*set.min_pairwise_distance ==
              doctest::Approx(brute_force_maxmin(index, pool, 2)).epsilon(1e-12));
        CHECK(*set.min_pairwise_distance == doctest::Approx(2.0).epsilon(1e-12));
    }

    SUBCASE("greedy achieves at least half the brute-force optimum") {
        // dims comparable to real mechanism embeddings; at very low dims
        // 1 - cos is far enough from a metric that the factor can dip
        Rng rng(19);
        for (int trial = 0; trial < 40; ++trial) {
            const int n = 5 + static_cast<int>(rng.below(8));  // pool size <= 12
            const int m = 2 + static_cast<int>(rng.below(3));  // M in [2, 4]
            const int dim = 16;
            std::vector<EncodedDoc> docs;
            docs.push_back(encoded("seed", random_unit(dim, rng),
                                   random_unit(dim, rng)));
            std::vector<std::string> pool;
            for (int i = 0; i < n; ++i) {
                const auto id = padded("c", i);
                pool.push_back(id);
                docs.push_back(encoded(id, random_unit(dim, rng),
                                       random_unit(dim, rng)));
            }
            const auto index = EmbeddingIndex::build(docs);
            if (n < m) continue;
            const auto set = maxmin_diversify(index, "seed", pool, m);
            REQUIRE(set.min_pairwise_distance);
            const double optimum = brute_force_maxmin(index, pool, m);
            CHECK(*set.min_pairwise_distance >= 0.5 * optimum);
        }
    }

    SUBCASE("a duplicate of a selected product is never chosen") {
        Rng rng(23);
        const int dim = 6;
        std::vector<EncodedDoc> docs;
        docs.push_back(encoded("seed", random_unit(dim, rng), random_unit(dim, rng)));
        std::vector<std::string> pool;
        for (int i = 0; i < 6; ++i) {
            const auto id = padded("c", i);
            pool.push_back(id);
            docs.push_back(
                encoded(id, random_unit(dim, rng), random_unit(dim, rng)));
        }
        auto index = EmbeddingIndex::build(docs);
        const auto base = maxmin_diversify(index, "seed", pool, 3);

        // duplicate vector of the first selected product under a fresh id
        auto dup_docs = docs;
        const int row = index.row_of(base.selected[0]);
        dup_docs.push_back(encoded("zzz-dup",
                                   index.purpose().row(row).transpose(),
                                   index.mechanism().row(row).transpose()));
        auto dup_pool = pool;
        dup_pool.push_back("zzz-dup");
        const auto dup_index = EmbeddingIndex::build(dup_docs);
        const auto with_dup = maxmin_diversify(dup_index, "seed", dup_pool, 3);
        CHECK(with_dup.selected == base.selected);
    }

    SUBCASE("a pool smaller than m is an error naming the size") {
        Rng rng(29);
        std::vector<EncodedDoc> docs{
            encoded("seed", random_unit(3, rng), random_unit(3, rng)),
            encoded("c1", random_unit(3, rng), random_unit(3, rng))};
        const auto index = EmbeddingIndex::build(docs);
        CHECK_THROWS_WITH_AS(maxmin_diversify(index, "seed", {"c1"}, 2),
                             doctest::Contains("1"), std::runtime_error);
    }
}

TEST_CASE("maxavg_diversify greedy variant") {
    SUBCASE("m = 1 picks the member farthest on average from the rest") {
        // three mechanisms: two close together, one far away
        std::vector<EncodedDoc> docs{
            encoded("a", Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0)),
            encoded("b", Eigen::Vector3d(0, 0, 1),
                    Eigen::Vector3d(0.99, 0.141, 0).normalized()),
            encoded("c", Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(-1, 0, 0)),
        };
        const auto index = EmbeddingIndex::build(docs);
        const auto picked = maxavg_diversify(index, {"a", "b", "c"}, 1);
        REQUIRE(picked.size() == 1);
        CHECK(picked[0] == "c");
    }

    SUBCASE("identical pool vectors select fine with zero dispersion") {
        std::vector<EncodedDoc> docs{
            encoded("a", Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)),
            encoded("b", Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)),
        };
        const auto index = EmbeddingIndex::build(docs);
        const auto picked = maxavg_diversify(index, {"a", "b"}, 2);
        CHECK(picked.size() == 2);
    }

    SUBCASE("greedy average is within factor 2 of brute force") {
        Rng rng(31);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 5 + static_cast<int>(rng.below(5));  // <= 10
            const int m = 2 + static_cast<int>(rng.below(2));  // 2..3
            std::vector<EncodedDoc> docs;
            std::vector<std::string> pool;
            for (int i = 0; i < n; ++i) {
                const auto id = padded("c", i);
                pool.push_back(id);
                docs.push_back(encoded(id, random_unit(6, rng),
                                       random_unit(6, rng)));
            }
            const auto index = EmbeddingIndex::build(docs);
            const auto picked = maxavg_diversify(index, pool, m);

            auto avg_of = [&](const std::vector<std::string>& sel) {
                double total = 0.0;
                for (std::size_t i = 0; i < sel.size(); ++i) {
                    for (std::size_t j = i + 1; j < sel.size(); ++j) {
                        total += mech_dist(index, sel[i], sel[j]);
                    }
                }
                return total / (sel.size() * (sel.size() - 1) / 2.0);
            };

            // brute force best average
            std::vector<int> pick(pool.size(), 0);
            std::fill(pick.begin(), pick.begin() + m, 1);
            std::sort(pick.begin(), pick.end());
            double best = 0.0;
            do {
                std::vector<std::string> sel;
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    if (pick[i]) sel.push_back(pool[i]);
                }
                best = std::max(best, avg_of(sel));
            } while (std::next_permutation(pick.begin(), pick.end()));

            CHECK(avg_of(picked) >= 0.5 * best - 1e-12);
        }
    }
}

TEST_CASE("generate_inspirations composes the pipeline") {
    SUBCASE("planted groups each supply one seed") {
        Rng rng(37);
        const auto index = planted_index(4, 12, 8, 0.03, rng);
        InspirationParams params;
        params.clusters = 4;
        params.max_seeds = 4;
        params.per_seed = 3;
        params.seed = 5;
        const auto reports = generate_inspirations(index, params);
        REQUIRE(reports.size() == 4);
        // seeds land in distinct planted groups (ids are grouped by 12)
        std::set<int> groups;
        for (const auto& r : reports) {
            groups.insert(index.row_of(r.seed_id) / 12);
            CHECK(r.inspirations.size() == 3);
            for (const auto& insp : r.inspirations) {
                CHECK(index.row_of(insp.id) / 12 == index.row_of(r.seed_id) / 12);
                CHECK(insp.purpose_similarity > 0.8);
            }
        }
        CHECK(groups.size() == 4);
    }

    SUBCASE("single seed with its mechanism-farthest cluster mate") {
        Rng rng(41);
        const auto index = planted_index(1, 6, 4, 0.02, rng);
        InspirationParams params;
        params.clusters = 1;
        params.max_seeds = 1;
        params.per_seed = 1;
        params.seed = 9;
        const auto reports = generate_inspirations(index, params);
        REQUIRE(reports.size() == 1);
        REQUIRE(reports[0].inspirations.size() == 1);
        // oracle: farthest mechanism from the seed among the pool
        const auto& r = reports[0];
        double best = -1.0;
        std::string best_id;
        for (const auto& id : index.ids()) {
            if (id == r.seed_id) continue;
            const double d = mech_dist(index, r.seed_id, id);
            if (d > best) {
                best = d;
                best_id = id;
            }
        }
        CHECK(r.inspirations[0].id == best_id);
    }

    SUBCASE("same seed reproduces the same reports") {
        Rng rng(43);
        const auto index = planted_index(3, 10, 6, 0.05, rng);
        InspirationParams params;
        params.clusters = 3;
        params.max_seeds = 3;
        params.per_seed = 4;
        params.seed = 11;
        const auto a = generate_inspirations(index, params);
        const auto b = generate_inspirations(index, params);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].seed_id == b[i].seed_id);
            REQUIRE(a[i].inspirations.size() == b[i].inspirations.size());
            for (std::size_t j = 0; j < a[i].inspirations.size(); ++j) {
                CHECK(a[i].inspirations[j].id == b[i].inspirations[j].id);
                CHECK(a[i].inspirations[j].mechanism_similarity ==
                      b[i].inspirations[j].mechanism_similarity);
            }
        }
    }
}
