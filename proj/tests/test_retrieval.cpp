#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "anamine/retrieval.hpp"
#include "anamine/rng.hpp"
#include "test_util.hpp"

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

EmbeddingIndex random_index(int n, int dim, Rng& rng) {
    std::vector<EncodedDoc> docs;
    for (int i = 0; i < n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "p%03d", i);
        docs.push_back(encoded(buf, random_unit(dim, rng), random_unit(dim, rng)));
    }
    return EmbeddingIndex::build(docs);
}

// Exhaustive-scan oracle for the constrained queries.
std::vector<std::string> oracle_query(const EmbeddingIndex& index,
                                      const std::string& seed_id, double tau,
                                      bool purpose_primary) {
    const int seed = index.row_of(seed_id);
    const auto& primary = purpose_primary ? index.purpose() : index.mechanism();
    const auto& constraint = purpose_primary ? index.mechanism() : index.purpose();
    std::vector<std::pair<double, std::string>> kept;
    for (int i = 0; i < static_cast<int>(index.size()); ++i) {
        if (i == seed) continue;
        const double cdist = 1.0 - constraint.row(i).dot(constraint.row(seed));
        if (cdist < tau) continue;
        const double pdist = 1.0 - primary.row(i).dot(primary.row(seed));
        kept.push_back({pdist, index.ids()[static_cast<std::size_t>(i)]});
    }
    std::sort(kept.begin(), kept.end());
    std::vector<std::string> ids;
    for (auto& [d, id] : kept) ids.push_back(id);
    return ids;
}

}  // namespace

TEST_CASE("similarity and distance on unit vectors") {
    Eigen::Vector3d u(1, 0, 0), v(0, 1, 0);
    CHECK(similarity(u, u) == doctest::Approx(1.0));
    CHECK(distance(u, u) == doctest::Approx(0.0));
    CHECK(similarity(u, v) == doctest::Approx(0.0));
    CHECK(distance(u, v) == doctest::Approx(1.0));
    CHECK(similarity(u, Eigen::Vector3d(-1, 0, 0)) == doctest::Approx(-1.0));
    CHECK(distance(u, Eigen::Vector3d(-1, 0, 0)) == doctest::Approx(2.0));
    CHECK_THROWS_AS(similarity(u, Eigen::Vector3d(0.5, 0, 0)), std::runtime_error);
    CHECK_THROWS_AS(similarity(Eigen::Vector3d(2, 0, 0), u), std::runtime_error);
}

TEST_CASE("embedding index validates rows") {
    std::vector<EncodedDoc> docs{
        encoded("a", Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1))};
    auto broken = docs;
    broken[0].purpose_unit = Eigen::Vector2d(0.5, 0);
    CHECK_THROWS_AS(EmbeddingIndex::build(broken), std::runtime_error);
    auto dup = docs;
    dup.push_back(docs[0]);
    CHECK_THROWS_AS(EmbeddingIndex::build(dup), std::runtime_error);
    const auto index = EmbeddingIndex::build(docs);
    CHECK(index.row_of("a") == 0);
    CHECK(index.row_of("zz") == -1);
}

TEST_CASE("constrained queries on a hand-set toy index") {
    // purpose: a and b aligned, c off-axis; mechanism: a and b identical,
    // c orthogonal to both
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<EncodedDoc> docs{
        encoded("a", Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 0, 1)),
        encoded("b", Eigen::Vector3d(s, s, 0), Eigen::Vector3d(0, 0, 1)),
        encoded("c", Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 1, 0)),
    };
    const auto index = EmbeddingIndex::build(docs);

    SUBCASE("threshold zero is a plain nearest-purpose ranking") {
        const auto result = query_same_purpose_diff_mechanism(index, "a", 0.0);
        REQUIRE(result.candidates.size() == 2);
        CHECK(result.candidates[0].id == "b");
        CHECK(result.candidates[1].id == "c");
        CHECK_FALSE(result.constraint_unsatisfiable);
    }

    SUBCASE("mechanism threshold filters the identical-mechanism candidate") {
        const auto result = query_same_purpose_diff_mechanism(index, "a", 0.5);
        REQUIRE(result.candidates.size() == 1);
        CHECK(result.candidates[0].id == "c");
        CHECK(result.candidates[0].mechanism_distance >= 0.5);
    }

    SUBCASE("impossible threshold reports unsatisfiable") {
        const auto result = query_same_purpose_diff_mechanism(index, "a", 2.0 + 1e-9);
        CHECK(result.candidates.empty());
        CHECK(result.constraint_unsatisfiable);
    }

    SUBCASE("mirror query ranks by mechanism distance") {
        const auto result = query_same_mechanism_diff_purpose(index, "a", 0.0);
        REQUIRE(result.candidates.size() == 2);
        CHECK(result.candidates[0].id == "b");  // same mechanism
        CHECK(result.candidates[0].mechanism_distance == doctest::Approx(0.0));
    }

    SUBCASE("missing seed without vectors is an error") {
        CHECK_THROWS_AS(query_same_purpose_diff_mechanism(index, "nope", 0.1),
                        std::runtime_error);
    }

    SUBCASE("explicit seed vectors work for products outside the index") {
        SeedVectors seed{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 0, 1)};
        const auto result = query_same_purpose_diff_mechanism(index, seed, 0.5);
        REQUIRE(!result.candidates.empty());
        CHECK(result.candidates[0].id == "c");
    }
}

TEST_CASE("queries match an exhaustive-scan oracle and honor constraints") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        const auto index = random_index(20, 6, rng);
        const std::string seed = index.ids()[rng.below(index.size())];
        const double tau = rng.uniform(0.0, 1.5);

        const auto eq1 = query_same_purpose_diff_mechanism(index, seed, tau);
        std::vector<std::string> got;
        for (const auto& c : eq1.candidates) {
            got.push_back(c.id);
            CHECK(c.mechanism_distance >= tau);
        }
        CHECK(got == oracle_query(index, seed, tau, true));

        const auto eq2 = query_same_mechanism_diff_purpose(index, seed, tau);
        got.clear();
        for (const auto& c : eq2.candidates) {
            got.push_back(c.id);
            CHECK(c.purpose_distance >= tau);
        }
        CHECK(got == oracle_query(index, seed, tau, false));
    }
}

TEST_CASE("relaxing the threshold never shrinks the result set") {
    Rng rng(405);
    const auto index = random_index(15, 5, rng);
    const std::string seed = index.ids()[0];
    std::size_t prev = 0;
    for (double tau : {1.2, 0.8, 0.4, 0.0}) {
        const auto result = query_same_purpose_diff_mechanism(index, seed, tau);
        CHECK(result.candidates.size() >= prev);
        prev = result.candidates.size();
    }
}

TEST_CASE("pair_scores covers all unordered pairs") {
    Rng rng(406);
    const auto index = random_index(3, 4, rng);

    SUBCASE("three products give three pairs") {
        CHECK(pair_scores(index, Representation::purpose).size() == 3);
    }

    SUBCASE("identical concat vectors score 1") {
        const Eigen::Vector2d p(1, 0), m(0, 1);
        const auto idx = EmbeddingIndex::build({encoded("a", p, m), encoded("b", p, m)});
        const auto scores = pair_scores(idx, Representation::concat);
        REQUIRE(scores.size() == 1);
        CHECK(scores[0].score == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("concat similarity is the mean of the two similarities") {
        const auto purpose = pair_scores(index, Representation::purpose);
        const auto mechanism = pair_scores(index, Representation::mechanism);
        const auto concat = pair_scores(index, Representation::concat);
        for (std::size_t i = 0; i < concat.size(); ++i) {
            CHECK(concat[i].score ==
                  doctest::Approx((purpose[i].score + mechanism[i].score) / 2.0)
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("search-log labels follow the implicit-rejection rule") {
    SUBCASE("untagged results above the match become negatives") {
        SearchLogEntry e{"s", {"a", "b", "c", "d", "e", "f"}, {{"c"}}};
        const auto labels = build_labels_from_search_log({e});
        std::map<std::string, bool> got;
        for (const auto& l : labels) got[l.candidate_id] = l.positive;
        REQUIRE(got.size() == 3);
        CHECK(got.at("c"));
        CHECK_FALSE(got.at("a"));
        CHECK_FALSE(got.at("b"));
    }

    SUBCASE("a match at rank 1 yields no negatives") {
        SearchLogEntry e{"s", {"a", "b", "c"}, {{"a"}}};
        const auto labels = build_labels_from_search_log({e});
        REQUIRE(labels.size() == 1);
        CHECK(labels[0].positive);
        CHECK(labels[0].candidate_id == "a");
    }

    SUBCASE("negatives stop at the top-5 cap") {
        SearchLogEntry e{"s", {"a", "b", "c", "d", "e", "f"}, {{"f"}}};
        const auto labels = build_labels_from_search_log({e});
        std::size_t negatives = 0;
        for (const auto& l : labels) {
            if (!l.positive) {
                ++negatives;
                CHECK(l.provenance == LabelProvenance::implicitly_rejected);
            }
        }
        CHECK(negatives == 5);
        REQUIRE(labels.size() == 6);
    }

    SUBCASE("majority vote across workers decides the matches") {
        SearchLogEntry e{"s", {"a", "b", "c"}, {{"b"}, {"b", "c"}, {}}};
        const auto labels = build_labels_from_search_log({e});
        // b has 2 of 3 votes, c only 1
        std::map<std::string, bool> got;
        for (const auto& l : labels) got[l.candidate_id] = l.positive;
        CHECK(got.at("b"));
        CHECK_FALSE(got.at("a"));
        CHECK(got.count("c") == 0);
    }

    SUBCASE("conflicting evidence across entries resolves to positive") {
        SearchLogEntry e1{"s", {"x", "t"}, {{"t"}}};   // x implicitly rejected
        SearchLogEntry e2{"x", {"s"}, {{"s"}}};        // (x, s) tagged a match
        const auto labels = build_labels_from_search_log({e1, e2});
        std::size_t found = 0;
        for (const auto& l : labels) {
            const bool is_sx = (l.seed_id == "s" && l.candidate_id == "x") ||
                               (l.seed_id == "x" && l.candidate_id == "s");
            if (is_sx) {
                ++found;
                CHECK(l.positive);
                CHECK(l.provenance == LabelProvenance::matched);
            }
        }
        CHECK(found == 1);
    }

    SUBCASE("empty result lists are skipped") {
        SearchLogEntry e{"s", {}, {{"a"}}};
        CHECK(build_labels_from_search_log({e}).empty());
    }
}

TEST_CASE("labels JSONL round-trips and rejects duplicates") {
    testutil::TempDir tmp;
    std::vector<AnalogyPairLabel> labels{
        {"a", "b", true, LabelProvenance::matched},
        {"a", "c", false, LabelProvenance::implicitly_rejected}};
    save_labels(labels, tmp.file("l.jsonl"));
    const auto loaded = load_labels(tmp.file("l.jsonl"));
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].positive);
    CHECK(loaded[1].provenance == LabelProvenance::implicitly_rejected);

    testutil::write_file(
        tmp.file("dup.jsonl"),
        "{\"seed_id\":\"a\",\"candidate_id\":\"b\",\"label\":\"positive\"}\n"
        "{\"seed_id\":\"b\",\"candidate_id\":\"a\",\"label\":\"negative\"}\n");
    CHECK_THROWS_WITH_AS(load_labels(tmp.file("dup.jsonl")),
                         doctest::Contains("duplicate"), std::runtime_error);
}

TEST_CASE("keyword search expands lemmas and ranks by matching terms") {
    Corpus corpus;
    auto add = [&](const std::string& id, const std::string& text) {
        ProductDoc doc;
        doc.id = id;
        doc.text = text;
        doc.tokens = tokenize(text);
        corpus.add(std::move(doc));
    };
    add("p1", "dog leash with pouch");
    add("p2", "cat bowl");
    add("p3", "dog bowl water dispenser");

    SUBCASE("plural query matches singular document tokens") {
        const auto hits = keyword_search({"dogs"}, corpus);
        REQUIRE(hits.size() == 2);
        CHECK(hits[0].id == "p1");
        CHECK(hits[1].id == "p3");
    }

    SUBCASE("more matching terms ranks higher, ties by id") {
        const auto hits = keyword_search({"dog", "bowl", "water"}, corpus);
        REQUIRE(hits.size() == 3);
        CHECK(hits[0].id == "p3");  // 3 terms
        CHECK(hits[1].id == "p1");  // 1 term, id before p2
        CHECK(hits[2].id == "p2");  // 1 term
    }

    SUBCASE("empty query is an error") {
        CHECK_THROWS_AS(keyword_search({}, corpus), std::runtime_error);
    }

    SUBCASE("lemma variants cover the documented rule classes") {
        auto has = [](const std::vector<std::string>& v, const std::string& s) {
            return std::find(v.begin(), v.end(), s) != v.end();
        };
        CHECK(has(lemma_variants("dogs"), "dog"));
        CHECK(has(lemma_variants("bodies"), "body"));
        CHECK(has(lemma_variants("boxes"), "box"));
        CHECK(has(lemma_variants("children"), "child"));
        CHECK(has(lemma_variants("making"), "make"));
        CHECK(has(lemma_variants("running"), "run"));
        CHECK(has(lemma_variants("inflated"), "inflate"));
        CHECK(has(lemma_variants("dog"), "dog"));
    }
}

TEST_CASE("evaluate computes precision and recall at levels") {
    // 10 labeled pairs, 4 positive; scores put 3 positives in the top 5
    std::vector<AnalogyPairLabel> labels;
    std::vector<ScoredPair> scores;
    const bool positive[10] = {true, true, false, true, false,
                               false, false, true, false, false};
    for (int i = 0; i < 10; ++i) {
        const std::string a = "s", b = "t" + std::to_string(i);
        labels.push_back({a, b, positive[i],
                          positive[i] ? LabelProvenance::matched
                                      : LabelProvenance::implicitly_rejected});
        scores.push_back({a, b, 10.0 - i});
    }

    SUBCASE("hand-computed fixture at top-50%") {
        const auto result = evaluate(labels, scores, {50.0}, "fixture");
        REQUIRE(result.precision.size() == 1);
        CHECK(result.precision[0] == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(result.recall[0] == doctest::Approx(0.75).epsilon(1e-15));
    }

    SUBCASE("perfect scorer reaches precision 1 at the positive count") {
        std::vector<ScoredPair> perfect;
        for (int i = 0; i < 10; ++i) {
            perfect.push_back({"s", "t" + std::to_string(i),
                               positive[i] ? 1.0 : 0.0});
        }
        const auto result = evaluate(labels, perfect, {40.0}, "perfect");
        CHECK(result.precision[0] == doctest::Approx(1.0));
        CHECK(result.recall[0] == doctest::Approx(1.0));
    }

    SUBCASE("input order does not change the metrics") {
        auto shuffled_labels = labels;
        std::reverse(shuffled_labels.begin(), shuffled_labels.end());
        auto shuffled_scores = scores;
        std::reverse(shuffled_scores.begin(), shuffled_scores.end());
        const auto a = evaluate(labels, scores, {10.0, 50.0, 100.0});
        const auto b = evaluate(shuffled_labels, shuffled_scores, {10.0, 50.0, 100.0});
        CHECK(a.precision == b.precision);
        CHECK(a.recall == b.recall);
    }

    SUBCASE("swapped pair orientation still finds the score") {
        auto swapped = labels;
        std::swap(swapped[0].seed_id, swapped[0].candidate_id);
        const auto result = evaluate(swapped, scores, {50.0});
        CHECK(result.precision[0] == doctest::Approx(0.6));
    }

    SUBCASE("recall is monotone in the level") {
        Rng rng(500);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<AnalogyPairLabel> ls;
            std::vector<ScoredPair> ss;
            const int n = 5 + static_cast<int>(rng.below(30));
            bool any_positive = false;
            for (int i = 0; i < n; ++i) {
                const bool pos = rng.uniform() < 0.4 || (!any_positive && i == n - 1);
                any_positive = any_positive || pos;
                ls.push_back({"s", "t" + std::to_string(i), pos,
                              LabelProvenance::matched});
                ss.push_back({"s", "t" + std::to_string(i), rng.uniform()});
            }
            const auto result = evaluate(ls, ss, {5, 20, 40, 60, 80, 100});
            for (std::size_t i = 1; i < result.recall.size(); ++i) {
                CHECK(result.recall[i] >= result.recall[i - 1]);
                CHECK(result.precision[i] >= 0.0);
                CHECK(result.precision[i] <= 1.0);
            }
            CHECK(result.recall.back() == doctest::Approx(1.0));
        }
    }

    SUBCASE("zero positives and missing scores are errors") {
        std::vector<AnalogyPairLabel> negs{{"a", "b", false, LabelProvenance::matched}};
        std::vector<ScoredPair> s{{"a", "b", 1.0}};
        CHECK_THROWS_AS(evaluate(negs, s, {50.0}), std::runtime_error);
        std::vector<AnalogyPairLabel> pos{{"a", "z", true, LabelProvenance::matched}};
        CHECK_THROWS_AS(evaluate(pos, s, {50.0}), std::runtime_error);
    }
}

TEST_CASE("surface baselines score document pairs") {
    Corpus corpus;
    auto add = [&](const std::string& id, const std::string& text) {
        ProductDoc doc;
        doc.id = id;
        doc.text = text;
        doc.tokens = tokenize(text);
        corpus.add(std::move(doc));
    };
    add("a", "dog bowl");
    add("b", "dog bowl");
    add("c", "cat leash");

    Eigen::MatrixXd rows(4, 3);
    rows << 1, 0, 0,
            0, 1, 0,
            0, 0, 1,
            0.5, 0.5, 0;
    auto store = WordVectorStore::from_rows({"dog", "bowl", "cat", "leash"}, rows);
    store.set_doc_frequencies(corpus);

    for (auto method : {BaselineMethod::tfidf_cosine, BaselineMethod::glove_tfidf_avg,
                        BaselineMethod::glove_tfidf_top5}) {
        const auto scores = baseline_scores(corpus, store, method);
        REQUIRE(scores.size() == 3);
        std::map<std::pair<std::string, std::string>, double> by_pair;
        for (const auto& sp : scores) by_pair[{sp.a, sp.b}] = sp.score;
        // identical documents are maximally similar
        CHECK(by_pair.at({"a", "b"}) == doctest::Approx(1.0).epsilon(1e-12));
        if (method == BaselineMethod::tfidf_cosine) {
            // disjoint vocabularies are orthogonal
            CHECK(by_pair.at({"a", "c"}) == doctest::Approx(0.0));
        }
    }

    SUBCASE("tfidf-cosine matches a hand-built dense computation") {
        const auto scores =
            baseline_scores(corpus, store, BaselineMethod::tfidf_cosine);
        // independent route: dense vectors over the sorted vocabulary union
        std::vector<std::string> vocab{"bowl", "cat", "dog", "leash"};
        auto dense = [&](const ProductDoc& doc) {
            std::vector<double> v(vocab.size(), 0.0);
            for (std::size_t i = 0; i < vocab.size(); ++i) {
                double tf = 0;
                for (const auto& t : doc.tokens) {
                    if (t == vocab[i]) tf += 1;
                }
                v[i] = tf * (std::log((1.0 + 3.0) / (1.0 + store.df(vocab[i]))) + 1.0);
            }
            return v;
        };
        auto cosine = [](const std::vector<double>& x, const std::vector<double>& y) {
            double dot = 0, nx = 0, ny = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                dot += x[i] * y[i];
                nx += x[i] * x[i];
                ny += y[i] * y[i];
            }
            return dot / std::sqrt(nx * ny);
        };
        std::map<std::pair<std::string, std::string>, double> by_pair;
        for (const auto& sp : scores) by_pair[{sp.a, sp.b}] = sp.score;
        const auto& docs = corpus.docs();
        for (std::size_t i = 0; i < docs.size(); ++i) {
            for (std::size_t j = i + 1; j < docs.size(); ++j) {
                CHECK(by_pair.at({docs[i].id, docs[j].id}) ==
                      doctest::Approx(cosine(dense(docs[i]), dense(docs[j])))
                          .epsilon(1e-12));
            }
        }
    }
}
