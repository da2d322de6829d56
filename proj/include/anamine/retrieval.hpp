#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anamine/corpus.hpp"
#include "anamine/encoder.hpp"
#include "anamine/vectors.hpp"

namespace anamine {

// Normalized purpose/mechanism vectors for a corpus, one row per product.
class EmbeddingIndex {
public:
    static EmbeddingIndex build(const std::vector<EncodedDoc>& docs);

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const Eigen::MatrixXd& purpose() const { return purpose_; }
    const Eigen::MatrixXd& mechanism() const { return mechanism_; }
    int row_of(const std::string& id) const;  // -1 if absent
    int dim() const { return static_cast<int>(purpose_.cols()); }

private:
    std::vector<std::string> ids_;
    Eigen::MatrixXd purpose_;
    Eigen::MatrixXd mechanism_;
    std::unordered_map<std::string, int> row_;
};

// Dot product of unit vectors; throws if either norm deviates from 1 by
// more than 1e-6. distance(u, v) = 1 - similarity(u, v).
double similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct RankedCandidate {
    std::string id;
    double purpose_distance = 0.0;
    double mechanism_distance = 0.0;
};

struct QueryResult {
    std::vector<RankedCandidate> candidates;  // primary distance ascending
    bool constraint_unsatisfiable = false;    // nothing met the threshold
};

struct SeedVectors {
    Eigen::VectorXd purpose;    // unit norm
    Eigen::VectorXd mechanism;  // unit norm
};

// Candidates with mechanism distance >= min_mechanism_distance, ranked by
// purpose distance ascending (ties by id). The seed row is excluded.
QueryResult query_same_purpose_diff_mechanism(const EmbeddingIndex& index,
                                              const std::string& seed_id,
                                              double min_mechanism_distance);
QueryResult query_same_purpose_diff_mechanism(const EmbeddingIndex& index,
                                              const SeedVectors& seed,
                                              double min_mechanism_distance);

// Mirror image: rank by mechanism distance subject to purpose distance
// >= min_purpose_distance.
QueryResult query_same_mechanism_diff_purpose(const EmbeddingIndex& index,
                                              const std::string& seed_id,
                                              double min_purpose_distance);
QueryResult query_same_mechanism_diff_purpose(const EmbeddingIndex& index,
                                              const SeedVectors& seed,
                                              double min_purpose_distance);

enum class Representation { purpose, mechanism, concat };

// Unordered pair with a.id < b.id.
struct ScoredPair {
    std::string a, b;
    double score = 0.0;
};

// All n(n-1)/2 pair similarities. For concat, each product's [p; m] vector
// is renormalized to unit length before the dot products.
std::vector<ScoredPair> pair_scores(const EmbeddingIndex& index,
                                    Representation repr);

struct SearchLogEntry {
    std::string seed_id;
    std::vector<std::string> results;  // rank order
    std::vector<std::vector<std::string>> worker_matches;  // one set per worker
};

enum class LabelProvenance { matched, implicitly_rejected };

struct AnalogyPairLabel {
    std::string seed_id;
    std::string candidate_id;
    bool positive = false;
    LabelProvenance provenance = LabelProvenance::matched;
};

// Positives: results tagged by a strict majority of the entry's workers.
// Negatives: untagged results ranked above the lowest-ranked match, within
// the top 5. Pairs labeled both ways across entries resolve to positive.
std::vector<AnalogyPairLabel> build_labels_from_search_log(
    const std::vector<SearchLogEntry>& entries);

std::vector<SearchLogEntry> load_search_log(const std::filesystem::path& path);
std::vector<AnalogyPairLabel> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<AnalogyPairLabel>& labels,
                 const std::filesystem::path& path);

struct SearchHit {
    std::string id;
    int score = 0;  // distinct matching terms after lemma expansion
};

// Word-matching search: bags of tokens expanded with lemmas on both sides,
// ranked by number of distinct matching terms, ties by product id.
std::vector<SearchHit> keyword_search(const std::vector<std::string>& query,
                                      const Corpus& corpus);

// Lemma variants of a token (the token itself first): a small exception
// list of irregular forms plus suffix-stripping rules.
std::vector<std::string> lemma_variants(const std::string& token);

struct RankingResult {
    std::string method;
    std::vector<ScoredPair> ranked;        // labeled pairs, score descending
    std::vector<double> levels_percent;    // e.g. {1, 5, 10, 15, 20, 25}
    std::vector<double> precision;
    std::vector<double> recall;
};

// Precision/recall of positive labels among the top ceil(level/100 * n)
// scored label pairs. Every labeled pair must be scored; >= 1 positive
// label required.
RankingResult evaluate(const std::vector<AnalogyPairLabel>& labels,
                       const std::vector<ScoredPair>& scores,
                       const std::vector<double>& levels_percent =
                           {1, 5, 10, 15, 20, 25},
                       const std::string& method = "");

enum class BaselineMethod { tfidf_cosine, glove_tfidf_avg, glove_tfidf_top5 };

// Surface-similarity baselines over all corpus pairs.
std::vector<ScoredPair> baseline_scores(const Corpus& corpus,
                                        const WordVectorStore& store,
                                        BaselineMethod method);

std::string to_string(BaselineMethod method);
std::string to_string(Representation repr);

}  // namespace anamine
