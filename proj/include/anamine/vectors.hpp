#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "anamine/corpus.hpp"

namespace anamine {

// Pre-trained word-vector table plus corpus document-frequency statistics.
// Immutable after load + set_doc_frequencies; safe for concurrent reads.
class WordVectorStore {
public:
    int dim() const { return dim_; }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const Eigen::MatrixXd& matrix() const { return vecs_; }  // one row per token
    const Eigen::VectorXd& row_norms() const { return norms_; }

    bool has(const std::string& token) const { return index_.count(token) > 0; }
    int index_of(const std::string& token) const;  // -1 if absent
    Eigen::VectorXd vec(const std::string& token) const;

    long doc_count() const { return n_docs_; }
    long df(const std::string& token) const;  // 0 if unseen

    // idf(t) = ln((1 + N) / (1 + df(t))) + 1
    double idf(const std::string& token) const;

    // df over distinct tokens per document; covers every corpus token,
    // including ones without a vector.
    void set_doc_frequencies(const Corpus& corpus);
    void set_doc_frequencies(std::unordered_map<std::string, long> df, long n_docs);

    // One row per token; duplicate tokens keep the first row.
    static WordVectorStore from_rows(std::vector<std::string> tokens,
                                     Eigen::MatrixXd vecs);

private:
    int dim_ = 0;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
    Eigen::MatrixXd vecs_;
    Eigen::VectorXd norms_;
    std::unordered_map<std::string, long> df_;
    long n_docs_ = 0;
};

// Text format, one line per word: token then d space-separated reals.
// Dimension is inferred from the first line and enforced thereafter.
// With a filter, only tokens in the filter are kept.
WordVectorStore load_word_vectors(
    const std::filesystem::path& path,
    const std::optional<std::set<std::string>>& vocab_filter = std::nullopt);

void save_word_vectors(const WordVectorStore& store,
                       const std::filesystem::path& path);

// weight(t) = tf(t) * idf(t) with tf the raw count in the sequence.
std::unordered_map<std::string, double> tfidf_weights(
    const std::vector<std::string>& tokens, const WordVectorStore& store);

struct WeightedToken {
    std::string token;
    double weight = 0.0;
};

struct Target {
    Eigen::VectorXd vec;  // unit norm
    std::vector<WeightedToken> contributing;  // <= top_d tokens, weight desc
};

enum class AnnotationLabel { purpose, mechanism };

// Builds the supervision target for one label: concatenates (with
// multiplicity across annotators) every token flagged 1, takes the top_d
// distinct tokens with highest TF-IDF weight that have a vector, and
// returns the weight-weighted average of their vectors, unit-normalized.
// Returns nullopt when no flagged token has a vector (untargetable).
std::optional<Target> build_target(const AnnotationSet& annotations,
                                   const ProductDoc& doc,
                                   AnnotationLabel label,
                                   const WordVectorStore& store,
                                   int top_d = 5);

struct TargetPair {
    std::string product_id;
    Target purpose;
    Target mechanism;
};

// nullopt if either side is untargetable.
std::optional<TargetPair> build_target_pair(const AnnotationSet& annotations,
                                            const ProductDoc& doc,
                                            const WordVectorStore& store,
                                            int top_d = 5);

void save_targets(const std::vector<TargetPair>& targets,
                  const std::filesystem::path& path);
std::vector<TargetPair> load_targets(const std::filesystem::path& path);

// Rows of GloVe-style vectors for a token sequence, in order; tokens
// without a vector are skipped; at most max_len rows. nullopt when no
// token has a vector.
std::optional<Eigen::MatrixXd> token_vector_sequence(
    const std::vector<std::string>& tokens, const WordVectorStore& store,
    int max_len = 200);

}  // namespace anamine
