#include "anamine/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "anamine/io.hpp"

namespace anamine {

int WordVectorStore::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
}

Eigen::VectorXd WordVectorStore::vec(const std::string& token) const {
    const int i = index_of(token);
    if (i < 0) {
        throw std::runtime_error("no vector for token: " + token);
    }
    return vecs_.row(i).transpose();
}

long WordVectorStore::df(const std::string& token) const {
    auto it = df_.find(token);
    return it == df_.end() ? 0 : it->second;
}

double WordVectorStore::idf(const std::string& token) const {
    return std::log((1.0 + static_cast<double>(n_docs_)) /
                    (1.0 + static_cast<double>(df(token)))) +
           1.0;
}

void WordVectorStore::set_doc_frequencies(const Corpus& corpus) {
    std::unordered_map<std::string, long> df;
    for (const auto& doc : corpus.docs()) {
        std::set<std::string> seen(doc.tokens.begin(), doc.tokens.end());
        for (const auto& t : seen) ++df[t];
    }
    set_doc_frequencies(std::move(df), static_cast<long>(corpus.size()));
}

void WordVectorStore::set_doc_frequencies(std::unordered_map<std::string, long> df,
                                          long n_docs) {
    for (const auto& [token, count] : df) {
        if (count < 1 || count > n_docs) {
            throw std::runtime_error("document frequency of \"" + token +
                                     "\" out of range: " + std::to_string(count) +
                                     " (corpus size " + std::to_string(n_docs) + ")");
        }
    }
    df_ = std::move(df);
    n_docs_ = n_docs;
}

WordVectorStore WordVectorStore::from_rows(std::vector<std::string> tokens,
                                           Eigen::MatrixXd vecs) {
    if (tokens.size() != static_cast<std::size_t>(vecs.rows()) || tokens.empty()) {
        throw std::runtime_error("word-vector table is empty or misshapen");
    }
    WordVectorStore store;
    store.dim_ = static_cast<int>(vecs.cols());

    std::vector<int> keep;
    keep.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (store.index_.count(tokens[i])) continue;  // first occurrence wins
        store.index_[tokens[i]] = static_cast<int>(keep.size());
        keep.push_back(static_cast<int>(i));
    }
    store.tokens_.reserve(keep.size());
    store.vecs_.resize(static_cast<int>(keep.size()), store.dim_);
    store.norms_.resize(static_cast<int>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        store.tokens_.push_back(std::move(tokens[static_cast<std::size_t>(keep[r])]));
        store.vecs_.row(static_cast<int>(r)) = vecs.row(keep[r]);
        store.norms_(static_cast<int>(r)) = vecs.row(keep[r]).norm();
    }
    return store;
}

WordVectorStore load_word_vectors(
    const std::filesystem::path& path,
    const std::optional<std::set<std::string>>& vocab_filter) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open word-vector file: " + path.string());
    }

    std::vector<std::string> kept_tokens;
    std::vector<std::vector<double>> kept_rows;
    int dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        std::vector<double> coords;
        double x;
        while (ss >> x) coords.push_back(x);
        if (token.empty() || coords.empty()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed vector line");
        }
        if (dim == 0) {
            dim = static_cast<int>(coords.size());
        } else if (static_cast<int>(coords.size()) != dim) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(dim) +
                                     " coordinates, got " +
                                     std::to_string(coords.size()));
        }
        if (vocab_filter && !vocab_filter->count(token)) continue;
        kept_tokens.push_back(std::move(token));
        kept_rows.push_back(std::move(coords));
    }
    if (kept_tokens.empty()) {
        throw std::runtime_error("no usable word vectors in " + path.string());
    }

    Eigen::MatrixXd vecs(kept_tokens.size(), dim);
    for (std::size_t i = 0; i < kept_rows.size(); ++i) {
        for (int j = 0; j < dim; ++j) vecs(static_cast<int>(i), j) = kept_rows[i][j];
    }
    return WordVectorStore::from_rows(std::move(kept_tokens), std::move(vecs));
}

void save_word_vectors(const WordVectorStore& store,
                       const std::filesystem::path& path) {
    std::ostringstream out;
    for (std::size_t i = 0; i < store.size(); ++i) {
        out << store.tokens()[i];
        for (int j = 0; j < store.dim(); ++j) {
            out << ' ' << format_double(store.matrix()(static_cast<int>(i), j));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

std::unordered_map<std::string, double> tfidf_weights(
    const std::vector<std::string>& tokens, const WordVectorStore& store) {
    std::unordered_map<std::string, double> tf;
    for (const auto& t : tokens) tf[t] += 1.0;
    std::unordered_map<std::string, double> weights;
    for (const auto& [token, count] : tf) {
        weights[token] = count * store.idf(token);
    }
    return weights;
}

std::optional<Target> build_target(const AnnotationSet& annotations,
                                   const ProductDoc& doc,
                                   AnnotationLabel label,
                                   const WordVectorStore& store,
                                   int top_d) {
    if (annotations.records.empty()) {
        throw std::runtime_error("no annotators for product " + doc.id);
    }
    if (top_d < 1) {
        throw std::runtime_error("top_d must be >= 1");
    }

    // Concatenate flagged tokens across annotators; multiplicity raises tf.
    std::vector<std::string> flagged;
    for (const auto& rec : annotations.records) {
        const auto& flags = label == AnnotationLabel::purpose ? rec.purpose_flags
                                                              : rec.mechanism_flags;
        if (flags.size() != doc.tokens.size()) {
            throw std::runtime_error("flag vector length mismatch for product " +
                                     doc.id);
        }
        for (std::size_t t = 0; t < flags.size(); ++t) {
            if (flags[t]) flagged.push_back(doc.tokens[t]);
        }
    }

    const auto weights = tfidf_weights(flagged, store);

    std::vector<WeightedToken> in_vocab;
    for (const auto& [token, w] : weights) {
        if (store.has(token)) in_vocab.push_back({token, w});
    }
    if (in_vocab.empty()) return std::nullopt;  // untargetable

    std::sort(in_vocab.begin(), in_vocab.end(),
              [](const WeightedToken& a, const WeightedToken& b) {
                  if (a.weight != b.weight) return a.weight > b.weight;
                  return a.token < b.token;
              });
    if (static_cast<int>(in_vocab.size()) > top_d) {
        in_vocab.resize(static_cast<std::size_t>(top_d));
    }

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(store.dim());
    for (const auto& wt : in_vocab) {
        sum += wt.weight * store.vec(wt.token);
    }
    const double norm = sum.norm();
    if (norm < 1e-12) return std::nullopt;  // degenerate cancellation

    Target target;
    target.vec = sum / norm;
    target.contributing = std::move(in_vocab);
    return target;
}

std::optional<TargetPair> build_target_pair(const AnnotationSet& annotations,
                                            const ProductDoc& doc,
                                            const WordVectorStore& store,
                                            int top_d) {
    auto p = build_target(annotations, doc, AnnotationLabel::purpose, store, top_d);
    if (!p) return std::nullopt;
    auto m = build_target(annotations, doc, AnnotationLabel::mechanism, store, top_d);
    if (!m) return std::nullopt;
    TargetPair pair;
    pair.product_id = doc.id;
    pair.purpose = std::move(*p);
    pair.mechanism = std::move(*m);
    return pair;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
    return v;
}

json tokens_to_json(const std::vector<WeightedToken>& tokens) {
    json arr = json::array();
    for (const auto& wt : tokens) {
        arr.push_back({{"token", wt.token}, {"weight", wt.weight}});
    }
    return arr;
}

std::vector<WeightedToken> tokens_from_json(const json& arr) {
    std::vector<WeightedToken> out;
    for (const auto& e : arr) {
        out.push_back({e.at("token").get<std::string>(), e.at("weight").get<double>()});
    }
    return out;
}

}  // namespace

void save_targets(const std::vector<TargetPair>& targets,
                  const std::filesystem::path& path) {
    std::vector<json> rows;
    rows.reserve(targets.size());
    for (const auto& t : targets) {
        json row;
        row["product_id"] = t.product_id;
        row["p"] = vector_to_json(t.purpose.vec);
        row["m"] = vector_to_json(t.mechanism.vec);
        row["p_tokens"] = tokens_to_json(t.purpose.contributing);
        row["m_tokens"] = tokens_to_json(t.mechanism.contributing);
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

std::vector<TargetPair> load_targets(const std::filesystem::path& path) {
    std::vector<TargetPair> out;
    for_each_jsonl(path, [&](std::size_t line_no, const json& obj) {
        try {
            TargetPair t;
            t.product_id = obj.at("product_id").get<std::string>();
            t.purpose.vec = vector_from_json(obj.at("p"));
            t.mechanism.vec = vector_from_json(obj.at("m"));
            t.purpose.contributing = tokens_from_json(obj.at("p_tokens"));
            t.mechanism.contributing = tokens_from_json(obj.at("m_tokens"));
            out.push_back(std::move(t));
        } catch (const json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": bad target record (" + e.what() + ")");
        }
    });
    return out;
}

std::optional<Eigen::MatrixXd> token_vector_sequence(
    const std::vector<std::string>& tokens, const WordVectorStore& store,
    int max_len) {
    if (max_len < 1) {
        throw std::runtime_error("max_len must be >= 1");
    }
    std::vector<int> rows;
    for (const auto& t : tokens) {
        if (static_cast<int>(rows.size()) >= max_len) break;
        const int i = store.index_of(t);
        if (i >= 0) rows.push_back(i);
    }
    if (rows.empty()) return std::nullopt;
    Eigen::MatrixXd seq(rows.size(), store.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        seq.row(static_cast<int>(r)) = store.matrix().row(rows[r]);
    }
    return seq;
}

}  // namespace anamine
