#include "anamine/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>

#include "anamine/io.hpp"

namespace anamine {

namespace {

constexpr double kUnitTol = 1e-9;   // index rows
constexpr double kInputTol = 1e-6;  // similarity() arguments

void require_unit_rows(const Eigen::MatrixXd& m, const char* what) {
    for (int i = 0; i < m.rows(); ++i) {
        if (std::abs(m.row(i).norm() - 1.0) > kUnitTol) {
            throw std::runtime_error(std::string(what) + " row " +
                                     std::to_string(i) + " is not unit norm");
        }
    }
}

std::pair<std::string, std::string> pair_key(const std::string& x,
                                             const std::string& y) {
    return x < y ? std::make_pair(x, y) : std::make_pair(y, x);
}

}  // namespace

EmbeddingIndex EmbeddingIndex::build(const std::vector<EncodedDoc>& docs) {
    if (docs.empty()) {
        throw std::runtime_error("cannot build an empty embedding index");
    }
    EmbeddingIndex index;
    const int dim = static_cast<int>(docs.front().purpose_unit.size());
    index.purpose_.resize(docs.size(), dim);
    index.mechanism_.resize(docs.size(), dim);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& doc = docs[i];
        if (index.row_.count(doc.product_id)) {
            throw std::runtime_error("duplicate product in encodings: " +
                                     doc.product_id);
        }
        if (doc.purpose_unit.size() != dim || doc.mechanism_unit.size() != dim) {
            throw std::runtime_error("encoding dimension mismatch for " +
                                     doc.product_id);
        }
        index.row_[doc.product_id] = static_cast<int>(i);
        index.ids_.push_back(doc.product_id);
        index.purpose_.row(static_cast<int>(i)) = doc.purpose_unit.transpose();
        index.mechanism_.row(static_cast<int>(i)) = doc.mechanism_unit.transpose();
    }
    require_unit_rows(index.purpose_, "purpose");
    require_unit_rows(index.mechanism_, "mechanism");
    return index;
}

int EmbeddingIndex::row_of(const std::string& id) const {
    auto it = row_.find(id);
    return it == row_.end() ? -1 : it->second;
}

double similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) {
        throw std::runtime_error("similarity of vectors with different dimensions");
    }
    if (std::abs(u.norm() - 1.0) > kInputTol || std::abs(v.norm() - 1.0) > kInputTol) {
        throw std::runtime_error("similarity requires unit-norm vectors");
    }
    return std::clamp(u.dot(v), -1.0, 1.0);
}

double distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return 1.0 - similarity(u, v);
}

namespace {

// Shared core for both query directions. primary drives the ranking,
// constraint must be >= threshold.
QueryResult constrained_query(const EmbeddingIndex& index,
                              const Eigen::VectorXd& primary_seed,
                              const Eigen::VectorXd& constraint_seed,
                              const Eigen::MatrixXd& primary,
                              const Eigen::MatrixXd& constraint,
                              double threshold, int exclude_row, bool swap_report) {
    const Eigen::VectorXd primary_dist =
        Eigen::VectorXd::Ones(primary.rows()) - primary * primary_seed;
    const Eigen::VectorXd constraint_dist =
        Eigen::VectorXd::Ones(constraint.rows()) - constraint * constraint_seed;

    QueryResult out;
    std::size_t considered = 0;
    for (int i = 0; i < primary.rows(); ++i) {
        if (i == exclude_row) continue;
        ++considered;
        if (constraint_dist(i) < threshold) continue;
        RankedCandidate c;
        c.id = index.ids()[static_cast<std::size_t>(i)];
        if (swap_report) {
            c.purpose_distance = constraint_dist(i);
            c.mechanism_distance = primary_dist(i);
        } else {
            c.purpose_distance = primary_dist(i);
            c.mechanism_distance = constraint_dist(i);
        }
        out.candidates.push_back(std::move(c));
    }
    const auto primary_of = [&](const RankedCandidate& c) {
        return swap_report ? c.mechanism_distance : c.purpose_distance;
    };
    std::sort(out.candidates.begin(), out.candidates.end(),
              [&](const RankedCandidate& a, const RankedCandidate& b) {
                  if (primary_of(a) != primary_of(b)) {
                      return primary_of(a) < primary_of(b);
                  }
                  return a.id < b.id;
              });
    out.constraint_unsatisfiable = considered > 0 && out.candidates.empty();
    return out;
}

void require_unit_seed(const SeedVectors& seed, int dim) {
    if (seed.purpose.size() != dim || seed.mechanism.size() != dim) {
        throw std::runtime_error("seed vector dimension does not match index");
    }
    if (std::abs(seed.purpose.norm() - 1.0) > kInputTol ||
        std::abs(seed.mechanism.norm() - 1.0) > kInputTol) {
        throw std::runtime_error("seed vectors must be unit norm");
    }
}

}  // namespace

QueryResult query_same_purpose_diff_mechanism(const EmbeddingIndex& index,
                                              const std::string& seed_id,
                                              double min_mechanism_distance) {
    const int row = index.row_of(seed_id);
    if (row < 0) {
        throw std::runtime_error("seed product not in index: " + seed_id);
    }
    return constrained_query(index, index.purpose().row(row).transpose(),
                             index.mechanism().row(row).transpose(),
                             index.purpose(), index.mechanism(),
                             min_mechanism_distance, row, false);
}

QueryResult query_same_purpose_diff_mechanism(const EmbeddingIndex& index,
                                              const SeedVectors& seed,
                                              double min_mechanism_distance) {
    require_unit_seed(seed, index.dim());
    return constrained_query(index, seed.purpose, seed.mechanism, index.purpose(),
                             index.mechanism(), min_mechanism_distance, -1, false);
}

QueryResult query_same_mechanism_diff_purpose(const EmbeddingIndex& index,
                                              const std::string& seed_id,
                                              double min_purpose_distance) {
    const int row = index.row_of(seed_id);
    if (row < 0) {
        throw std::runtime_error("seed product not in index: " + seed_id);
    }
    return constrained_query(index, index.mechanism().row(row).transpose(),
                             index.purpose().row(row).transpose(),
                             index.mechanism(), index.purpose(),
                             min_purpose_distance, row, true);
}

QueryResult query_same_mechanism_diff_purpose(const EmbeddingIndex& index,
                                              const SeedVectors& seed,
                                              double min_purpose_distance) {
    require_unit_seed(seed, index.dim());
    return constrained_query(index, seed.mechanism, seed.purpose, index.mechanism(),
                             index.purpose(), min_purpose_distance, -1, true);
}

std::vector<ScoredPair> pair_scores(const EmbeddingIndex& index,
                                    Representation repr) {
    const std::size_t n = index.size();
    Eigen::MatrixXd rows;
    switch (repr) {
        case Representation::purpose: rows = index.purpose(); break;
        case Representation::mechanism: rows = index.mechanism(); break;
        case Representation::concat: {
            rows.resize(n, 2 * index.dim());
            rows << index.purpose(), index.mechanism();
            for (int i = 0; i < rows.rows(); ++i) {
                rows.row(i) /= rows.row(i).norm();
            }
            break;
        }
    }

    std::vector<ScoredPair> out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            auto key = pair_key(index.ids()[i], index.ids()[j]);
            out.push_back({key.first, key.second,
                           rows.row(static_cast<int>(i))
                               .dot(rows.row(static_cast<int>(j)))});
        }
    }
    return out;
}

std::vector<AnalogyPairLabel> build_labels_from_search_log(
    const std::vector<SearchLogEntry>& entries) {
    constexpr std::size_t kTopRanks = 5;

    // unordered pair -> (positive?, provenance)
    std::map<std::pair<std::string, std::string>, AnalogyPairLabel> merged;
    auto emit = [&](const std::string& seed, const std::string& cand, bool positive) {
        if (seed == cand) {
            std::cerr << "warning: self-pair for seed " << seed << " skipped\n";
            return;
        }
        auto key = pair_key(seed, cand);
        auto it = merged.find(key);
        if (it == merged.end()) {
            AnalogyPairLabel label;
            label.seed_id = seed;
            label.candidate_id = cand;
            label.positive = positive;
            label.provenance = positive ? LabelProvenance::matched
                                        : LabelProvenance::implicitly_rejected;
            merged.emplace(std::move(key), std::move(label));
        } else if (positive && !it->second.positive) {
            // conflicting evidence resolves to positive
            it->second.positive = true;
            it->second.provenance = LabelProvenance::matched;
        }
    };

    for (const auto& entry : entries) {
        if (entry.results.empty()) {
            std::cerr << "warning: empty result list for seed " << entry.seed_id
                      << ", entry skipped\n";
            continue;
        }
        if (entry.worker_matches.empty()) {
            std::cerr << "warning: no workers for seed " << entry.seed_id
                      << ", entry skipped\n";
            continue;
        }

        // Majority vote across this entry's workers.
        std::map<std::string, std::size_t> votes;
        for (const auto& worker : entry.worker_matches) {
            std::set<std::string> distinct(worker.begin(), worker.end());
            for (const auto& id : distinct) ++votes[id];
        }
        const std::size_t needed = entry.worker_matches.size() / 2 + 1;
        std::set<std::string> matches;
        for (const auto& [id, v] : votes) {
            if (v < needed) continue;
            if (std::find(entry.results.begin(), entry.results.end(), id) ==
                entry.results.end()) {
                std::cerr << "warning: match " << id << " for seed " << entry.seed_id
                          << " is not in the result list, ignored\n";
                continue;
            }
            matches.insert(id);
        }
        if (matches.empty()) continue;

        std::size_t lowest_match_rank = 0;  // index of the last-ranked match
        for (std::size_t r = 0; r < entry.results.size(); ++r) {
            if (matches.count(entry.results[r])) lowest_match_rank = r;
        }

        for (const auto& id : matches) emit(entry.seed_id, id, true);
        const std::size_t cutoff = std::min(lowest_match_rank, kTopRanks);
        for (std::size_t r = 0; r < cutoff; ++r) {
            if (!matches.count(entry.results[r])) {
                emit(entry.seed_id, entry.results[r], false);
            }
        }
    }

    std::vector<AnalogyPairLabel> out;
    out.reserve(merged.size());
    for (auto& [key, label] : merged) out.push_back(std::move(label));
    return out;
}

std::vector<SearchLogEntry> load_search_log(const std::filesystem::path& path) {
    std::vector<SearchLogEntry> entries;
    for_each_jsonl(path, [&](std::size_t line_no, const json& obj) {
        try {
            SearchLogEntry e;
            e.seed_id = obj.at("seed_id").get<std::string>();
            e.results = obj.at("results").get<std::vector<std::string>>();
            e.worker_matches =
                obj.at("worker_matches").get<std::vector<std::vector<std::string>>>();
            entries.push_back(std::move(e));
        } catch (const json::exception& err) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": bad search-log record (" + err.what() + ")");
        }
    });
    return entries;
}

std::vector<AnalogyPairLabel> load_labels(const std::filesystem::path& path) {
    std::vector<AnalogyPairLabel> labels;
    std::set<std::pair<std::string, std::string>> seen;
    for_each_jsonl(path, [&](std::size_t line_no, const json& obj) {
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            AnalogyPairLabel label;
            label.seed_id = obj.at("seed_id").get<std::string>();
            label.candidate_id = obj.at("candidate_id").get<std::string>();
            const std::string kind = obj.at("label").get<std::string>();
            if (kind == "positive") {
                label.positive = true;
            } else if (kind == "negative") {
                label.positive = false;
            } else {
                throw std::runtime_error(where + ": label must be positive/negative");
            }
            const std::string prov = obj.value("provenance", "matched");
            label.provenance = prov == "implicitly_rejected"
                                   ? LabelProvenance::implicitly_rejected
                                   : LabelProvenance::matched;
            if (label.seed_id == label.candidate_id) {
                throw std::runtime_error(where + ": self-pair label");
            }
            if (!seen.insert(pair_key(label.seed_id, label.candidate_id)).second) {
                throw std::runtime_error(where + ": duplicate labeled pair");
            }
            labels.push_back(std::move(label));
        } catch (const json::exception& err) {
            throw std::runtime_error(where + ": bad label record (" + err.what() +
                                     ")");
        }
    });
    return labels;
}

void save_labels(const std::vector<AnalogyPairLabel>& labels,
                 const std::filesystem::path& path) {
    std::vector<json> rows;
    rows.reserve(labels.size());
    for (const auto& label : labels) {
        json row;
        row["seed_id"] = label.seed_id;
        row["candidate_id"] = label.candidate_id;
        row["label"] = label.positive ? "positive" : "negative";
        row["provenance"] = label.provenance == LabelProvenance::matched
                                ? "matched"
                                : "implicitly_rejected";
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

namespace {

const std::map<std::string, std::string>& lemma_exceptions() {
    static const std::map<std::string, std::string> table = {
        {"children", "child"}, {"men", "man"},       {"women", "woman"},
        {"people", "person"},  {"feet", "foot"},     {"teeth", "tooth"},
        {"mice", "mouse"},     {"geese", "goose"},   {"leaves", "leaf"},
        {"knives", "knife"},   {"wives", "wife"},    {"shelves", "shelf"},
        {"wolves", "wolf"},    {"halves", "half"},   {"lives", "life"},
        {"went", "go"},        {"gone", "go"},       {"made", "make"},
        {"ran", "run"},        {"bought", "buy"},    {"brought", "bring"},
        {"held", "hold"},      {"kept", "keep"},     {"built", "build"},
        {"worn", "wear"},      {"wore", "wear"},     {"broke", "break"},
        {"broken", "break"},   {"chose", "choose"},  {"chosen", "choose"},
        {"drew", "draw"},      {"drawn", "draw"},    {"froze", "freeze"},
        {"frozen", "freeze"},  {"hung", "hang"},     {"lit", "light"},
        {"sold", "sell"},      {"spun", "spin"},     {"stuck", "stick"},
        {"threw", "throw"},    {"thrown", "throw"},  {"better", "good"},
        {"best", "good"},      {"worse", "bad"},     {"worst", "bad"},
    };
    return table;
}

bool ends_with(const std::string& s, const char* suffix) {
    const std::size_t n = std::char_traits<char>::length(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

}  // namespace

std::vector<std::string> lemma_variants(const std::string& token) {
    std::vector<std::string> out{token};
    auto push = [&](const std::string& s) {
        if (s.size() >= 2 &&
            std::find(out.begin(), out.end(), s) == out.end()) {
            out.push_back(s);
        }
    };

    auto it = lemma_exceptions().find(token);
    if (it != lemma_exceptions().end()) {
        push(it->second);
        return out;
    }

    // Suffix stripping; stems shorter than 3 characters are not produced.
    if (ends_with(token, "ies") && token.size() >= 5) {
        push(token.substr(0, token.size() - 3) + "y");
    } else if ((ends_with(token, "sses") || ends_with(token, "xes") ||
                ends_with(token, "zes") || ends_with(token, "ches") ||
                ends_with(token, "shes")) &&
               token.size() >= 5) {
        push(token.substr(0, token.size() - 2));
    } else if (ends_with(token, "s") && !ends_with(token, "ss") &&
               !ends_with(token, "us") && !ends_with(token, "is") &&
               token.size() >= 4) {
        push(token.substr(0, token.size() - 1));
    }

    if (ends_with(token, "ing") && token.size() >= 6) {
        const std::string stem = token.substr(0, token.size() - 3);
        push(stem);
        push(stem + "e");  // making -> make
        if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
            !is_vowel(stem.back())) {
            push(stem.substr(0, stem.size() - 1));  // running -> run
        }
    } else if (ends_with(token, "ed") && token.size() >= 5) {
        const std::string stem = token.substr(0, token.size() - 2);
        push(stem);
        push(stem + "e");  // inflated -> inflate
        if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
            !is_vowel(stem.back())) {
            push(stem.substr(0, stem.size() - 1));  // stopped -> stop
        }
    }
    return out;
}

std::vector<SearchHit> keyword_search(const std::vector<std::string>& query,
                                      const Corpus& corpus) {
    if (query.empty()) {
        throw std::runtime_error("empty search query");
    }
    std::set<std::string> expanded_query;
    for (const auto& term : query) {
        for (const auto& v : lemma_variants(term)) expanded_query.insert(v);
    }

    std::vector<SearchHit> hits;
    for (const auto& doc : corpus.docs()) {
        std::set<std::string> bag;
        for (const auto& token : doc.tokens) {
            for (const auto& v : lemma_variants(token)) bag.insert(v);
        }
        int score = 0;
        for (const auto& term : expanded_query) {
            if (bag.count(term)) ++score;
        }
        if (score > 0) hits.push_back({doc.id, score});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return hits;
}

RankingResult evaluate(const std::vector<AnalogyPairLabel>& labels,
                       const std::vector<ScoredPair>& scores,
                       const std::vector<double>& levels_percent,
                       const std::string& method) {
    if (labels.empty()) {
        throw std::runtime_error("no labels to evaluate");
    }
    std::map<std::pair<std::string, std::string>, double> score_of;
    for (const auto& sp : scores) {
        score_of[pair_key(sp.a, sp.b)] = sp.score;
    }

    std::vector<std::pair<ScoredPair, bool>> ranked;  // (scored pair, positive)
    std::size_t total_positive = 0;
    for (const auto& label : labels) {
        const auto key = pair_key(label.seed_id, label.candidate_id);
        auto it = score_of.find(key);
        if (it == score_of.end()) {
            throw std::runtime_error("labeled pair (" + key.first + ", " +
                                     key.second + ") has no score");
        }
        ranked.push_back({{key.first, key.second, it->second}, label.positive});
        if (label.positive) ++total_positive;
    }
    if (total_positive == 0) {
        throw std::runtime_error("no positive labels");
    }

    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
        if (x.first.score != y.first.score) return x.first.score > y.first.score;
        if (x.first.a != y.first.a) return x.first.a < y.first.a;
        return x.first.b < y.first.b;
    });

    RankingResult result;
    result.method = method;
    result.levels_percent = levels_percent;
    for (const auto& [sp, positive] : ranked) result.ranked.push_back(sp);

    const double n = static_cast<double>(ranked.size());
    for (double level : levels_percent) {
        if (level <= 0 || level > 100) {
            throw std::runtime_error("evaluation level out of range: " +
                                     std::to_string(level));
        }
        const std::size_t k = static_cast<std::size_t>(
            std::ceil(level / 100.0 * n));
        std::size_t hits = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (ranked[i].second) ++hits;
        }
        result.precision.push_back(static_cast<double>(hits) /
                                   static_cast<double>(k));
        result.recall.push_back(static_cast<double>(hits) /
                                static_cast<double>(total_positive));
    }
    return result;
}

namespace {

std::map<std::string, double> tfidf_bag(const ProductDoc& doc,
                                        const WordVectorStore& store) {
    std::map<std::string, double> bag;
    for (const auto& [token, w] : tfidf_weights(doc.tokens, store)) {
        bag[token] = w;
    }
    return bag;
}

double bag_cosine(const std::map<std::string, double>& a,
                  const std::map<std::string, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [t, w] : a) {
        na += w * w;
        auto it = b.find(t);
        if (it != b.end()) dot += w * it->second;
    }
    for (const auto& [t, w] : b) nb += w * w;
    if (na <= 0 || nb <= 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// TF-IDF-weighted average of the document's word vectors; top_d <= 0 keeps
// every in-vocabulary token.
Eigen::VectorXd weighted_average_vector(const ProductDoc& doc,
                                        const WordVectorStore& store, int top_d) {
    std::vector<WeightedToken> weighted;
    for (const auto& [token, w] : tfidf_weights(doc.tokens, store)) {
        if (store.has(token)) weighted.push_back({token, w});
    }
    if (top_d > 0 && static_cast<int>(weighted.size()) > top_d) {
        std::sort(weighted.begin(), weighted.end(),
                  [](const WeightedToken& a, const WeightedToken& b) {
                      if (a.weight != b.weight) return a.weight > b.weight;
                      return a.token < b.token;
                  });
        weighted.resize(static_cast<std::size_t>(top_d));
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(store.dim());
    for (const auto& wt : weighted) {
        sum += wt.weight * store.vec(wt.token);
    }
    return sum;
}

double vec_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    return a.dot(b) / (na * nb);
}

}  // namespace

std::vector<ScoredPair> baseline_scores(const Corpus& corpus,
                                        const WordVectorStore& store,
                                        BaselineMethod method) {
    const auto& docs = corpus.docs();
    const std::size_t n = docs.size();

    std::vector<std::map<std::string, double>> bags;
    std::vector<Eigen::VectorXd> vecs;
    if (method == BaselineMethod::tfidf_cosine) {
        bags.reserve(n);
        for (const auto& doc : docs) bags.push_back(tfidf_bag(doc, store));
    } else {
        const int top_d = method == BaselineMethod::glove_tfidf_top5 ? 5 : 0;
        vecs.reserve(n);
        for (const auto& doc : docs) {
            vecs.push_back(weighted_average_vector(doc, store, top_d));
            if (vecs.back().norm() < 1e-12) {
                std::cerr << "warning: document " << doc.id
                          << " has no in-vocabulary token; scores 0 everywhere\n";
            }
        }
    }

    std::vector<ScoredPair> out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double score = method == BaselineMethod::tfidf_cosine
                                     ? bag_cosine(bags[i], bags[j])
                                     : vec_cosine(vecs[i], vecs[j]);
            auto key = pair_key(docs[i].id, docs[j].id);
            out.push_back({key.first, key.second, score});
        }
    }
    return out;
}

std::string to_string(BaselineMethod method) {
    switch (method) {
        case BaselineMethod::tfidf_cosine: return "tfidf-cosine";
        case BaselineMethod::glove_tfidf_avg: return "glove-tfidf-avg";
        case BaselineMethod::glove_tfidf_top5: return "glove-tfidf-top5";
    }
    return "?";
}

std::string to_string(Representation repr) {
    switch (repr) {
        case Representation::purpose: return "purpose";
        case Representation::mechanism: return "mechanism";
        case Representation::concat: return "concat";
    }
    return "?";
}

}  // namespace anamine
