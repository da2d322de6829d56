// anamine: purpose/mechanism analogy mining over short product texts.
// One binary, subcommands for each pipeline stage; see README.md.

#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "anamine/corpus.hpp"
#include "anamine/encoder.hpp"
#include "anamine/ideation.hpp"
#include "anamine/interpret.hpp"
#include "anamine/io.hpp"
#include "anamine/retrieval.hpp"
#include "anamine/rng.hpp"
#include "anamine/synthetic.hpp"
#include "anamine/vectors.hpp"

namespace {

using namespace anamine;

// JSON config file support: flags win, config fills in the rest.
class ConfigOverlay {
public:
    void load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open config file: " + path.string());
        }
        try {
            in >> cfg_;
        } catch (const json::parse_error& e) {
            throw std::runtime_error("bad config file " + path.string() + ": " +
                                     e.what());
        }
        if (!cfg_.is_object()) {
            throw std::runtime_error("config file must hold a JSON object");
        }
    }

    template <typename T>
    void bind(CLI::Option* opt, T* var, const std::string& key) {
        appliers_.push_back([this, opt, var, key] {
            if (opt->count() == 0 && cfg_.contains(key)) {
                *var = cfg_.at(key).get<T>();
            }
        });
    }

    void apply() {
        for (auto& fn : appliers_) fn();
    }

private:
    json cfg_ = json::object();
    std::vector<std::function<void()>> appliers_;
};

WordVectorStore load_store_for(const Corpus& corpus,
                               const std::filesystem::path& vectors_path) {
    std::set<std::string> vocab;
    for (const auto& doc : corpus.docs()) {
        vocab.insert(doc.tokens.begin(), doc.tokens.end());
    }
    auto store = load_word_vectors(vectors_path, vocab);
    store.set_doc_frequencies(corpus);
    return store;
}

std::vector<EncodedDoc> predict_corpus(const EncoderModel& model,
                                       const Corpus& corpus,
                                       const WordVectorStore& store, int max_len) {
    std::vector<EncodedDoc> out;
    for (const auto& doc : corpus.docs()) {
        auto seq = token_vector_sequence(doc.tokens, store, max_len);
        if (!seq) {
            std::cerr << "warning: no in-vocabulary token in " << doc.id
                      << ", not encoded\n";
            continue;
        }
        out.push_back(predict(model, doc.id, *seq));
    }
    return out;
}

std::string format_sim(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    return buf;
}

int cmd_ingest(const std::string& corpus_path, const std::string& annotations_path,
               const std::string& out_path) {
    const Corpus corpus = load_corpus(corpus_path);
    const auto sets = load_annotations(annotations_path, corpus);
    std::size_t records = 0, tokens = 0;
    for (const auto& s : sets) records += s.records.size();
    for (const auto& d : corpus.docs()) tokens += d.tokens.size();
    if (!out_path.empty()) {
        json report;
        report["documents"] = corpus.size();
        report["tokens"] = tokens;
        report["annotated_documents"] = sets.size();
        report["annotation_records"] = records;
        write_text_file(out_path, report.dump(2) + "\n");
    }
    std::cout << "ingest: " << corpus.size() << " documents, " << tokens
              << " tokens, " << sets.size() << " annotated (" << records
              << " records)\n";
    return 0;
}

int cmd_targets(const std::string& corpus_path, const std::string& annotations_path,
                const std::string& vectors_path, int top_d,
                const std::string& out_path) {
    const Corpus corpus = load_corpus(corpus_path);
    const auto store = load_store_for(corpus, vectors_path);
    const auto sets = load_annotations(annotations_path, corpus);

    std::vector<TargetPair> targets;
    std::size_t untargetable = 0;
    for (const auto& set : sets) {
        auto pair = build_target_pair(set, corpus.doc(set.product_id), store, top_d);
        if (!pair) {
            std::cerr << "warning: product " << set.product_id
                      << " is untargetable (no annotated token in vocabulary)\n";
            ++untargetable;
            continue;
        }
        targets.push_back(std::move(*pair));
    }
    if (targets.empty()) {
        throw std::runtime_error("no targetable documents");
    }
    save_targets(targets, out_path);
    std::cout << "targets: " << targets.size() << " pairs written to " << out_path
              << " (" << untargetable << " untargetable)\n";
    return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& vectors_path,
              const std::string& targets_path, const std::string& checkpoint_path,
              const std::string& log_path, int hidden, int max_len,
              const TrainConfig& config) {
    const Corpus corpus = load_corpus(corpus_path);
    const auto store = load_store_for(corpus, vectors_path);
    const auto targets = load_targets(targets_path);

    std::vector<TrainExample> dataset;
    for (const auto& t : targets) {
        if (!corpus.has(t.product_id)) {
            throw std::runtime_error("target for unknown product " + t.product_id);
        }
        auto seq = token_vector_sequence(corpus.doc(t.product_id).tokens, store,
                                         max_len);
        if (!seq) {
            std::cerr << "warning: no in-vocabulary token in " << t.product_id
                      << ", excluded from training\n";
            continue;
        }
        dataset.push_back(
            {t.product_id, std::move(*seq), t.purpose.vec, t.mechanism.vec});
    }

    EncoderModel model = EncoderModel::init(store.dim(), hidden, config.seed);
    const TrainLog log = train(model, dataset, config);
    save_model(model, checkpoint_path);
    if (!log_path.empty()) save_train_log(log, log_path);
    std::cout << "train: " << dataset.size() << " examples, " << config.epochs
              << " epochs, final loss " << format_double(log.epoch_loss.back())
              << ", checkpoint " << checkpoint_path << "\n";
    return 0;
}

int cmd_predict(const std::string& corpus_path, const std::string& vectors_path,
                const std::string& checkpoint_path, const std::string& out_path,
                int max_len) {
    const Corpus corpus = load_corpus(corpus_path);
    const auto store = load_store_for(corpus, vectors_path);
    const EncoderModel model = load_model(checkpoint_path);
    const auto encodings = predict_corpus(model, corpus, store, max_len);
    if (encodings.empty()) {
        throw std::runtime_error("no document could be encoded");
    }
    save_encodings(encodings, out_path);
    std::cout << "predict: " << encodings.size() << " encodings written to "
              << out_path << "\n";
    return 0;
}

void print_interpretation(std::ostream& os, const std::string& heading,
                          const Interpretation& interp) {
    os << heading << "\n  Top similar: ";
    for (std::size_t i = 0; i < interp.nearest.size(); ++i) {
        if (i) os << ", ";
        os << interp.nearest[i].token;
    }
    os << "\n  Sparse coding: ";
    for (std::size_t i = 0; i < interp.display_code.size(); ++i) {
        if (i) os << ", ";
        os << interp.display_code[i].token << " ("
           << format_sim(interp.display_code[i].score) << ")";
    }
    os << "\n  Residual norm: " << format_sim(interp.residual_norm) << "\n";
}

json interpretation_to_json(const Interpretation& interp) {
    json obj;
    obj["nearest"] = json::array();
    for (const auto& st : interp.nearest) {
        obj["nearest"].push_back({{"token", st.token}, {"similarity", st.score}});
    }
    obj["sparse_code"] = json::array();
    for (const auto& st : interp.sparse_code) {
        obj["sparse_code"].push_back({{"token", st.token}, {"alpha", st.score}});
    }
    obj["display_code"] = json::array();
    for (const auto& st : interp.display_code) {
        obj["display_code"].push_back({{"token", st.token}, {"alpha", st.score}});
    }
    obj["residual_norm"] = interp.residual_norm;
    obj["dropped_dependent_atom"] = interp.dropped_dependent_atom;
    return obj;
}

int cmd_interpret(const std::string& corpus_path, const std::string& vectors_path,
                  const std::string& encodings_path, const std::string& id, int k,
                  int atoms, double alpha_threshold, const std::string& out_path) {
    const Corpus corpus = load_corpus(corpus_path);
    const auto store = load_store_for(corpus, vectors_path);
    const auto encodings = load_encodings(encodings_path);

    const EncodedDoc* found = nullptr;
    for (const auto& e : encodings) {
        if (e.product_id == id) {
            found = &e;
            break;
        }
    }
    if (!found) {
        throw std::runtime_error("product " + id + " not present in " +
                                 encodings_path);
    }

    const auto purpose =
        interpret_vector(found->purpose_raw, store, k, atoms, alpha_threshold);
    const auto mechanism =
        interpret_vector(found->mechanism_raw, store, k, atoms, alpha_threshold);

    std::cout << "product " << id << ": " << corpus.doc(id).text << "\n";
    print_interpretation(std::cout, "Purpose", purpose);
    print_interpretation(std::cout, "Mechanism", mechanism);

    if (!out_path.empty()) {
        json obj;
        obj["product_id"] = id;
        obj["purpose"] = interpretation_to_json(purpose);
        obj["mechanism"] = interpretation_to_json(mechanism);
        write_text_file(out_path, obj.dump(2) + "\n");
    }
    return 0;
}

int cmd_query(const std::string& encodings_path, const std::string& seed_id,
              const std::string& mode, double tau, int top,
              const std::string& out_path) {
    const auto encodings = load_encodings(encodings_path);
    const auto index = EmbeddingIndex::build(encodings);

    QueryResult result;
    if (mode == "same-purpose") {
        result = query_same_purpose_diff_mechanism(index, seed_id, tau);
    } else if (mode == "same-mechanism") {
        result = query_same_mechanism_diff_purpose(index, seed_id, tau);
    } else {
        throw std::runtime_error("mode must be same-purpose or same-mechanism");
    }

    if (result.constraint_unsatisfiable) {
        std::cout << "query: constraint unsatisfiable at threshold " << tau << "\n";
    }
    const std::size_t shown =
        std::min<std::size_t>(result.candidates.size(),
                              top > 0 ? static_cast<std::size_t>(top)
                                      : result.candidates.size());
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& c = result.candidates[i];
        std::cout << (i + 1) << ". " << c.id
                  << "  purpose_dist=" << format_sim(c.purpose_distance)
                  << "  mechanism_dist=" << format_sim(c.mechanism_distance) << "\n";
    }
    if (!out_path.empty()) {
        std::vector<json> rows;
        for (std::size_t i = 0; i < shown; ++i) {
            const auto& c = result.candidates[i];
            rows.push_back({{"rank", i + 1},
                            {"id", c.id},
                            {"purpose_distance", c.purpose_distance},
                            {"mechanism_distance", c.mechanism_distance}});
        }
        write_jsonl(out_path, rows);
    }
    std::cout << "query: " << shown << " of " << result.candidates.size()
              << " candidates shown\n";
    return 0;
}

int cmd_evaluate(const std::string& corpus_path, const std::string& vectors_path,
                 const std::string& checkpoint_path, const std::string& labels_path,
                 const std::string& search_log_path, const std::string& methods_csv,
                 const std::string& levels_csv, const std::string& out_path,
                 int max_len) {
    const Corpus corpus = load_corpus(corpus_path);
    const auto store = load_store_for(corpus, vectors_path);
    const EncoderModel model = load_model(checkpoint_path);
    const auto index = EmbeddingIndex::build(
        predict_corpus(model, corpus, store, max_len));

    std::vector<AnalogyPairLabel> labels;
    if (!labels_path.empty()) {
        labels = load_labels(labels_path);
    } else if (!search_log_path.empty()) {
        labels = build_labels_from_search_log(load_search_log(search_log_path));
    } else {
        throw std::runtime_error("evaluate needs --labels or --search-log");
    }

    std::vector<double> levels;
    {
        std::stringstream ss(levels_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) levels.push_back(std::stod(item));
        }
        if (levels.empty()) {
            throw std::runtime_error("no evaluation levels given");
        }
    }

    std::vector<RankingResult> results;
    std::stringstream ss(methods_csv);
    std::string method;
    while (std::getline(ss, method, ',')) {
        if (method.empty()) continue;
        std::vector<ScoredPair> scores;
        if (method == "purpose") {
            scores = pair_scores(index, Representation::purpose);
        } else if (method == "mechanism") {
            scores = pair_scores(index, Representation::mechanism);
        } else if (method == "concat") {
            scores = pair_scores(index, Representation::concat);
        } else if (method == "tfidf-cosine") {
            scores = baseline_scores(corpus, store, BaselineMethod::tfidf_cosine);
        } else if (method == "glove-tfidf-avg") {
            scores = baseline_scores(corpus, store, BaselineMethod::glove_tfidf_avg);
        } else if (method == "glove-tfidf-top5") {
            scores = baseline_scores(corpus, store, BaselineMethod::glove_tfidf_top5);
        } else {
            throw std::runtime_error("unknown method: " + method);
        }
        results.push_back(evaluate(labels, scores, levels, method));
    }
    if (results.empty()) {
        throw std::runtime_error("no methods given");
    }

    std::ostringstream csv;
    csv << "method,level_percent,precision,recall\n";
    for (const auto& r : results) {
        for (std::size_t i = 0; i < r.levels_percent.size(); ++i) {
            csv << r.method << ',' << format_double(r.levels_percent[i]) << ','
                << format_double(r.precision[i]) << ','
                << format_double(r.recall[i]) << '\n';
        }
    }
    if (!out_path.empty()) write_text_file(out_path, csv.str());

    for (const auto& r : results) {
        std::cout << "evaluate: " << r.method;
        for (std::size_t i = 0; i < r.levels_percent.size(); ++i) {
            std::cout << "  p@" << r.levels_percent[i] << "%="
                      << format_sim(r.precision[i]);
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_inspire(const std::string& corpus_path, const std::string& encodings_path,
                const std::string& checkpoint_path, const std::string& vectors_path,
                const InspirationParams& params, int max_len,
                const std::string& out_path) {
    const Corpus corpus = load_corpus(corpus_path);

    std::vector<EncodedDoc> encodings;
    if (!encodings_path.empty()) {
        encodings = load_encodings(encodings_path);
    } else if (!checkpoint_path.empty() && !vectors_path.empty()) {
        const auto store = load_store_for(corpus, vectors_path);
        const EncoderModel model = load_model(checkpoint_path);
        encodings = predict_corpus(model, corpus, store, max_len);
    } else {
        throw std::runtime_error(
            "inspire needs --encodings or both --checkpoint and --vectors");
    }
    const auto index = EmbeddingIndex::build(encodings);
    const auto reports = generate_inspirations(index, params);

    std::vector<json> rows;
    for (const auto& r : reports) {
        json row;
        row["seed_id"] = r.seed_id;
        row["seed_text"] = corpus.has(r.seed_id) ? corpus.doc(r.seed_id).text : "";
        row["cluster"] = r.cluster;
        row["cluster_homogeneity"] = r.cluster_homogeneity;
        if (r.min_pairwise_distance) {
            row["min_pairwise_mechanism_distance"] = *r.min_pairwise_distance;
        } else {
            row["min_pairwise_mechanism_distance"] = nullptr;
        }
        row["inspirations"] = json::array();
        for (const auto& entry : r.inspirations) {
            row["inspirations"].push_back(
                {{"id", entry.id},
                 {"text", corpus.has(entry.id) ? corpus.doc(entry.id).text : ""},
                 {"purpose_similarity", entry.purpose_similarity},
                 {"mechanism_similarity", entry.mechanism_similarity}});
        }
        rows.push_back(std::move(row));
    }
    write_jsonl(out_path, rows);
    std::cout << "inspire: " << reports.size() << " seeds x " << params.per_seed
              << " inspirations written to " << out_path << "\n";
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, int hidden, int dim, int len, double eps,
                  int trials, double lambda) {
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(trial);
        EncoderModel model = EncoderModel::init(dim, hidden, trial_seed);
        Rng rng(trial_seed ^ 0x9e3779b97f4a7c15ull);
        std::vector<TrainExample> batch;
        for (int e = 0; e < 2; ++e) {
            TrainExample ex;
            ex.inputs.resize(len, dim);
            for (int i = 0; i < len; ++i) {
                for (int j = 0; j < dim; ++j) ex.inputs(i, j) = rng.normal();
            }
            Eigen::VectorXd p(dim), m(dim);
            for (int j = 0; j < dim; ++j) {
                p(j) = rng.normal();
                m(j) = rng.normal();
            }
            ex.purpose_target = p / p.norm();
            ex.mechanism_target = m / m.norm();
            batch.push_back(std::move(ex));
        }
        const auto analytic = backward(model, batch, lambda);
        const auto numeric = finite_difference_gradients(model, batch, lambda, eps);
        worst = std::max(worst, max_relative_gradient_error(analytic, numeric));
    }
    std::cout << "gradcheck: max relative error " << format_double(worst) << " over "
              << trials << " trials (H=" << hidden << ", d=" << dim << ", T=" << len
              << ")\n";
    if (!(worst < 1e-4)) {
        std::cerr << "gradcheck FAILED: relative error " << format_double(worst)
                  << " >= 1e-4\n";
        return 1;
    }
    return 0;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_dir) {
    const auto data = generate_synthetic(spec);
    write_synthetic(data, spec, out_dir);
    std::size_t positives = 0;
    for (const auto& l : data.labels) {
        if (l.positive) ++positives;
    }
    std::cout << "synth: " << data.corpus.size() << " products, "
              << data.store.size() << " vocabulary, " << data.labels.size()
              << " labels (" << positives << " positive) in " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anamine: purpose/mechanism analogy mining"};
    app.require_subcommand(1);
    ConfigOverlay overlay;

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags win");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate corpus and annotations");
    std::string in_corpus, in_annotations, in_out;
    ingest->add_option("--corpus", in_corpus, "corpus JSONL")->required();
    ingest->add_option("--annotations", in_annotations, "annotation JSONL")->required();
    ingest->add_option("--out", in_out, "report JSON path");

    // targets
    auto* targets = app.add_subcommand("targets", "build supervision target vectors");
    std::string tg_corpus, tg_annotations, tg_vectors, tg_out = "targets.jsonl";
    int tg_top_d = 5;
    targets->add_option("--corpus", tg_corpus)->required();
    targets->add_option("--annotations", tg_annotations)->required();
    targets->add_option("--vectors", tg_vectors, "word-vector text file")->required();
    overlay.bind(targets->add_option("--top-d", tg_top_d, "tokens per target"),
                 &tg_top_d, "top-d");
    targets->add_option("--out", tg_out);

    // train
    auto* train_cmd = app.add_subcommand("train", "train the encoder");
    std::string tr_corpus, tr_vectors, tr_targets, tr_checkpoint = "encoder.json";
    std::string tr_log;
    int tr_hidden = 128, tr_max_len = 200;
    TrainConfig tr_config;
    train_cmd->add_option("--corpus", tr_corpus)->required();
    train_cmd->add_option("--vectors", tr_vectors)->required();
    train_cmd->add_option("--targets", tr_targets)->required();
    train_cmd->add_option("--checkpoint", tr_checkpoint, "output checkpoint path");
    train_cmd->add_option("--log", tr_log, "training log CSV path");
    overlay.bind(train_cmd->add_option("--hidden", tr_hidden, "GRU width per direction"),
                 &tr_hidden, "hidden");
    overlay.bind(train_cmd->add_option("--lr", tr_config.learning_rate),
                 &tr_config.learning_rate, "lr");
    overlay.bind(train_cmd->add_option("--epochs", tr_config.epochs),
                 &tr_config.epochs, "epochs");
    overlay.bind(train_cmd->add_option("--batch", tr_config.batch_size),
                 &tr_config.batch_size, "batch");
    overlay.bind(train_cmd->add_option("--clip", tr_config.clip_norm),
                 &tr_config.clip_norm, "clip");
    overlay.bind(train_cmd->add_option("--lambda", tr_config.loss_weight,
                                       "purpose share of the loss"),
                 &tr_config.loss_weight, "lambda");
    overlay.bind(train_cmd->add_option("--max-len", tr_max_len), &tr_max_len,
                 "max-len");
    overlay.bind(train_cmd->add_option("--seed", tr_config.seed), &tr_config.seed,
                 "seed");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "encode every document");
    std::string pd_corpus, pd_vectors, pd_checkpoint, pd_out = "encodings.jsonl";
    int pd_max_len = 200;
    predict_cmd->add_option("--corpus", pd_corpus)->required();
    predict_cmd->add_option("--vectors", pd_vectors)->required();
    predict_cmd->add_option("--checkpoint", pd_checkpoint)->required();
    predict_cmd->add_option("--out", pd_out);
    overlay.bind(predict_cmd->add_option("--max-len", pd_max_len), &pd_max_len,
                 "max-len");

    // interpret
    auto* interpret_cmd =
        app.add_subcommand("interpret", "explain a prediction vector");
    std::string it_corpus, it_vectors, it_encodings, it_id, it_out;
    int it_k = 10, it_atoms = 10;
    double it_threshold = 0.1;
    interpret_cmd->add_option("--corpus", it_corpus)->required();
    interpret_cmd->add_option("--vectors", it_vectors)->required();
    interpret_cmd->add_option("--encodings", it_encodings)->required();
    interpret_cmd->add_option("--id", it_id, "product id")->required();
    overlay.bind(interpret_cmd->add_option("--k", it_k, "nearest words"), &it_k, "k");
    overlay.bind(interpret_cmd->add_option("--atoms", it_atoms, "sparse-code size"),
                 &it_atoms, "atoms");
    overlay.bind(interpret_cmd->add_option("--alpha-threshold", it_threshold),
                 &it_threshold, "alpha-threshold");
    interpret_cmd->add_option("--out", it_out, "report JSON path");

    // query
    auto* query_cmd = app.add_subcommand("query", "constrained analogy query");
    std::string qu_encodings, qu_seed_id, qu_mode = "same-purpose", qu_out;
    double qu_tau = 0.6;
    int qu_top = 10;
    query_cmd->add_option("--encodings", qu_encodings)->required();
    query_cmd->add_option("--seed-id", qu_seed_id)->required();
    query_cmd->add_option("--mode", qu_mode, "same-purpose | same-mechanism");
    overlay.bind(query_cmd->add_option("--tau", qu_tau, "distance threshold"),
                 &qu_tau, "tau");
    overlay.bind(query_cmd->add_option("--top", qu_top), &qu_top, "top");
    query_cmd->add_option("--out", qu_out, "results JSONL path");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "precision/recall at K");
    std::string ev_corpus, ev_vectors, ev_checkpoint, ev_labels, ev_search_log;
    std::string ev_methods =
        "purpose,mechanism,concat,tfidf-cosine,glove-tfidf-avg,glove-tfidf-top5";
    std::string ev_levels = "1,5,10,15,20,25", ev_out;
    int ev_max_len = 200;
    eval_cmd->add_option("--corpus", ev_corpus)->required();
    eval_cmd->add_option("--vectors", ev_vectors)->required();
    eval_cmd->add_option("--checkpoint", ev_checkpoint)->required();
    eval_cmd->add_option("--labels", ev_labels, "labels JSONL");
    eval_cmd->add_option("--search-log", ev_search_log,
                         "search-log JSONL (labels are derived)");
    eval_cmd->add_option("--methods", ev_methods);
    eval_cmd->add_option("--levels", ev_levels, "percent levels, comma separated");
    eval_cmd->add_option("--out", ev_out, "report CSV path");
    overlay.bind(eval_cmd->add_option("--max-len", ev_max_len), &ev_max_len,
                 "max-len");

    // inspire
    auto* inspire_cmd =
        app.add_subcommand("inspire", "near-purpose far-mechanism sets");
    std::string is_corpus, is_encodings, is_checkpoint, is_vectors;
    std::string is_out = "inspirations.jsonl";
    InspirationParams is_params;
    int is_max_len = 200;
    inspire_cmd->add_option("--corpus", is_corpus)->required();
    inspire_cmd->add_option("--encodings", is_encodings);
    inspire_cmd->add_option("--checkpoint", is_checkpoint);
    inspire_cmd->add_option("--vectors", is_vectors);
    overlay.bind(inspire_cmd->add_option("--clusters", is_params.clusters,
                                         "purpose clusters (K)"),
                 &is_params.clusters, "clusters");
    overlay.bind(inspire_cmd->add_option("--seeds", is_params.max_seeds,
                                         "seed products (P)"),
                 &is_params.max_seeds, "seeds");
    overlay.bind(inspire_cmd->add_option("--per-seed", is_params.per_seed,
                                         "inspirations per seed (M)"),
                 &is_params.per_seed, "per-seed");
    overlay.bind(inspire_cmd->add_option("--seed", is_params.seed,
                                         "clustering RNG seed"),
                 &is_params.seed, "seed");
    overlay.bind(inspire_cmd->add_option("--max-len", is_max_len), &is_max_len,
                 "max-len");
    inspire_cmd->add_option("--out", is_out);

    // gradcheck
    auto* grad_cmd =
        app.add_subcommand("gradcheck", "finite-difference gradient check");
    std::uint64_t gc_seed = 7;
    int gc_hidden = 4, gc_dim = 6, gc_len = 5, gc_trials = 3;
    double gc_eps = 1e-4, gc_lambda = 0.4;
    overlay.bind(grad_cmd->add_option("--seed", gc_seed), &gc_seed, "seed");
    grad_cmd->add_option("--hidden", gc_hidden);
    grad_cmd->add_option("--dim", gc_dim);
    grad_cmd->add_option("--len", gc_len);
    grad_cmd->add_option("--eps", gc_eps);
    grad_cmd->add_option("--trials", gc_trials);
    grad_cmd->add_option("--lambda", gc_lambda);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    SyntheticSpec sy_spec;
    std::string sy_out = "synth";
    synth_cmd->add_option("--out-dir", sy_out);
    overlay.bind(synth_cmd->add_option("--purpose-pools", sy_spec.purpose_pools),
                 &sy_spec.purpose_pools, "purpose-pools");
    overlay.bind(synth_cmd->add_option("--mechanism-pools", sy_spec.mechanism_pools),
                 &sy_spec.mechanism_pools, "mechanism-pools");
    overlay.bind(synth_cmd->add_option("--tokens-per-pool", sy_spec.tokens_per_pool),
                 &sy_spec.tokens_per_pool, "tokens-per-pool");
    overlay.bind(
        synth_cmd->add_option("--products-per-combo", sy_spec.products_per_combo),
        &sy_spec.products_per_combo, "products-per-combo");
    overlay.bind(synth_cmd->add_option("--noise-rate", sy_spec.noise_rate),
                 &sy_spec.noise_rate, "noise-rate");
    overlay.bind(synth_cmd->add_option("--seed", sy_spec.seed), &sy_spec.seed,
                 "seed");
    overlay.bind(synth_cmd->add_option("--dim", sy_spec.dim), &sy_spec.dim, "dim");
    overlay.bind(synth_cmd->add_option("--noise-vocab", sy_spec.noise_vocab),
                 &sy_spec.noise_vocab, "noise-vocab");
    overlay.bind(synth_cmd->add_option("--annotators", sy_spec.annotators),
                 &sy_spec.annotators, "annotators");
    overlay.bind(synth_cmd->add_option("--flag-dropout", sy_spec.flag_dropout),
                 &sy_spec.flag_dropout, "flag-dropout");
    overlay.bind(synth_cmd->add_option("--negatives-per-positive",
                                       sy_spec.negatives_per_positive),
                 &sy_spec.negatives_per_positive, "negatives-per-positive");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, returns 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return 2;
    }

    try {
        if (!config_path.empty()) overlay.load(config_path);
        overlay.apply();

        if (app.got_subcommand(ingest)) {
            return cmd_ingest(in_corpus, in_annotations, in_out);
        }
        if (app.got_subcommand(targets)) {
            return cmd_targets(tg_corpus, tg_annotations, tg_vectors, tg_top_d,
                               tg_out);
        }
        if (app.got_subcommand(train_cmd)) {
            return cmd_train(tr_corpus, tr_vectors, tr_targets, tr_checkpoint,
                             tr_log, tr_hidden, tr_max_len, tr_config);
        }
        if (app.got_subcommand(predict_cmd)) {
            return cmd_predict(pd_corpus, pd_vectors, pd_checkpoint, pd_out,
                               pd_max_len);
        }
        if (app.got_subcommand(interpret_cmd)) {
            return cmd_interpret(it_corpus, it_vectors, it_encodings, it_id, it_k,
                                 it_atoms, it_threshold, it_out);
        }
        if (app.got_subcommand(query_cmd)) {
            return cmd_query(qu_encodings, qu_seed_id, qu_mode, qu_tau, qu_top,
                             qu_out);
        }
        if (app.got_subcommand(eval_cmd)) {
            return cmd_evaluate(ev_corpus, ev_vectors, ev_checkpoint, ev_labels,
                                ev_search_log, ev_methods, ev_levels, ev_out,
                                ev_max_len);
        }
        if (app.got_subcommand(inspire_cmd)) {
            return cmd_inspire(is_corpus, is_encodings, is_checkpoint, is_vectors,
                               is_params, is_max_len, is_out);
        }
        if (app.got_subcommand(grad_cmd)) {
            return cmd_gradcheck(gc_seed, gc_hidden, gc_dim, gc_len, gc_eps,
                                 gc_trials, gc_lambda);
        }
        if (app.got_subcommand(synth_cmd)) {
            return cmd_synth(sy_spec, sy_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;  // unreachable with require_subcommand(1)
}
