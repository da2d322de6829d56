#include "anamine/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <stdexcept>

#include "anamine/io.hpp"
#include "anamine/rng.hpp"

namespace anamine {

namespace {

void validate(const SyntheticSpec& spec) {
    if (spec.purpose_pools < 1 || spec.mechanism_pools < 1) {
        throw std::runtime_error("pool counts must be >= 1");
    }
    if (spec.tokens_per_pool < spec.purpose_tokens_per_product ||
        spec.tokens_per_pool < spec.mechanism_tokens_per_product) {
        throw std::runtime_error("tokens_per_pool smaller than tokens per product");
    }
    if (spec.purpose_tokens_per_product < 1 || spec.mechanism_tokens_per_product < 1) {
        throw std::runtime_error("tokens per product must be >= 1");
    }
    if (spec.products_per_combo < 1) {
        throw std::runtime_error("products_per_combo must be >= 1");
    }
    if (spec.noise_rate < 0.0 || spec.noise_rate >= 1.0) {
        throw std::runtime_error("noise_rate must be in [0, 1)");
    }
    if (spec.flag_dropout < 0.0 || spec.flag_dropout >= 1.0) {
        throw std::runtime_error("flag_dropout must be in [0, 1)");
    }
    if (spec.annotators < 1) {
        throw std::runtime_error("annotators must be >= 1");
    }
    if (spec.noise_vocab < 1) {
        throw std::runtime_error("noise_vocab must be >= 1");
    }
    if (spec.mechanism_center_overlap < 0.0 || spec.mechanism_center_overlap >= 1.0) {
        throw std::runtime_error("mechanism_center_overlap must be in [0, 1)");
    }
    if (spec.negatives_per_positive < 0.0) {
        throw std::runtime_error("negatives_per_positive must be >= 0");
    }
    // one axis per purpose pool, one per mechanism pool, one shared
    // mechanism axis, and at least one axis for noise tokens
    const int needed = spec.purpose_pools + spec.mechanism_pools + 2;
    if (spec.dim < needed) {
        throw std::runtime_error("dim must be at least " + std::to_string(needed) +
                                 " for this pool configuration");
    }
}

std::string pool_token(char prefix, int pool, int j) {
    return std::string(1, prefix) + std::to_string(pool) + "w" + std::to_string(j);
}

Eigen::VectorXd jittered_unit(const Eigen::VectorXd& center, double jitter,
                              Rng& rng) {
    Eigen::VectorXd v = center;
    for (int i = 0; i < v.size(); ++i) v(i) += jitter * rng.normal();
    const double norm = v.norm();
    return norm > 1e-12 ? Eigen::VectorXd(v / norm) : center;
}

// k distinct values from [0, n), in selection order.
std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out;
    for (int i = 0; i < k; ++i) {
        const std::size_t pick = i + rng.below(n - i);
        std::swap(pool[i], pool[pick]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);

    // Vocabulary and toy vectors. Purpose pool centers sit on their own
    // axes; mechanism pool centers blend a per-pool axis with one shared
    // axis so their pairwise dot equals mechanism_center_overlap; noise
    // tokens live in the remaining coordinates.
    std::vector<std::string> vocab;
    std::vector<Eigen::VectorXd> rows;
    std::set<std::string> seen;
    auto add_token = [&](const std::string& token, const Eigen::VectorXd& v) {
        if (!seen.insert(token).second) {
            throw std::runtime_error("synthetic pool collision on token " + token);
        }
        vocab.push_back(token);
        rows.push_back(v);
    };

    const int mech_axis0 = spec.purpose_pools;
    const int shared_axis = spec.purpose_pools + spec.mechanism_pools;
    const int noise_axis0 = shared_axis + 1;

    std::vector<std::vector<std::string>> purpose_pool(spec.purpose_pools);
    for (int g = 0; g < spec.purpose_pools; ++g) {
        Eigen::VectorXd center = Eigen::VectorXd::Zero(spec.dim);
        center(g) = 1.0;
        for (int j = 0; j < spec.tokens_per_pool; ++j) {
            const std::string token = pool_token('p', g, j);
            purpose_pool[g].push_back(token);
            add_token(token, jittered_unit(center, spec.jitter, rng));
        }
    }
    std::vector<std::vector<std::string>> mechanism_pool(spec.mechanism_pools);
    const double own = std::sqrt(1.0 - spec.mechanism_center_overlap);
    const double shared = std::sqrt(spec.mechanism_center_overlap);
    for (int h = 0; h < spec.mechanism_pools; ++h) {
        Eigen::VectorXd center = Eigen::VectorXd::Zero(spec.dim);
        center(mech_axis0 + h) = own;
        center(shared_axis) = shared;
        for (int j = 0; j < spec.tokens_per_pool; ++j) {
            const std::string token = pool_token('m', h, j);
            mechanism_pool[h].push_back(token);
            add_token(token, jittered_unit(center, spec.jitter, rng));
        }
    }
    std::vector<std::string> noise_tokens;
    for (int j = 0; j < spec.noise_vocab; ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.dim);
        for (int i = noise_axis0; i < spec.dim; ++i) v(i) = rng.normal();
        const double norm = v.norm();
        if (norm > 1e-12) v /= norm;
        const std::string token = "nw" + std::to_string(j);
        noise_tokens.push_back(token);
        add_token(token, v);
    }

    Eigen::MatrixXd mat(rows.size(), spec.dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        mat.row(static_cast<int>(i)) = rows[i].transpose();
    }

    SyntheticData data;
    data.store = WordVectorStore::from_rows(vocab, std::move(mat));

    // Products: sampled pool tokens plus noise, shuffled into one text.
    const int content = spec.purpose_tokens_per_product +
                        spec.mechanism_tokens_per_product;
    const int n_noise = static_cast<int>(std::lround(
        spec.noise_rate / (1.0 - spec.noise_rate) * content));
    const int total =
        spec.purpose_pools * spec.mechanism_pools * spec.products_per_combo;

    int next_id = 0;
    char id_buf[32];
    for (int g = 0; g < spec.purpose_pools; ++g) {
        for (int h = 0; h < spec.mechanism_pools; ++h) {
            for (int p = 0; p < spec.products_per_combo; ++p) {
                std::snprintf(id_buf, sizeof(id_buf), "prod-%05d", next_id++);

                struct Slot {
                    std::string token;
                    int role;  // 0 noise, 1 purpose, 2 mechanism
                };
                std::vector<Slot> slots;
                for (int i : sample_without_replacement(
                         spec.tokens_per_pool, spec.purpose_tokens_per_product,
                         rng)) {
                    slots.push_back({purpose_pool[g][static_cast<std::size_t>(i)], 1});
                }
                for (int i : sample_without_replacement(
                         spec.tokens_per_pool, spec.mechanism_tokens_per_product,
                         rng)) {
                    slots.push_back(
                        {mechanism_pool[h][static_cast<std::size_t>(i)], 2});
                }
                for (int i = 0; i < n_noise; ++i) {
                    slots.push_back(
                        {noise_tokens[rng.below(noise_tokens.size())], 0});
                }
                rng.shuffle(slots);

                ProductDoc doc;
                doc.id = id_buf;
                for (std::size_t t = 0; t < slots.size(); ++t) {
                    if (t) doc.text += ' ';
                    doc.text += slots[t].token;
                }
                doc.tokens = tokenize(doc.text);

                AnnotationSet set;
                set.product_id = doc.id;
                for (int a = 0; a < spec.annotators; ++a) {
                    AnnotationRecord rec;
                    rec.product_id = doc.id;
                    rec.annotator_id = "ann-" + std::to_string(a);
                    rec.purpose_flags.assign(slots.size(), 0);
                    rec.mechanism_flags.assign(slots.size(), 0);
                    for (std::size_t t = 0; t < slots.size(); ++t) {
                        if (slots[t].role == 0) continue;
                        if (rng.uniform() < spec.flag_dropout) continue;
                        if (slots[t].role == 1) {
                            rec.purpose_flags[t] = 1;
                        } else {
                            rec.mechanism_flags[t] = 1;
                        }
                    }
                    set.records.push_back(std::move(rec));
                }

                data.corpus.add(std::move(doc));
                data.annotations.push_back(std::move(set));
                data.purpose_pool_of.push_back(g);
                data.mechanism_pool_of.push_back(h);
            }
        }
    }
    data.store.set_doc_frequencies(data.corpus);

    // Positives: same purpose pool, different mechanism pool (all of them).
    // Negatives: sampled from different-purpose pairs.
    std::size_t n_positive = 0;
    for (int i = 0; i < total; ++i) {
        for (int j = i + 1; j < total; ++j) {
            if (data.purpose_pool_of[i] == data.purpose_pool_of[j] &&
                data.mechanism_pool_of[i] != data.mechanism_pool_of[j]) {
                AnalogyPairLabel label;
                label.seed_id = data.corpus.docs()[static_cast<std::size_t>(i)].id;
                label.candidate_id =
                    data.corpus.docs()[static_cast<std::size_t>(j)].id;
                label.positive = true;
                label.provenance = LabelProvenance::matched;
                data.labels.push_back(std::move(label));
                ++n_positive;
            }
        }
    }

    std::size_t diff_purpose_pairs = 0;
    for (int i = 0; i < total; ++i) {
        for (int j = i + 1; j < total; ++j) {
            if (data.purpose_pool_of[i] != data.purpose_pool_of[j]) {
                ++diff_purpose_pairs;
            }
        }
    }
    std::size_t wanted = static_cast<std::size_t>(
        std::llround(spec.negatives_per_positive * static_cast<double>(n_positive)));
    if (wanted > diff_purpose_pairs) {
        std::cerr << "warning: only " << diff_purpose_pairs
                  << " different-purpose pairs available for " << wanted
                  << " requested negatives\n";
        wanted = diff_purpose_pairs;
    }
    std::set<std::pair<int, int>> used;
    while (used.size() < wanted) {
        int i = static_cast<int>(rng.below(total));
        int j = static_cast<int>(rng.below(total));
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        if (data.purpose_pool_of[i] == data.purpose_pool_of[j]) continue;
        if (!used.insert({i, j}).second) continue;
        AnalogyPairLabel label;
        label.seed_id = data.corpus.docs()[static_cast<std::size_t>(i)].id;
        label.candidate_id = data.corpus.docs()[static_cast<std::size_t>(j)].id;
        label.positive = false;
        label.provenance = LabelProvenance::implicitly_rejected;
        data.labels.push_back(std::move(label));
    }
    return data;
}

void write_synthetic(const SyntheticData& data, const SyntheticSpec& spec,
                     const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    save_corpus(data.corpus, out_dir / "corpus.jsonl");
    save_annotations(data.annotations, data.corpus, out_dir / "annotations.jsonl");
    save_word_vectors(data.store, out_dir / "vectors.txt");
    save_labels(data.labels, out_dir / "labels.jsonl");

    std::size_t positives = 0;
    for (const auto& label : data.labels) {
        if (label.positive) ++positives;
    }
    json manifest;
    manifest["spec"] = {
        {"purpose_pools", spec.purpose_pools},
        {"mechanism_pools", spec.mechanism_pools},
        {"tokens_per_pool", spec.tokens_per_pool},
        {"products_per_combo", spec.products_per_combo},
        {"noise_rate", spec.noise_rate},
        {"seed", spec.seed},
        {"dim", spec.dim},
        {"noise_vocab", spec.noise_vocab},
        {"purpose_tokens_per_product", spec.purpose_tokens_per_product},
        {"mechanism_tokens_per_product", spec.mechanism_tokens_per_product},
        {"annotators", spec.annotators},
        {"flag_dropout", spec.flag_dropout},
        {"negatives_per_positive", spec.negatives_per_positive},
        {"mechanism_center_overlap", spec.mechanism_center_overlap},
        {"jitter", spec.jitter},
    };
    manifest["products"] = data.corpus.size();
    manifest["vocabulary"] = data.store.size();
    manifest["labels"] = data.labels.size();
    manifest["positive_labels"] = positives;
    write_text_file(out_dir / "synth_manifest.json", manifest.dump(2) + "\n");
}

}  // namespace anamine
