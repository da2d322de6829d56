#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anamine/corpus.hpp"
#include "anamine/retrieval.hpp"
#include "anamine/vectors.hpp"

namespace anamine {

// Desk-scale corpus with planted purpose/mechanism structure: every product
// draws its tokens from one purpose pool and one mechanism pool plus noise,
// and the toy word vectors place each pool's tokens in a tight cluster.
struct SyntheticSpec {
    int purpose_pools = 4;
    int mechanism_pools = 3;
    int tokens_per_pool = 20;
    int products_per_combo = 50;  // per (purpose, mechanism) pair
    double noise_rate = 0.3;      // fraction of noise tokens per product
    std::uint64_t seed = 1;

    int dim = 32;
    int noise_vocab = 500;
    int purpose_tokens_per_product = 4;
    int mechanism_tokens_per_product = 4;
    int annotators = 4;
    double flag_dropout = 0.2;  // per-annotator chance of missing a flag
    double negatives_per_positive = 1.0;
    // Mechanism pool centers share this pairwise dot product, so pairs that
    // differ in mechanism still sit measurably closer than unrelated ones.
    double mechanism_center_overlap = 0.35;
    double jitter = 0.08;  // within-pool token spread
};

struct SyntheticData {
    Corpus corpus;
    std::vector<AnnotationSet> annotations;
    WordVectorStore store;  // doc frequencies already set
    std::vector<AnalogyPairLabel> labels;
    // ground truth, by corpus order
    std::vector<int> purpose_pool_of;
    std::vector<int> mechanism_pool_of;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// corpus.jsonl, annotations.jsonl, vectors.txt, labels.jsonl and
// synth_manifest.json under out_dir.
void write_synthetic(const SyntheticData& data, const SyntheticSpec& spec,
                     const std::filesystem::path& out_dir);

}  // namespace anamine
