#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anamine/vectors.hpp"

namespace anamine {

struct ScoredToken {
    std::string token;
    double score = 0.0;
};

struct Interpretation {
    std::vector<ScoredToken> nearest;      // cosine similarity, descending
    std::vector<ScoredToken> sparse_code;  // OMP coefficients, selection order
    std::vector<ScoredToken> display_code; // |alpha| >= display threshold
    double residual_norm = 0.0;
    bool dropped_dependent_atom = false;
};

// Top-k vocabulary tokens by cosine similarity to v; ties broken by token
// order. k larger than the vocabulary returns the whole vocabulary.
std::vector<ScoredToken> nearest_words(const Eigen::VectorXd& v,
                                       const WordVectorStore& store, int k = 10);

// Orthogonal Matching Pursuit over the store's vectors, each normalized to
// unit length. Greedily selects the atom with the largest |<residual, atom>|,
// re-fits all selected coefficients by least squares against v, and stops
// after max_atoms selections or once the residual norm drops below 1e-8.
// Linearly dependent selections are dropped and flagged.
Interpretation omp_sparse_code(const Eigen::VectorXd& v,
                               const WordVectorStore& store, int max_atoms = 10,
                               double display_threshold = 0.1);

// Combined two-list report for one prediction vector.
Interpretation interpret_vector(const Eigen::VectorXd& v,
                                const WordVectorStore& store, int k = 10,
                                int max_atoms = 10, double display_threshold = 0.1);

}  // namespace anamine
