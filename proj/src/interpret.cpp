#include "anamine/interpret.hpp"

#include <algorithm>
#include <stdexcept>

namespace anamine {

namespace {

constexpr double kResidualTol = 1e-8;

void require_usable(const Eigen::VectorXd& v, const WordVectorStore& store) {
    if (store.size() == 0) {
        throw std::runtime_error("empty word-vector store");
    }
    if (v.norm() < 1e-12) {
        throw std::runtime_error("uninterpretable zero vector");
    }
    if (v.size() != store.dim()) {
        throw std::runtime_error("vector dimension does not match store");
    }
}

}  // namespace

std::vector<ScoredToken> nearest_words(const Eigen::VectorXd& v,
                                       const WordVectorStore& store, int k) {
    require_usable(v, store);
    if (k < 1) {
        throw std::runtime_error("k must be >= 1");
    }

    const double vn = v.norm();
    const Eigen::VectorXd dots = store.matrix() * v;
    std::vector<ScoredToken> scored;
    scored.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        const double wn = store.row_norms()(static_cast<int>(i));
        if (wn < 1e-12) continue;  // degenerate vocabulary row
        scored.push_back({store.tokens()[i], dots(static_cast<int>(i)) / (vn * wn)});
    }
    std::sort(scored.begin(), scored.end(),
              [](const ScoredToken& a, const ScoredToken& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.token < b.token;
              });
    if (scored.size() > static_cast<std::size_t>(k)) {
        scored.resize(static_cast<std::size_t>(k));
    }
    return scored;
}

Interpretation omp_sparse_code(const Eigen::VectorXd& v,
                               const WordVectorStore& store, int max_atoms,
                               double display_threshold) {
    require_usable(v, store);
    if (max_atoms < 1) {
        throw std::runtime_error("max_atoms must be >= 1");
    }

    const int dim = store.dim();
    const int vocab = static_cast<int>(store.size());

    Interpretation out;
    std::vector<int> selected;
    std::vector<char> excluded(vocab, 0);  // selected or dropped as dependent
    for (int i = 0; i < vocab; ++i) {
        if (store.row_norms()(i) < 1e-12) excluded[i] = 1;
    }

    Eigen::VectorXd residual = v;
    Eigen::VectorXd coeffs;
    while (static_cast<int>(selected.size()) < max_atoms &&
           residual.norm() >= kResidualTol) {
        // Atom with the largest |<residual, atom>| over unit-norm atoms;
        // ties broken by token order.
        int best = -1;
        double best_score = -1.0;
        for (int i = 0; i < vocab; ++i) {
            if (excluded[i]) continue;
            const double score = std::abs(store.matrix().row(i).dot(residual)) /
                                 store.row_norms()(i);
            if (score > best_score ||
                (score == best_score && best >= 0 &&
                 store.tokens()[i] < store.tokens()[best])) {
                best = i;
                best_score = score;
            }
        }
        if (best < 0) break;  // dictionary exhausted
        excluded[best] = 1;
        selected.push_back(best);

        Eigen::MatrixXd atoms(dim, selected.size());
        for (std::size_t c = 0; c < selected.size(); ++c) {
            atoms.col(static_cast<int>(c)) =
                store.matrix().row(selected[c]).transpose() /
                store.row_norms()(selected[c]);
        }
        const auto qr = atoms.colPivHouseholderQr();
        if (qr.rank() < static_cast<int>(selected.size())) {
            selected.pop_back();  // dependent atom stays excluded
            out.dropped_dependent_atom = true;
            continue;
        }
        coeffs = qr.solve(v);
        residual = v - atoms * coeffs;
    }

    for (std::size_t c = 0; c < selected.size(); ++c) {
        out.sparse_code.push_back(
            {store.tokens()[selected[c]], coeffs(static_cast<int>(c))});
    }
    for (const auto& st : out.sparse_code) {
        if (std::abs(st.score) >= display_threshold) out.display_code.push_back(st);
    }
    out.residual_norm = residual.norm();
    return out;
}

Interpretation interpret_vector(const Eigen::VectorXd& v,
                                const WordVectorStore& store, int k,
                                int max_atoms, double display_threshold) {
    Interpretation out = omp_sparse_code(v, store, max_atoms, display_threshold);
    out.nearest = nearest_words(v, store, k);
    return out;
}

}  // namespace anamine
