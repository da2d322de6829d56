#include "anamine/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "anamine/io.hpp"
#include "anamine/rng.hpp"

namespace anamine {

namespace {

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) {
    return 1.0 / (1.0 + (-x).exp());
}

std::vector<Eigen::MatrixXd*> blocks_of(EncoderParams& p) {
    std::vector<Eigen::MatrixXd*> out;
    p.visit([&](const char*, Eigen::MatrixXd& m) { out.push_back(&m); });
    return out;
}

std::vector<const Eigen::MatrixXd*> blocks_of(const EncoderParams& p) {
    std::vector<const Eigen::MatrixXd*> out;
    p.visit([&](const char*, const Eigen::MatrixXd& m) { out.push_back(&m); });
    return out;
}

// Per-direction activations, one row per step in read order.
struct DirectionCache {
    Eigen::MatrixXd z, r, n, h;  // T x H
};

// inputs must already be in this direction's read order.
DirectionCache run_direction(const GruDirection& g, const Eigen::MatrixXd& inputs) {
    const int steps = static_cast<int>(inputs.rows());
    const int hidden = static_cast<int>(g.u_z.rows());
    DirectionCache c;
    c.z.resize(steps, hidden);
    c.r.resize(steps, hidden);
    c.n.resize(steps, hidden);
    c.h.resize(steps, hidden);

    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(hidden);
    for (int t = 0; t < steps; ++t) {
        const Eigen::VectorXd x = inputs.row(t).transpose();
        const Eigen::ArrayXd z =
            sigmoid((g.w_z * x + g.u_z * h_prev + g.b_z.col(0)).array());
        const Eigen::ArrayXd r =
            sigmoid((g.w_r * x + g.u_r * h_prev + g.b_r.col(0)).array());
        const Eigen::ArrayXd n =
            ((g.w_n * x + g.u_n * (r * h_prev.array()).matrix() + g.b_n.col(0))
                 .array())
                .tanh();
        const Eigen::ArrayXd h = (1.0 - z) * n + z * h_prev.array();
        c.z.row(t) = z.transpose();
        c.r.row(t) = r.transpose();
        c.n.row(t) = n.transpose();
        c.h.row(t) = h.transpose();
        h_prev = h.matrix();
    }
    return c;
}

// Backpropagation through time for one direction. final_grad is dL/dh_T
// (T = last read step). Accumulates parameter gradients into grads.
void backward_direction(const GruDirection& g, const Eigen::MatrixXd& inputs,
                        const DirectionCache& c, const Eigen::VectorXd& final_grad,
                        GruDirection& grads) {
    const int steps = static_cast<int>(inputs.rows());
    const int hidden = static_cast<int>(g.u_z.rows());

    Eigen::ArrayXd gh = final_grad.array();
    for (int t = steps - 1; t >= 0; --t) {
        const Eigen::VectorXd x = inputs.row(t).transpose();
        const Eigen::ArrayXd z = c.z.row(t).transpose().array();
        const Eigen::ArrayXd r = c.r.row(t).transpose().array();
        const Eigen::ArrayXd n = c.n.row(t).transpose().array();
        const Eigen::ArrayXd h_prev =
            t > 0 ? Eigen::ArrayXd(c.h.row(t - 1).transpose().array())
                  : Eigen::ArrayXd(Eigen::ArrayXd::Zero(hidden));

        // h_t = (1 - z) . n + z . h_prev
        const Eigen::ArrayXd dn = gh * (1.0 - z);
        const Eigen::ArrayXd dz = gh * (h_prev - n);
        Eigen::ArrayXd gh_prev = gh * z;

        const Eigen::VectorXd da_n = (dn * (1.0 - n * n)).matrix();
        grads.w_n += da_n * x.transpose();
        grads.u_n += da_n * (r * h_prev).matrix().transpose();
        grads.b_n.col(0) += da_n;

        const Eigen::ArrayXd drh = (g.u_n.transpose() * da_n).array();
        const Eigen::ArrayXd dr = drh * h_prev;
        gh_prev += drh * r;

        const Eigen::VectorXd da_z = (dz * z * (1.0 - z)).matrix();
        const Eigen::VectorXd da_r = (dr * r * (1.0 - r)).matrix();
        grads.w_z += da_z * x.transpose();
        grads.u_z += da_z * h_prev.matrix().transpose();
        grads.b_z.col(0) += da_z;
        grads.w_r += da_r * x.transpose();
        grads.u_r += da_r * h_prev.matrix().transpose();
        grads.b_r.col(0) += da_r;

        gh_prev += (g.u_z.transpose() * da_z).array();
        gh_prev += (g.u_r.transpose() * da_r).array();
        gh = gh_prev;
    }
}

void check_example(const EncoderModel& model, const TrainExample& ex) {
    if (ex.inputs.rows() < 1) {
        throw std::runtime_error("empty input sequence" +
                                 (ex.id.empty() ? "" : " for " + ex.id));
    }
    if (ex.inputs.cols() != model.input_dim) {
        throw std::runtime_error("input dimension mismatch: expected " +
                                 std::to_string(model.input_dim) + ", got " +
                                 std::to_string(ex.inputs.cols()));
    }
    if (ex.purpose_target.size() != model.input_dim ||
        ex.mechanism_target.size() != model.input_dim) {
        throw std::runtime_error("target dimension mismatch" +
                                 (ex.id.empty() ? "" : " for " + ex.id));
    }
}

}  // namespace

GruDirection GruDirection::zeros(int input_dim, int hidden_dim) {
    GruDirection g;
    g.w_z = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    g.w_r = g.w_z;
    g.w_n = g.w_z;
    g.u_z = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    g.u_r = g.u_z;
    g.u_n = g.u_z;
    g.b_z = Eigen::MatrixXd::Zero(hidden_dim, 1);
    g.b_r = g.b_z;
    g.b_n = g.b_z;
    return g;
}

EncoderParams EncoderParams::zeros(int input_dim, int hidden_dim) {
    EncoderParams p;
    p.fwd = GruDirection::zeros(input_dim, hidden_dim);
    p.bwd = GruDirection::zeros(input_dim, hidden_dim);
    p.head_purpose = Eigen::MatrixXd::Zero(input_dim, 2 * hidden_dim);
    p.head_mechanism = p.head_purpose;
    return p;
}

EncoderModel EncoderModel::init(int input_dim, int hidden_dim, std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1) {
        throw std::runtime_error("encoder dimensions must be positive");
    }
    EncoderModel model;
    model.input_dim = input_dim;
    model.hidden_dim = hidden_dim;
    model.init_seed = seed;
    model.params = EncoderParams::zeros(input_dim, hidden_dim);

    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    model.params.visit([&](const char*, Eigen::MatrixXd& m) {
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = 0; j < m.cols(); ++j) {
                m(i, j) = rng.uniform(-bound, bound);
            }
        }
    });
    return model;
}

bool EncoderModel::finite() const {
    bool ok = true;
    params.visit([&](const char*, const Eigen::MatrixXd& m) {
        if (!m.allFinite()) ok = false;
    });
    return ok;
}

ForwardResult forward(const EncoderModel& model, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() < 1) {
        throw std::runtime_error("empty input sequence");
    }
    if (inputs.cols() != model.input_dim) {
        throw std::runtime_error("input dimension mismatch: expected " +
                                 std::to_string(model.input_dim) + ", got " +
                                 std::to_string(inputs.cols()));
    }
    const int steps = static_cast<int>(inputs.rows());
    const auto fwd = run_direction(model.params.fwd, inputs);
    const auto bwd = run_direction(model.params.bwd, inputs.colwise().reverse());

    ForwardResult out;
    out.state.resize(2 * model.hidden_dim);
    out.state.head(model.hidden_dim) = fwd.h.row(steps - 1).transpose();
    out.state.tail(model.hidden_dim) = bwd.h.row(steps - 1).transpose();
    out.purpose = model.params.head_purpose * out.state;
    out.mechanism = model.params.head_mechanism * out.state;
    return out;
}

double loss(const EncoderModel& model, const std::vector<TrainExample>& batch,
            double loss_weight) {
    if (batch.empty()) {
        throw std::runtime_error("loss over an empty batch");
    }
    const double d = static_cast<double>(model.input_dim);
    double total = 0.0;
    for (const auto& ex : batch) {
        check_example(model, ex);
        const auto out = forward(model, ex.inputs);
        const double mse_p = (out.purpose - ex.purpose_target).squaredNorm() / d;
        const double mse_m = (out.mechanism - ex.mechanism_target).squaredNorm() / d;
        total += loss_weight * mse_p + (1.0 - loss_weight) * mse_m;
    }
    return total / static_cast<double>(batch.size());
}

EncoderParams backward(const EncoderModel& model,
                       const std::vector<TrainExample>& batch,
                       double loss_weight) {
    if (batch.empty()) {
        throw std::runtime_error("backward over an empty batch");
    }
    const int hidden = model.hidden_dim;
    const double d = static_cast<double>(model.input_dim);
    const double batch_scale = 1.0 / static_cast<double>(batch.size());

    EncoderParams grads = EncoderParams::zeros(model.input_dim, hidden);
    for (const auto& ex : batch) {
        check_example(model, ex);
        const Eigen::MatrixXd reversed = ex.inputs.colwise().reverse();
        const int steps = static_cast<int>(ex.inputs.rows());
        const auto fwd = run_direction(model.params.fwd, ex.inputs);
        const auto bwd = run_direction(model.params.bwd, reversed);

        Eigen::VectorXd state(2 * hidden);
        state.head(hidden) = fwd.h.row(steps - 1).transpose();
        state.tail(hidden) = bwd.h.row(steps - 1).transpose();

        const Eigen::VectorXd p_hat = model.params.head_purpose * state;
        const Eigen::VectorXd m_hat = model.params.head_mechanism * state;
        const Eigen::VectorXd dp =
            (2.0 * loss_weight / d * batch_scale) * (p_hat - ex.purpose_target);
        const Eigen::VectorXd dm = (2.0 * (1.0 - loss_weight) / d * batch_scale) *
                                   (m_hat - ex.mechanism_target);

        grads.head_purpose += dp * state.transpose();
        grads.head_mechanism += dm * state.transpose();

        const Eigen::VectorXd dstate = model.params.head_purpose.transpose() * dp +
                                       model.params.head_mechanism.transpose() * dm;
        backward_direction(model.params.fwd, ex.inputs, fwd, dstate.head(hidden),
                           grads.fwd);
        backward_direction(model.params.bwd, reversed, bwd, dstate.tail(hidden),
                           grads.bwd);
    }

    grads.visit([&](const char* name, const Eigen::MatrixXd& m) {
        if (!m.allFinite()) {
            throw std::runtime_error(std::string("non-finite gradient in block ") +
                                     name);
        }
    });
    return grads;
}

EncoderParams finite_difference_gradients(const EncoderModel& model,
                                          const std::vector<TrainExample>& batch,
                                          double loss_weight, double epsilon) {
    EncoderModel probe = model;
    EncoderParams numeric = EncoderParams::zeros(model.input_dim, model.hidden_dim);
    auto param_blocks = blocks_of(probe.params);
    auto numeric_blocks = blocks_of(numeric);
    for (std::size_t b = 0; b < param_blocks.size(); ++b) {
        Eigen::MatrixXd& theta = *param_blocks[b];
        Eigen::MatrixXd& out = *numeric_blocks[b];
        for (int i = 0; i < theta.rows(); ++i) {
            for (int j = 0; j < theta.cols(); ++j) {
                const double saved = theta(i, j);
                theta(i, j) = saved + epsilon;
                const double up = loss(probe, batch, loss_weight);
                theta(i, j) = saved - epsilon;
                const double down = loss(probe, batch, loss_weight);
                theta(i, j) = saved;
                out(i, j) = (up - down) / (2.0 * epsilon);
            }
        }
    }
    return numeric;
}

double max_relative_gradient_error(const EncoderParams& analytic,
                                   const EncoderParams& numeric) {
    auto a_blocks = blocks_of(analytic);
    auto n_blocks = blocks_of(numeric);
    double worst = 0.0;
    for (std::size_t b = 0; b < a_blocks.size(); ++b) {
        const Eigen::MatrixXd& a = *a_blocks[b];
        const Eigen::MatrixXd& n = *n_blocks[b];
        for (int i = 0; i < a.rows(); ++i) {
            for (int j = 0; j < a.cols(); ++j) {
                const double denom =
                    std::max({1.0, std::abs(a(i, j)), std::abs(n(i, j))});
                worst = std::max(worst, std::abs(a(i, j) - n(i, j)) / denom);
            }
        }
    }
    return worst;
}

TrainLog train(EncoderModel& model, const std::vector<TrainExample>& dataset,
               const TrainConfig& config) {
    if (dataset.empty()) {
        throw std::runtime_error("training dataset is empty");
    }
    if (config.learning_rate < 0) {
        throw std::runtime_error("learning rate must be >= 0");
    }
    if (config.epochs < 1) {
        throw std::runtime_error("epochs must be >= 1");
    }
    if (config.batch_size < 1) {
        throw std::runtime_error("batch size must be >= 1");
    }
    if (config.loss_weight < 0.0 || config.loss_weight > 1.0) {
        throw std::runtime_error("loss weight must be in [0, 1]");
    }
    for (const auto& ex : dataset) check_example(model, ex);

    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;

    EncoderParams m1 = EncoderParams::zeros(model.input_dim, model.hidden_dim);
    EncoderParams m2 = EncoderParams::zeros(model.input_dim, model.hidden_dim);
    auto theta = blocks_of(model.params);
    auto m1b = blocks_of(m1);
    auto m2b = blocks_of(m2);

    Rng rng(config.seed);
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainLog log;
    long step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const EncoderParams checkpoint = model.params;
        rng.shuffle(order);

        double epoch_total = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            std::vector<TrainExample> batch;
            for (std::size_t i = start;
                 i < std::min(order.size(),
                              start + static_cast<std::size_t>(config.batch_size));
                 ++i) {
                batch.push_back(dataset[order[i]]);
            }
            const double batch_loss = loss(model, batch, config.loss_weight);
            if (!std::isfinite(batch_loss)) {
                model.params = checkpoint;  // last finite state
                throw std::runtime_error("training diverged at epoch " +
                                         std::to_string(epoch + 1) +
                                         "; model restored to previous epoch");
            }
            epoch_total += batch_loss;
            ++batches;

            EncoderParams grads = backward(model, batch, config.loss_weight);
            auto gb = blocks_of(grads);

            double sq = 0.0;
            for (auto* g : gb) sq += g->squaredNorm();
            const double norm = std::sqrt(sq);
            if (config.clip_norm > 0 && norm > config.clip_norm) {
                const double scale = config.clip_norm / norm;
                for (auto* g : gb) *g *= scale;
            }

            ++step;
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            for (std::size_t b = 0; b < theta.size(); ++b) {
                Eigen::ArrayXXd g = gb[b]->array();
                m1b[b]->array() = kBeta1 * m1b[b]->array() + (1.0 - kBeta1) * g;
                m2b[b]->array() = kBeta2 * m2b[b]->array() + (1.0 - kBeta2) * g * g;
                theta[b]->array() -=
                    config.learning_rate * (m1b[b]->array() / bc1) /
                    ((m2b[b]->array() / bc2).sqrt() + kEps);
            }
        }

        const double mean_loss = epoch_total / static_cast<double>(batches);
        if (!std::isfinite(mean_loss) || !model.finite()) {
            model.params = checkpoint;  // last finite state
            throw std::runtime_error("training diverged at epoch " +
                                     std::to_string(epoch + 1) +
                                     "; model restored to previous epoch");
        }
        log.epoch_loss.push_back(mean_loss);
    }
    return log;
}

void save_train_log(const TrainLog& log, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "epoch,mean_loss\n";
    for (std::size_t i = 0; i < log.epoch_loss.size(); ++i) {
        out << (i + 1) << ',' << format_double(log.epoch_loss[i]) << '\n';
    }
    write_text_file(path, out.str());
}

EncodedDoc predict(const EncoderModel& model, const std::string& product_id,
                   const Eigen::MatrixXd& inputs) {
    const auto out = forward(model, inputs);
    EncodedDoc doc;
    doc.product_id = product_id;
    doc.purpose_raw = out.purpose;
    doc.mechanism_raw = out.mechanism;
    const double pn = out.purpose.norm();
    const double mn = out.mechanism.norm();
    if (pn < 1e-12 || mn < 1e-12) {
        throw std::runtime_error("zero prediction vector for product " + product_id);
    }
    doc.purpose_unit = out.purpose / pn;
    doc.mechanism_unit = out.mechanism / mn;
    return doc;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json data = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& obj, const std::string& name) {
    const int rows = obj.at("rows").get<int>();
    const int cols = obj.at("cols").get<int>();
    const auto& data = obj.at("data");
    if (rows < 0 || cols < 0 ||
        data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw std::runtime_error("checkpoint block " + name + " is misshapen");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = data[k++].get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        v(static_cast<int>(i)) = arr[i].get<double>();
    }
    return v;
}

}  // namespace

void save_model(const EncoderModel& model, const std::filesystem::path& path) {
    json obj;
    obj["format"] = "anamine-encoder";
    obj["version"] = EncoderModel::kCheckpointVersion;
    obj["input_dim"] = model.input_dim;
    obj["hidden_dim"] = model.hidden_dim;
    obj["init_seed"] = model.init_seed;
    json params;
    model.params.visit([&](const char* name, const Eigen::MatrixXd& m) {
        params[name] = matrix_to_json(m);
    });
    obj["params"] = std::move(params);
    write_text_file(path, obj.dump() + "\n");
}

EncoderModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint: " + path.string());
    }
    json obj;
    try {
        in >> obj;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("corrupt checkpoint " + path.string() + ": " +
                                 e.what());
    }
    if (obj.value("format", "") != "anamine-encoder") {
        throw std::runtime_error("not an encoder checkpoint: " + path.string());
    }
    if (obj.value("version", -1) != EncoderModel::kCheckpointVersion) {
        throw std::runtime_error("unsupported checkpoint version in " + path.string() +
                                 ": " + obj.at("version").dump());
    }
    EncoderModel model;
    model.input_dim = obj.at("input_dim").get<int>();
    model.hidden_dim = obj.at("hidden_dim").get<int>();
    model.init_seed = obj.at("init_seed").get<std::uint64_t>();
    model.params = EncoderParams::zeros(model.input_dim, model.hidden_dim);
    const auto& params = obj.at("params");
    model.params.visit([&](const char* name, Eigen::MatrixXd& m) {
        if (!params.contains(name)) {
            throw std::runtime_error("checkpoint missing block " + std::string(name));
        }
        Eigen::MatrixXd loaded = matrix_from_json(params.at(name), name);
        if (loaded.rows() != m.rows() || loaded.cols() != m.cols()) {
            throw std::runtime_error("checkpoint block " + std::string(name) +
                                     " has wrong shape");
        }
        m = std::move(loaded);
    });
    if (!model.finite()) {
        throw std::runtime_error("checkpoint contains non-finite parameters: " +
                                 path.string());
    }
    return model;
}

void save_encodings(const std::vector<EncodedDoc>& docs,
                    const std::filesystem::path& path) {
    std::vector<json> rows;
    rows.reserve(docs.size());
    for (const auto& doc : docs) {
        json row;
        row["product_id"] = doc.product_id;
        row["p_hat"] = vector_to_json(doc.purpose_raw);
        row["m_hat"] = vector_to_json(doc.mechanism_raw);
        row["p_hat_unit"] = vector_to_json(doc.purpose_unit);
        row["m_hat_unit"] = vector_to_json(doc.mechanism_unit);
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

std::vector<EncodedDoc> load_encodings(const std::filesystem::path& path) {
    std::vector<EncodedDoc> docs;
    for_each_jsonl(path, [&](std::size_t line_no, const json& obj) {
        try {
            EncodedDoc doc;
            doc.product_id = obj.at("product_id").get<std::string>();
            doc.purpose_raw = vector_from_json(obj.at("p_hat"));
            doc.mechanism_raw = vector_from_json(obj.at("m_hat"));
            doc.purpose_unit = vector_from_json(obj.at("p_hat_unit"));
            doc.mechanism_unit = vector_from_json(obj.at("m_hat_unit"));
            docs.push_back(std::move(doc));
        } catch (const json::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": bad encoding record (" + e.what() + ")");
        }
    });
    return docs;
}

}  // namespace anamine
