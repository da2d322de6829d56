#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace anamine {

// One direction of the bidirectional GRU. Gate equations, h_0 = 0:
//   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
//   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
//   n_t = tanh(Wn x_t + Un (r_t . h_{t-1}) + bn)
//   h_t = (1 - z_t) . n_t + z_t . h_{t-1}
struct GruDirection {
    Eigen::MatrixXd w_z, w_r, w_n;  // H x d
    Eigen::MatrixXd u_z, u_r, u_n;  // H x H
    Eigen::MatrixXd b_z, b_r, b_n;  // H x 1

    static GruDirection zeros(int input_dim, int hidden_dim);
};

// Every trainable block. Shared by the model, gradients, and optimizer
// moments so one visitor walks them all in a fixed order.
struct EncoderParams {
    GruDirection fwd, bwd;
    Eigen::MatrixXd head_purpose;    // d x 2H
    Eigen::MatrixXd head_mechanism;  // d x 2H

    static EncoderParams zeros(int input_dim, int hidden_dim);

    template <typename Fn>
    void visit(Fn&& fn) {
        fn("fwd.w_z", fwd.w_z); fn("fwd.w_r", fwd.w_r); fn("fwd.w_n", fwd.w_n);
        fn("fwd.u_z", fwd.u_z); fn("fwd.u_r", fwd.u_r); fn("fwd.u_n", fwd.u_n);
        fn("fwd.b_z", fwd.b_z); fn("fwd.b_r", fwd.b_r); fn("fwd.b_n", fwd.b_n);
        fn("bwd.w_z", bwd.w_z); fn("bwd.w_r", bwd.w_r); fn("bwd.w_n", bwd.w_n);
        fn("bwd.u_z", bwd.u_z); fn("bwd.u_r", bwd.u_r); fn("bwd.u_n", bwd.u_n);
        fn("bwd.b_z", bwd.b_z); fn("bwd.b_r", bwd.b_r); fn("bwd.b_n", bwd.b_n);
        fn("head_purpose", head_purpose);
        fn("head_mechanism", head_mechanism);
    }
    template <typename Fn>
    void visit(Fn&& fn) const {
        const_cast<EncoderParams*>(this)->visit(
            [&](const char* name, Eigen::MatrixXd& m) { fn(name, m); });
    }
};

struct EncoderModel {
    int input_dim = 0;
    int hidden_dim = 0;
    EncoderParams params;
    std::uint64_t init_seed = 0;

    static constexpr int kCheckpointVersion = 1;

    // Uniform init in [-1/sqrt(H), 1/sqrt(H)], deterministic given seed.
    static EncoderModel init(int input_dim, int hidden_dim, std::uint64_t seed);

    bool finite() const;
};

struct ForwardResult {
    Eigen::VectorXd state;      // [fwd final; bwd final], 2H
    Eigen::VectorXd purpose;    // head_purpose * state
    Eigen::VectorXd mechanism;  // head_mechanism * state
};

// inputs: one row per token, T x d, T >= 1.
ForwardResult forward(const EncoderModel& model, const Eigen::MatrixXd& inputs);

struct TrainExample {
    std::string id;
    Eigen::MatrixXd inputs;            // T x d
    Eigen::VectorXd purpose_target;    // d, unit norm
    Eigen::VectorXd mechanism_target;  // d, unit norm
};

// Mean over the batch of
//   loss_weight * MSE(p_hat, p) + (1 - loss_weight) * MSE(m_hat, m)
// with MSE the mean squared error over the d components.
double loss(const EncoderModel& model, const std::vector<TrainExample>& batch,
            double loss_weight);

// Analytic gradients of loss() via backpropagation through time.
// Throws if any gradient block contains a non-finite value.
EncoderParams backward(const EncoderModel& model,
                       const std::vector<TrainExample>& batch,
                       double loss_weight);

// Central finite differences of loss(); uses only the forward path, so it
// is an independent check of backward().
EncoderParams finite_difference_gradients(const EncoderModel& model,
                                          const std::vector<TrainExample>& batch,
                                          double loss_weight, double epsilon = 1e-4);

// max over parameters of |a - n| / max(1, |a|, |n|).
double max_relative_gradient_error(const EncoderParams& analytic,
                                   const EncoderParams& numeric);

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 1;
    int batch_size = 32;
    double clip_norm = 5.0;  // global gradient norm
    std::uint64_t seed = 0;
    double loss_weight = 0.5;  // purpose share of the loss
};

struct TrainLog {
    std::vector<double> epoch_loss;  // mean of batch losses per epoch
};

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) with global-norm clipping.
// Deterministic given config.seed. On a non-finite epoch loss the model is
// restored to the last finite epoch and a runtime_error is thrown.
TrainLog train(EncoderModel& model, const std::vector<TrainExample>& dataset,
               const TrainConfig& config);

void save_train_log(const TrainLog& log, const std::filesystem::path& path);

struct EncodedDoc {
    std::string product_id;
    Eigen::VectorXd purpose_raw, mechanism_raw;
    Eigen::VectorXd purpose_unit, mechanism_unit;
};

EncodedDoc predict(const EncoderModel& model, const std::string& product_id,
                   const Eigen::MatrixXd& inputs);

// Versioned JSON checkpoint; save -> load round-trips to bitwise-identical
// parameters.
void save_model(const EncoderModel& model, const std::filesystem::path& path);
EncoderModel load_model(const std::filesystem::path& path);

void save_encodings(const std::vector<EncodedDoc>& docs,
                    const std::filesystem::path& path);
std::vector<EncodedDoc> load_encodings(const std::filesystem::path& path);

}  // namespace anamine
