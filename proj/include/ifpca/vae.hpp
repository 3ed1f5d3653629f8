#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ifpca {

struct VaeHyper {
    int d = 25;         // latent dimension
    int hidden = 128;   // hidden width (both sides)
    int epochs = 100;
    int batches = 50;   // mini-batches per epoch
    double learning_rate = 5e-4;
    std::uint64_t seed = 0;
};

// One-hidden-layer encoder (ReLU, mean/log-variance heads) and decoder
// (ReLU hidden, sigmoid output), plus the per-feature [0,1] input scaling
// captured at training time.
struct VaeParams {
    Eigen::MatrixXd w_enc;     // p x hidden
    Eigen::VectorXd b_enc;     // hidden
    Eigen::MatrixXd w_mu;      // hidden x d
    Eigen::VectorXd b_mu;      // d
    Eigen::MatrixXd w_logvar;  // hidden x d
    Eigen::VectorXd b_logvar;  // d
    Eigen::MatrixXd w_dec;     // d x hidden
    Eigen::VectorXd b_dec;     // hidden
    Eigen::MatrixXd w_out;     // hidden x p
    Eigen::VectorXd b_out;     // p
    Eigen::VectorXd in_min;    // p, per-feature minimum seen at training
    Eigen::VectorXd in_range;  // p, max - min; 0 marks a constant feature

    int input_width() const { return static_cast<int>(w_enc.rows()); }
    int hidden_width() const { return static_cast<int>(w_enc.cols()); }
    int latent_dim() const { return static_cast<int>(w_mu.cols()); }
};

struct VaeGradients {
    Eigen::MatrixXd w_enc, w_mu, w_logvar, w_dec, w_out;
    Eigen::VectorXd b_enc, b_mu, b_logvar, b_dec, b_out;
};

struct LatentEmbedding {
    Eigen::MatrixXd means;     // n x d
    Eigen::MatrixXd log_vars;  // n x d
};

// Weights uniform on +-1/sqrt(fan-in), biases zero; scaling slots sized but
// neutral (min 0, range 1) until training fills them.
VaeParams init_vae(int p_in, const VaeHyper& hyper);

// Negative evidence lower bound for one mini-batch (rows already in [0,1])
// under the reparameterized latent draw z = mean + exp(log_var/2) * noise,
// averaged over the batch, together with exact gradients for that draw.
// Loss = Bernoulli cross-entropy reconstruction + KL(posterior || N(0, I)).
double elbo_and_gradients(const VaeParams& params, const Eigen::MatrixXd& batch,
                          const Eigen::MatrixXd& noise, VaeGradients& grads);

struct TrainedVae {
    VaeParams params;
    std::vector<double> epoch_losses;  // mean mini-batch loss per epoch
};

// Min-max scales each feature to [0,1] (constant features to 0.5), then runs
// epochs x batches plain SGD steps with fresh noise per step. Each epoch
// shuffles the rows and deals them round-robin into `batches` mini-batches.
TrainedVae train_vae(const Eigen::MatrixXd& data, const VaeHyper& hyper);

// Deterministic forward pass to the posterior means/log-variances; applies
// the stored input scaling, so it accepts data on the original scale.
LatentEmbedding encode(const VaeParams& params, const Eigen::MatrixXd& data);

// Flat text checkpoint (one block per layer, full double precision).
void save_vae(const VaeParams& params, const std::string& path);
VaeParams load_vae(const std::string& path);

}  // namespace ifpca
