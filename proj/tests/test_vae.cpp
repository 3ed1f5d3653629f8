#include <cmath>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "ifpca/rng.hpp"
#include "ifpca/vae.hpp"
#include "test_util.hpp"

using namespace ifpca;

namespace {

VaeHyper tiny_hyper(std::uint64_t seed) {
    VaeHyper h;
    h.d = 3;
    h.hidden = 5;
    h.epochs = 10;
    h.batches = 4;
    h.learning_rate = 1e-3;
    h.seed = seed;
    return h;
}

Eigen::MatrixXd unit_batch(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform();
    return m;
}

Eigen::MatrixXd noise_like(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
    return m;
}

double max_param_abs(const VaeParams& p) {
    double best = 0.0;
    for (const Eigen::MatrixXd* m : {&p.w_enc, &p.w_mu, &p.w_logvar, &p.w_dec, &p.w_out})
        best = std::max(best, m->lpNorm<Eigen::Infinity>());
    return best;
}

}  // namespace

TEST_SUITE("vae") {

TEST_CASE("init_vae shapes, bias zeroing, and fan-in radii") {
    const VaeHyper h = tiny_hyper(4);
    const VaeParams p = init_vae(7, h);
    CHECK(p.input_width() == 7);
    CHECK(p.hidden_width() == 5);
    CHECK(p.latent_dim() == 3);
    CHECK(p.w_enc.rows() == 7);
    CHECK(p.w_enc.cols() == 5);
    CHECK(p.w_out.rows() == 5);
    CHECK(p.w_out.cols() == 7);
    CHECK(p.b_enc.isZero());
    CHECK(p.b_out.isZero());
    CHECK(p.in_min.isZero());
    CHECK(p.in_range.isOnes());

    CHECK(p.w_enc.lpNorm<Eigen::Infinity>() <= 1.0 / std::sqrt(7.0));
    CHECK(p.w_mu.lpNorm<Eigen::Infinity>() <= 1.0 / std::sqrt(5.0));
    CHECK(p.w_dec.lpNorm<Eigen::Infinity>() <= 1.0 / std::sqrt(3.0));
    CHECK(p.w_enc.lpNorm<Eigen::Infinity>() > 0.0);

    const VaeParams q = init_vae(7, h);
    CHECK(p.w_enc == q.w_enc);  // same seed, same init
    VaeHyper h2 = h;
    h2.seed = 5;
    CHECK(init_vae(7, h2).w_enc != p.w_enc);
}

TEST_CASE("analytic gradients match central finite differences") {
    const VaeHyper h = tiny_hyper(11);
    const Eigen::MatrixXd batch = unit_batch(4, 7, 21);
    const Eigen::MatrixXd noise = noise_like(4, 3, 22);
    const double step = 1e-5;

    for (std::uint64_t point = 0; point < 3; ++point) {
        VaeHyper hp = h;
        hp.seed = 100 + point;
        VaeParams params = init_vae(7, hp);
        VaeGradients grads;
        elbo_and_gradients(params, batch, noise, grads);

        const auto check_block = [&](Eigen::MatrixXd& block, const Eigen::MatrixXd& grad) {
            REQUIRE(grad.rows() == block.rows());
            REQUIRE(grad.cols() == block.cols());
            for (Eigen::Index i = 0; i < block.size(); ++i) {
                const double orig = block(i);
                VaeGradients scratch;
                block(i) = orig + step;
                const double up = elbo_and_gradients(params, batch, noise, scratch);
                block(i) = orig - step;
                const double dn = elbo_and_gradients(params, batch, noise, scratch);
                block(i) = orig;
                const double fd = (up - dn) / (2.0 * step);
                const double scale = std::max({std::fabs(fd), std::fabs(grad(i)), 1e-6});
                CHECK(std::fabs(fd - grad(i)) / scale < 1e-4);
            }
        };
        const auto check_vector = [&](Eigen::VectorXd& block, const Eigen::VectorXd& grad) {
            REQUIRE(grad.size() == block.size());
            for (Eigen::Index i = 0; i < block.size(); ++i) {
                const double orig = block(i);
                VaeGradients scratch;
                block(i) = orig + step;
                const double up = elbo_and_gradients(params, batch, noise, scratch);
                block(i) = orig - step;
                const double dn = elbo_and_gradients(params, batch, noise, scratch);
                block(i) = orig;
                const double fd = (up - dn) / (2.0 * step);
                const double scale = std::max({std::fabs(fd), std::fabs(grad(i)), 1e-6});
                CHECK(std::fabs(fd - grad(i)) / scale < 1e-4);
            }
        };

        check_block(params.w_enc, grads.w_enc);
        check_block(params.w_mu, grads.w_mu);
        check_block(params.w_logvar, grads.w_logvar);
        check_block(params.w_dec, grads.w_dec);
        check_block(params.w_out, grads.w_out);
        check_vector(params.b_enc, grads.b_enc);
        check_vector(params.b_mu, grads.b_mu);
        check_vector(params.b_logvar, grads.b_logvar);
        check_vector(params.b_dec, grads.b_dec);
        check_vector(params.b_out, grads.b_out);
    }
}

TEST_CASE("loss is nonnegative and duplication-invariant") {
    const VaeHyper h = tiny_hyper(2);
    const VaeParams params = init_vae(6, h);
    const Eigen::MatrixXd batch = unit_batch(5, 6, 31);
    const Eigen::MatrixXd noise = noise_like(5, 3, 32);

    VaeGradients g1;
    const double loss = elbo_and_gradients(params, batch, noise, g1);
    CHECK(loss >= 0.0);  // cross-entropy and KL are both nonnegative

    Eigen::MatrixXd batch2(10, 6), noise2(10, 3);
    batch2 << batch, batch;
    noise2 << noise, noise;
    VaeGradients g2;
    const double loss2 = elbo_and_gradients(params, batch2, noise2, g2);
    CHECK(loss2 == doctest::Approx(loss).epsilon(1e-12));
    CHECK((g2.w_enc - g1.w_enc).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((g2.b_out - g1.b_out).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("elbo_and_gradients validates dimensions and range") {
    const VaeHyper h = tiny_hyper(3);
    const VaeParams params = init_vae(6, h);
    VaeGradients g;
    CHECK_THROWS_AS(
        elbo_and_gradients(params, unit_batch(4, 5, 1), noise_like(4, 3, 2), g),
        std::invalid_argument);
    CHECK_THROWS_AS(
        elbo_and_gradients(params, unit_batch(4, 6, 1), noise_like(3, 3, 2), g),
        std::invalid_argument);
    Eigen::MatrixXd out_of_range = unit_batch(4, 6, 1);
    out_of_range(0, 0) = 1.5;
    CHECK_THROWS_AS(elbo_and_gradients(params, out_of_range, noise_like(4, 3, 2), g),
                    std::invalid_argument);
}

TEST_CASE("training reduces the loss and is reproducible") {
    testutil::PlantedData d = testutil::make_two_class(40, 12, 4, 2.0, 0.5, 55);
    VaeHyper h = tiny_hyper(7);
    h.epochs = 40;
    h.hidden = 8;

    const TrainedVae a = train_vae(d.x, h);
    REQUIRE(a.epoch_losses.size() == 40);
    CHECK(a.epoch_losses.back() < a.epoch_losses.front());
    for (double l : a.epoch_losses) CHECK(std::isfinite(l));
    CHECK(std::isfinite(max_param_abs(a.params)));

    const TrainedVae b = train_vae(d.x, h);
    CHECK(a.epoch_losses == b.epoch_losses);  // bitwise reproducible
    CHECK(a.params.w_out == b.params.w_out);
}

TEST_CASE("training captures per-feature min-max scaling") {
    Eigen::MatrixXd data(8, 3);
    data.col(0) = Eigen::VectorXd::LinSpaced(8, -2.0, 6.0);
    data.col(1) = Eigen::VectorXd::Constant(8, 4.2);  // constant feature
    data.col(2) = Eigen::VectorXd::LinSpaced(8, 10.0, 12.0);
    VaeHyper h = tiny_hyper(1);
    h.epochs = 2;
    h.batches = 2;
    const TrainedVae t = train_vae(data, h);
    CHECK(t.params.in_min[0] == -2.0);
    CHECK(t.params.in_range[0] == 8.0);
    CHECK(t.params.in_range[1] == 0.0);  // marks the constant feature
    CHECK(t.params.in_min[2] == 10.0);
    CHECK(t.params.in_range[2] == 2.0);

    // encode accepts original-scale data and yields n x d posteriors
    const LatentEmbedding emb = encode(t.params, data);
    CHECK(emb.means.rows() == 8);
    CHECK(emb.means.cols() == 3);
    CHECK(emb.log_vars.rows() == 8);
    CHECK(emb.means.allFinite());

    Eigen::MatrixXd wrong(8, 2);
    wrong.setZero();
    CHECK_THROWS_AS(encode(t.params, wrong), std::invalid_argument);
}

TEST_CASE("train_vae rejects impossible batch splits") {
    VaeHyper h = tiny_hyper(1);
    h.batches = 10;
    CHECK_THROWS_AS(train_vae(unit_batch(6, 4, 3), h), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    testutil::ScratchDir dir("ifpca_vae");
    testutil::PlantedData d = testutil::make_two_class(20, 9, 3, 1.5, 0.5, 77);
    VaeHyper h = tiny_hyper(9);
    h.epochs = 3;
    const TrainedVae t = train_vae(d.x, h);

    const std::string path = dir.file("model.txt");
    save_vae(t.params, path);
    const VaeParams back = load_vae(path);
    CHECK(back.w_enc == t.params.w_enc);
    CHECK(back.w_mu == t.params.w_mu);
    CHECK(back.w_logvar == t.params.w_logvar);
    CHECK(back.w_dec == t.params.w_dec);
    CHECK(back.w_out == t.params.w_out);
    CHECK(back.b_enc == t.params.b_enc);
    CHECK(back.b_mu == t.params.b_mu);
    CHECK(back.b_logvar == t.params.b_logvar);
    CHECK(back.b_dec == t.params.b_dec);
    CHECK(back.b_out == t.params.b_out);
    CHECK(back.in_min == t.params.in_min);
    CHECK(back.in_range == t.params.in_range);

    // encoding from the reloaded checkpoint is identical
    const LatentEmbedding e1 = encode(t.params, d.x);
    const LatentEmbedding e2 = encode(back, d.x);
    CHECK(e1.means == e2.means);

    std::ofstream(path) << "vae_checkpoint,1\nw_enc,2,2\n1 2\n";
    CHECK_THROWS_AS(load_vae(path), std::runtime_error);
}

}  // TEST_SUITE
