#include "ifpca/vae.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ifpca/data_model.hpp"
#include "ifpca/rng.hpp"

namespace ifpca {

namespace {

void validate_hyper(const VaeHyper& h) {
    if (h.d < 1 || h.hidden < 1 || h.epochs < 1 || h.batches < 1)
        throw std::invalid_argument("vae: hyperparameters must be positive");
    if (!(h.learning_rate > 0.0 && h.learning_rate < 1.0))
        throw std::invalid_argument("vae: learning_rate must be in (0, 1)");
}

Eigen::MatrixXd uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double radius) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = radius * (2.0 * rng.uniform() - 1.0);
    return m;
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

Eigen::MatrixXd apply_scaling(const VaeParams& params, const Eigen::MatrixXd& data) {
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const double range = params.in_range[j];
        if (range > 0.0)
            out.col(j) = (data.col(j).array() - params.in_min[j]) / range;
        else
            out.col(j).setConstant(0.5);
    }
    return out;
}

bool params_finite(const VaeParams& p) {
    return p.w_enc.allFinite() && p.b_enc.allFinite() && p.w_mu.allFinite() &&
           p.b_mu.allFinite() && p.w_logvar.allFinite() && p.b_logvar.allFinite() &&
           p.w_dec.allFinite() && p.b_dec.allFinite() && p.w_out.allFinite() &&
           p.b_out.allFinite();
}

}  // namespace

VaeParams init_vae(int p_in, const VaeHyper& hyper) {
    if (p_in < 1) throw std::invalid_argument("init_vae: input width must be positive");
    validate_hyper(hyper);
    const int h = hyper.hidden, d = hyper.d;
    // one stream, blocks drawn encoder-to-decoder, entries row-major
    Rng rng(derive_seed(hyper.seed, 1));
    VaeParams p;
    p.w_enc = uniform_matrix(rng, p_in, h, 1.0 / std::sqrt(static_cast<double>(p_in)));
    p.w_mu = uniform_matrix(rng, h, d, 1.0 / std::sqrt(static_cast<double>(h)));
    p.w_logvar = uniform_matrix(rng, h, d, 1.0 / std::sqrt(static_cast<double>(h)));
    p.w_dec = uniform_matrix(rng, d, h, 1.0 / std::sqrt(static_cast<double>(d)));
    p.w_out = uniform_matrix(rng, h, p_in, 1.0 / std::sqrt(static_cast<double>(h)));
    p.b_enc = Eigen::VectorXd::Zero(h);
    p.b_mu = Eigen::VectorXd::Zero(d);
    p.b_logvar = Eigen::VectorXd::Zero(d);
    p.b_dec = Eigen::VectorXd::Zero(h);
    p.b_out = Eigen::VectorXd::Zero(p_in);
    p.in_min = Eigen::VectorXd::Zero(p_in);
    p.in_range = Eigen::VectorXd::Ones(p_in);
    return p;
}

double elbo_and_gradients(const VaeParams& params, const Eigen::MatrixXd& batch,
                          const Eigen::MatrixXd& noise, VaeGradients& grads) {
    const Eigen::Index b = batch.rows(), p = batch.cols();
    if (b < 1) throw std::invalid_argument("elbo_and_gradients: empty batch");
    if (p != params.input_width())
        throw std::invalid_argument("elbo_and_gradients: batch width does not match model");
    if (noise.rows() != b || noise.cols() != params.latent_dim())
        throw std::invalid_argument("elbo_and_gradients: noise must be batch x latent");
    if (batch.minCoeff() < -1e-9 || batch.maxCoeff() > 1.0 + 1e-9)
        throw std::invalid_argument("elbo_and_gradients: batch values must lie in [0,1]");

    // forward
    const Eigen::MatrixXd pre_h =
        (batch * params.w_enc).rowwise() + params.b_enc.transpose();
    const Eigen::MatrixXd h = pre_h.cwiseMax(0.0);
    const Eigen::MatrixXd m = (h * params.w_mu).rowwise() + params.b_mu.transpose();
    const Eigen::MatrixXd lv = (h * params.w_logvar).rowwise() + params.b_logvar.transpose();
    const Eigen::MatrixXd sd = (lv.array() / 2.0).exp();
    const Eigen::MatrixXd z = m + sd.cwiseProduct(noise);
    const Eigen::MatrixXd pre_g = (z * params.w_dec).rowwise() + params.b_dec.transpose();
    const Eigen::MatrixXd g = pre_g.cwiseMax(0.0);
    const Eigen::MatrixXd logits = (g * params.w_out).rowwise() + params.b_out.transpose();

    double recon = 0.0;
    for (Eigen::Index i = 0; i < b; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            recon += softplus(logits(i, j)) - batch(i, j) * logits(i, j);
    const double kl =
        0.5 * (m.array().square() + lv.array().exp() - 1.0 - lv.array()).sum();
    const double bd = static_cast<double>(b);
    const double loss = (recon + kl) / bd;
    if (!std::isfinite(loss))
        throw std::runtime_error("elbo_and_gradients: non-finite loss");

    // backward (exact for the supplied noise draw)
    const Eigen::MatrixXd xhat = logits.unaryExpr([](double l) { return 1.0 / (1.0 + std::exp(-l)); });
    const Eigen::MatrixXd d_logits = (xhat - batch) / bd;
    grads.w_out = g.transpose() * d_logits;
    grads.b_out = d_logits.colwise().sum().transpose();
    const Eigen::MatrixXd d_pre_g =
        (d_logits * params.w_out.transpose()).cwiseProduct(
            (pre_g.array() > 0.0).cast<double>().matrix());
    grads.w_dec = z.transpose() * d_pre_g;
    grads.b_dec = d_pre_g.colwise().sum().transpose();
    const Eigen::MatrixXd d_z = d_pre_g * params.w_dec.transpose();
    const Eigen::MatrixXd d_m = d_z + m / bd;
    const Eigen::MatrixXd d_lv =
        0.5 * d_z.cwiseProduct(noise).cwiseProduct(sd) +
        (0.5 / bd) * (lv.array().exp() - 1.0).matrix();
    grads.w_mu = h.transpose() * d_m;
    grads.b_mu = d_m.colwise().sum().transpose();
    grads.w_logvar = h.transpose() * d_lv;
    grads.b_logvar = d_lv.colwise().sum().transpose();
    const Eigen::MatrixXd d_pre_h =
        (d_m * params.w_mu.transpose() + d_lv * params.w_logvar.transpose())
            .cwiseProduct((pre_h.array() > 0.0).cast<double>().matrix());
    grads.w_enc = batch.transpose() * d_pre_h;
    grads.b_enc = d_pre_h.colwise().sum().transpose();
    return loss;
}

TrainedVae train_vae(const Eigen::MatrixXd& data, const VaeHyper& hyper) {
    validate_hyper(hyper);
    const Eigen::Index n = data.rows(), p = data.cols();
    if (n < hyper.batches)
        throw std::invalid_argument("train_vae: need at least one row per mini-batch");
    if (p < 1) throw std::invalid_argument("train_vae: empty data");

    TrainedVae out;
    out.params = init_vae(static_cast<int>(p), hyper);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double lo = data.col(j).minCoeff(), hi = data.col(j).maxCoeff();
        out.params.in_min[j] = lo;
        out.params.in_range[j] = hi - lo;
    }
    const Eigen::MatrixXd scaled = apply_scaling(out.params, data);

    Rng rng(derive_seed(hyper.seed, 2));
    std::vector<Eigen::Index> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    VaeGradients g;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        // Fisher-Yates shuffle, then deal rows round-robin into mini-batches
        for (int i = static_cast<int>(n) - 1; i > 0; --i)
            std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(rng.uniform_int(0, i))]);

        double epoch_loss = 0.0;
        for (int bi = 0; bi < hyper.batches; ++bi) {
            std::vector<Eigen::Index> rows;
            for (size_t t = static_cast<size_t>(bi); t < idx.size();
                 t += static_cast<size_t>(hyper.batches))
                rows.push_back(idx[t]);
            Eigen::MatrixXd batch(static_cast<Eigen::Index>(rows.size()), p);
            for (size_t r = 0; r < rows.size(); ++r) batch.row(static_cast<Eigen::Index>(r)) = scaled.row(rows[r]);
            Eigen::MatrixXd noise(batch.rows(), hyper.d);
            for (Eigen::Index i = 0; i < noise.rows(); ++i)
                for (Eigen::Index j = 0; j < noise.cols(); ++j) noise(i, j) = rng.normal();

            double loss;
            try {
                loss = elbo_and_gradients(out.params, batch, noise, g);
            } catch (const std::runtime_error&) {
                std::ostringstream msg;
                msg << "train_vae: loss diverged at epoch " << epoch + 1 << ", batch " << bi + 1
                    << " (completed epoch losses:";
                for (double l : out.epoch_losses) msg << " " << l;
                msg << ")";
                throw std::runtime_error(msg.str());
            }
            epoch_loss += loss;

            const double lr = hyper.learning_rate;
            out.params.w_enc -= lr * g.w_enc;
            out.params.b_enc -= lr * g.b_enc;
            out.params.w_mu -= lr * g.w_mu;
            out.params.b_mu -= lr * g.b_mu;
            out.params.w_logvar -= lr * g.w_logvar;
            out.params.b_logvar -= lr * g.b_logvar;
            out.params.w_dec -= lr * g.w_dec;
            out.params.b_dec -= lr * g.b_dec;
            out.params.w_out -= lr * g.w_out;
            out.params.b_out -= lr * g.b_out;
        }
        out.epoch_losses.push_back(epoch_loss / hyper.batches);
        if (!params_finite(out.params)) {
            std::ostringstream msg;
            msg << "train_vae: non-finite parameters after epoch " << epoch + 1
                << " (mean losses:";
            for (double l : out.epoch_losses) msg << " " << l;
            msg << ")";
            throw std::runtime_error(msg.str());
        }
    }
    return out;
}

LatentEmbedding encode(const VaeParams& params, const Eigen::MatrixXd& data) {
    if (data.cols() != params.input_width())
        throw std::invalid_argument("encode: data width does not match model");
    const Eigen::MatrixXd scaled = apply_scaling(params, data);
    const Eigen::MatrixXd h =
        ((scaled * params.w_enc).rowwise() + params.b_enc.transpose()).cwiseMax(0.0);
    LatentEmbedding e;
    e.means = (h * params.w_mu).rowwise() + params.b_mu.transpose();
    e.log_vars = (h * params.w_logvar).rowwise() + params.b_logvar.transpose();
    return e;
}

namespace {

void write_block(std::string& buf, const char* name, const Eigen::MatrixXd& m) {
    char tmp[64];
    buf += name;
    std::snprintf(tmp, sizeof(tmp), ",%lld,%lld\n", static_cast<long long>(m.rows()),
                  static_cast<long long>(m.cols()));
    buf += tmp;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(tmp, sizeof(tmp), "%.17g", m(i, j));
            if (j) buf += ' ';
            buf += tmp;
        }
        buf += '\n';
    }
}

Eigen::MatrixXd read_block(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("vae checkpoint: truncated before " + name);
    std::istringstream hdr(line);
    std::string got;
    std::getline(hdr, got, ',');
    if (got != name)
        throw std::runtime_error("vae checkpoint: expected block " + name + ", found " + got);
    std::string rs, cs;
    if (!std::getline(hdr, rs, ',') || !std::getline(hdr, cs, ','))
        throw std::runtime_error("vae checkpoint: malformed header for " + name);
    const long long rows = std::stoll(rs), cols = std::stoll(cs);
    if (rows < 1 || cols < 1) throw std::runtime_error("vae checkpoint: bad dims for " + name);
    Eigen::MatrixXd m(rows, cols);
    for (long long i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("vae checkpoint: truncated inside " + name);
        const char* s = line.c_str();
        char* end = nullptr;
        for (long long j = 0; j < cols; ++j) {
            const double v = std::strtod(s, &end);
            if (end == s) throw std::runtime_error("vae checkpoint: bad value in " + name);
            m(i, j) = v;
            s = end;
        }
    }
    return m;
}

Eigen::VectorXd read_vector(std::istream& in, const std::string& name) {
    const Eigen::MatrixXd m = read_block(in, name);
    if (m.cols() != 1)
        throw std::runtime_error("vae checkpoint: block " + name + " must have one column");
    return m.col(0);
}

}  // namespace

void save_vae(const VaeParams& params, const std::string& path) {
    std::string buf = "vae_checkpoint,1\n";
    write_block(buf, "w_enc", params.w_enc);
    write_block(buf, "b_enc", params.b_enc);
    write_block(buf, "w_mu", params.w_mu);
    write_block(buf, "b_mu", params.b_mu);
    write_block(buf, "w_logvar", params.w_logvar);
    write_block(buf, "b_logvar", params.b_logvar);
    write_block(buf, "w_dec", params.w_dec);
    write_block(buf, "b_dec", params.b_dec);
    write_block(buf, "w_out", params.w_out);
    write_block(buf, "b_out", params.b_out);
    write_block(buf, "in_min", params.in_min);
    write_block(buf, "in_range", params.in_range);
    atomic_write_text(path, buf);
}

VaeParams load_vae(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("vae checkpoint: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "vae_checkpoint,1")
        throw std::runtime_error("vae checkpoint: unrecognized header in " + path);
    VaeParams p;
    p.w_enc = read_block(in, "w_enc");
    p.b_enc = read_vector(in, "b_enc");
    p.w_mu = read_block(in, "w_mu");
    p.b_mu = read_vector(in, "b_mu");
    p.w_logvar = read_block(in, "w_logvar");
    p.b_logvar = read_vector(in, "b_logvar");
    p.w_dec = read_block(in, "w_dec");
    p.b_dec = read_vector(in, "b_dec");
    p.w_out = read_block(in, "w_out");
    p.b_out = read_vector(in, "b_out");
    p.in_min = read_vector(in, "in_min");
    p.in_range = read_vector(in, "in_range");
    if (p.w_mu.rows() != p.w_enc.cols() || p.w_logvar.rows() != p.w_enc.cols() ||
        p.w_dec.rows() != p.w_mu.cols() || p.w_out.rows() != p.w_enc.cols() ||
        p.w_out.cols() != p.w_enc.rows() || p.in_min.rows() != p.w_enc.rows() ||
        p.in_range.rows() != p.w_enc.rows())
        throw std::runtime_error("vae checkpoint: inconsistent block shapes in " + path);
    return p;
}

}  // namespace ifpca
