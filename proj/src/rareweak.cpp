#include "ifpca/rareweak.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ifpca/parallel.hpp"
#include "ifpca/pipelines.hpp"
#include "ifpca/rng.hpp"
#include "ifpca/spectral.hpp"

namespace ifpca {

namespace {

constexpr double kBoundaryTol = 1e-9;

void check_exponents(double p, double theta, double beta) {
    if (!(p > 1.0)) throw std::invalid_argument("rareweak: p must exceed 1");
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("rareweak: theta must lie in (0,1)");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("rareweak: beta must lie in (0,1)");
    if (std::fabs(beta - 0.5) <= kBoundaryTol ||
        std::fabs(beta - (1.0 - theta / 2.0)) <= kBoundaryTol) {
        std::ostringstream msg;
        msg << "rareweak: beta=" << beta
            << " sits on a piecewise boundary (1/2 or 1 - theta/2) where the critical "
               "strength is ambiguous";
        throw std::invalid_argument(msg.str());
    }
}

double sd_or_zero(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<int> to_pm1(const std::vector<int>& labels) {
    std::vector<int> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] == 1 ? 1 : -1;
    return out;
}

}  // namespace

int RareWeakConfig::n() const {
    if (n_override) return *n_override;
    return static_cast<int>(std::llround(std::pow(static_cast<double>(p), theta)));
}

double RareWeakConfig::epsilon() const {
    if (epsilon_override) return *epsilon_override;
    return std::pow(static_cast<double>(p), -beta);
}

double RareWeakConfig::tau() const {
    if (tau_override) return *tau_override;
    return std::pow(static_cast<double>(p), -alpha);
}

RareWeakInstance generate_instance(const RareWeakConfig& config) {
    if (config.p < 1) throw std::invalid_argument("generate_instance: p must be positive");
    const int n = config.n();
    if (n < 2) throw std::invalid_argument("generate_instance: derived n must be at least 2");
    const double eps = config.epsilon();
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("generate_instance: epsilon must lie in [0,1)");
    const double tau = config.tau();
    if (!(tau >= 0.0)) throw std::invalid_argument("generate_instance: tau must be nonnegative");
    if (config.fixed_support) {
        int prev = -1;
        for (int j : *config.fixed_support) {
            if (j <= prev || j >= config.p)
                throw std::invalid_argument(
                    "generate_instance: fixed support must be strictly ascending within [0,p)");
            prev = j;
        }
    }

    // draw order: Y, then mu, then Z row-major
    Rng rng(config.seed);
    RareWeakInstance inst;
    inst.y.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) inst.y[static_cast<size_t>(i)] = rng.sign();

    inst.mu = Eigen::VectorXd::Zero(config.p);
    if (config.fixed_support) {
        for (int j : *config.fixed_support) {
            inst.mu[j] = tau * rng.sign();
            inst.support.push_back(j);
        }
    } else {
        for (int j = 0; j < config.p; ++j) {
            if (rng.uniform() < eps) {
                inst.mu[j] = tau * rng.sign();
                inst.support.push_back(j);
            }
        }
    }

    inst.x.resize(n, config.p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < config.p; ++j) inst.x(i, j) = rng.normal();
    for (int i = 0; i < n; ++i)
        inst.x.row(i) += static_cast<double>(inst.y[static_cast<size_t>(i)]) * inst.mu.transpose();
    return inst;
}

double critical_tau(double p, double theta, double beta) {
    check_exponents(p, theta, beta);
    const double n = std::pow(p, theta);
    const double s = std::pow(p, 1.0 - beta);
    if (beta < 0.5) return std::pow(p / (n * s * s), 0.25);
    if (beta < 1.0 - theta / 2.0) return std::pow(n, -0.25);
    return std::pow(s, -0.5);
}

double alpha_star(double beta, double theta) {
    check_exponents(2.0, theta, beta);  // p irrelevant to the exponent
    if (beta < 0.5) return (1.0 + theta - 2.0 * beta) / 4.0;
    if (beta < 1.0 - theta / 2.0) return theta / 4.0;
    return (1.0 - beta) / 2.0;
}

double hamming_error(const std::vector<int>& y_hat, const std::vector<int>& y) {
    if (y_hat.size() != y.size())
        throw std::invalid_argument("hamming_error: vectors differ in length");
    if (y.empty()) throw std::invalid_argument("hamming_error: empty vectors");
    int diff = 0, diff_flip = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        if (std::abs(y_hat[i]) != 1 || std::abs(y[i]) != 1)
            throw std::invalid_argument("hamming_error: values must be +-1");
        if (y_hat[i] != y[i]) ++diff;
        if (y_hat[i] != -y[i]) ++diff_flip;
    }
    return static_cast<double>(std::min(diff, diff_flip)) / static_cast<double>(y.size());
}

std::vector<double> lemma1_discrepancies(int n_rows, int m_cols, double mu_norm_sq, int reps,
                                         std::uint64_t seed) {
    if (n_rows < 2 || m_cols < 1)
        throw std::invalid_argument("lemma1: need at least 2 rows and 1 column");
    if (!(mu_norm_sq > 0.0)) throw std::invalid_argument("lemma1: mu_norm_sq must be positive");
    if (reps < 1) throw std::invalid_argument("lemma1: reps must be positive");

    const double entry = std::sqrt(mu_norm_sq / static_cast<double>(m_cols));
    const double root_n = std::sqrt(static_cast<double>(n_rows));
    std::vector<double> out;
    out.reserve(static_cast<size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        Eigen::VectorXd y(n_rows);
        for (int i = 0; i < n_rows; ++i) y[i] = rng.sign();
        Eigen::VectorXd mu(m_cols);
        for (int j = 0; j < m_cols; ++j) mu[j] = entry * rng.sign();
        Eigen::MatrixXd x(n_rows, m_cols);
        for (int i = 0; i < n_rows; ++i)
            for (int j = 0; j < m_cols; ++j) x(i, j) = rng.normal();
        x += y * mu.transpose();

        const Eigen::VectorXd xi = truncated_svd(x, 1).vectors.col(0);
        const double plus = (root_n * xi - y).lpNorm<Eigen::Infinity>();
        const double minus = (root_n * xi + y).lpNorm<Eigen::Infinity>();
        out.push_back(std::min(plus, minus));
    }
    return out;
}

double lemma1_check(int n_rows, int m_cols, double mu_norm_sq, int reps, std::uint64_t seed) {
    const std::vector<double> d = lemma1_discrepancies(n_rows, m_cols, mu_norm_sq, reps, seed);
    return *std::max_element(d.begin(), d.end());
}

std::string phase_method_name(PhaseMethod method) {
    switch (method) {
        case PhaseMethod::simplified_pca: return "simplified_pca";
        case PhaseMethod::simplified_ifpca: return "simplified_ifpca";
        case PhaseMethod::pca: return "pca";
        case PhaseMethod::ifpca: return "ifpca";
    }
    return "?";
}

PhaseMethod parse_phase_method(const std::string& name) {
    if (name == "simplified_pca" || name == "spca") return PhaseMethod::simplified_pca;
    if (name == "simplified_ifpca" || name == "sifpca") return PhaseMethod::simplified_ifpca;
    if (name == "pca") return PhaseMethod::pca;
    if (name == "ifpca") return PhaseMethod::ifpca;
    throw std::invalid_argument("unknown phase method: " + name);
}

PhaseCell simulate_method(const RareWeakConfig& base, PhaseMethod method, int reps,
                          const PhaseGridOptions& options, std::uint64_t cell_index,
                          const NullTables* tables) {
    if (reps < 1) throw std::invalid_argument("simulate_method: reps must be positive");

    NullCdfTable sv_local;
    NullTables tables_local;
    if (!tables && method == PhaseMethod::ifpca) {
        sv_local = load_or_build_null_cdf(base.n(), options.null_b, options.null_seed,
                                          StatKind::studentized_value);
        tables_local.studentized = &sv_local;
        tables = &tables_local;
    }

    std::vector<double> hams(static_cast<size_t>(reps));
    std::vector<double> exact(static_cast<size_t>(reps),
                              std::numeric_limits<double>::quiet_NaN());
    std::vector<int> no_sel(static_cast<size_t>(reps), 0);

    parallel_for(options.jobs, reps, [&](int rep) {
        RareWeakConfig config = base;
        config.seed = derive_seed(base.seed, cell_index, static_cast<std::uint64_t>(rep));
        const RareWeakInstance inst = generate_instance(config);
        const DataMatrix data{inst.x, {}, {}};
        const size_t slot = static_cast<size_t>(rep);

        switch (method) {
            case PhaseMethod::simplified_pca: {
                const PipelineReport r = simplified_pca(data);
                hams[slot] = hamming_error(to_pm1(r.labels), inst.y);
                break;
            }
            case PhaseMethod::simplified_ifpca: {
                try {
                    const PipelineReport r = simplified_if_pca(data);
                    hams[slot] = hamming_error(to_pm1(r.labels), inst.y);
                    exact[slot] = r.retained == inst.support ? 1.0 : 0.0;
                } catch (const NoFeaturesSelected&) {
                    hams[slot] = 0.5;
                    exact[slot] = 0.0;
                    no_sel[slot] = 1;
                }
                break;
            }
            case PhaseMethod::pca: {
                MethodSpec spec;
                spec.family = MethodFamily::pca;
                spec.clustering_input = ClusteringInput::normalized;
                spec.k = 2;
                spec.repeats = 1;
                spec.seed = derive_seed(config.seed, 11);
                const PipelineReport r = run_method(data, spec);
                hams[slot] = hamming_error(to_pm1(r.labels), inst.y);
                break;
            }
            case PhaseMethod::ifpca: {
                MethodSpec spec;
                spec.family = MethodFamily::ifpca;
                spec.clustering_input = ClusteringInput::normalized;
                spec.k = 2;
                spec.repeats = 1;
                spec.seed = derive_seed(config.seed, 12);
                spec.null_b = options.null_b;
                spec.null_seed = options.null_seed;
                const PipelineReport r = run_method(data, spec, nullptr, tables);
                hams[slot] = hamming_error(to_pm1(r.labels), inst.y);
                exact[slot] = r.retained == inst.support ? 1.0 : 0.0;
                break;
            }
        }
    });

    PhaseCell cell;
    cell.beta = base.beta;
    cell.alpha = base.alpha;
    cell.method = phase_method_name(method);
    cell.reps = reps;
    cell.hamming_mean = std::accumulate(hams.begin(), hams.end(), 0.0) / static_cast<double>(reps);
    cell.hamming_sd = sd_or_zero(hams);
    double ex_sum = 0.0;
    bool has_exact = true;
    for (double e : exact) {
        if (std::isnan(e)) {
            has_exact = false;
            break;
        }
        ex_sum += e;
    }
    cell.select_exact_rate = has_exact ? ex_sum / static_cast<double>(reps)
                                       : std::numeric_limits<double>::quiet_NaN();
    for (int f : no_sel) cell.no_selection_count += f;
    return cell;
}

std::vector<PhaseCell> run_phase_grid(int p, double theta, const std::vector<double>& beta_grid,
                                      const std::vector<double>& alpha_grid,
                                      const std::vector<PhaseMethod>& methods, int reps,
                                      std::uint64_t base_seed, const PhaseGridOptions& options) {
    if (beta_grid.empty() || alpha_grid.empty() || methods.empty())
        throw std::invalid_argument("run_phase_grid: grids and methods must be nonempty");
    if (reps < 1) throw std::invalid_argument("run_phase_grid: reps must be positive");
    if (p < 2 || !(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("run_phase_grid: need p >= 2 and theta in (0,1)");

    // nudge betas off the piecewise boundaries of the critical strength
    std::vector<double> betas = beta_grid;
    for (double& b : betas) {
        if (std::fabs(b - 0.5) <= kBoundaryTol) b += 1e-6;
        if (std::fabs(b - (1.0 - theta / 2.0)) <= kBoundaryTol) b += 1e-6;
    }

    const int n = static_cast<int>(std::llround(std::pow(static_cast<double>(p), theta)));
    const bool need_tables =
        std::find(methods.begin(), methods.end(), PhaseMethod::ifpca) != methods.end();
    NullCdfTable sv_table;
    NullTables tables;
    if (need_tables) {
        sv_table = load_or_build_null_cdf(n, options.null_b, options.null_seed,
                                          StatKind::studentized_value);
        tables.studentized = &sv_table;
    }

    std::vector<PhaseCell> cells;
    int cell_index = 0;
    for (double beta : betas) {
        for (double alpha : alpha_grid) {
            RareWeakConfig config;
            config.p = p;
            config.theta = theta;
            config.beta = beta;
            config.alpha = alpha;
            config.seed = base_seed;
            for (PhaseMethod method : methods)
                cells.push_back(simulate_method(config, method, reps, options,
                                                static_cast<std::uint64_t>(cell_index),
                                                need_tables ? &tables : nullptr));
            ++cell_index;
        }
    }
    std::sort(cells.begin(), cells.end(), [](const PhaseCell& a, const PhaseCell& b) {
        if (a.beta != b.beta) return a.beta < b.beta;
        if (a.alpha != b.alpha) return a.alpha < b.alpha;
        return a.method < b.method;
    });
    return cells;
}

std::string phase_grid_csv(const std::vector<PhaseCell>& cells) {
    std::string out = "beta,alpha,method,reps,hamming_mean,hamming_sd,select_exact_rate\n";
    char buf[160];
    for (const PhaseCell& c : cells) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%s,%d,%.10g,%.10g,", c.beta, c.alpha,
                      c.method.c_str(), c.reps, c.hamming_mean, c.hamming_sd);
        out += buf;
        if (!std::isnan(c.select_exact_rate)) {
            std::snprintf(buf, sizeof(buf), "%.10g", c.select_exact_rate);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace ifpca
