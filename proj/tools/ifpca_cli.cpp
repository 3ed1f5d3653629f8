// Command-line front end: clustering pipelines, the feature-count sweep, the
// Rare/Weak simulator and phase grids, null-table management, the IF-step
// feature selector, and the cross-dataset leaderboard.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ifpca/data_model.hpp"
#include "ifpca/metrics.hpp"
#include "ifpca/parallel.hpp"
#include "ifpca/pipelines.hpp"
#include "ifpca/rareweak.hpp"

using nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;
constexpr const char* kVersion = "0.1.0";

// Grid syntax: "lo:hi:step" (inclusive of lo, exclusive of hi + step/2) or a
// comma-separated list; a bare number is a singleton.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double lo = 0, hi = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(text);
        if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof())
            throw CLI::ValidationError("grid", "expected lo:hi:step, got '" + text + "'");
        if (!(step > 0)) throw CLI::ValidationError("grid", "step must be positive");
        for (double v = lo; v < hi + step / 2.0; v += step) out.push_back(v);
    } else {
        std::istringstream in(text);
        std::string item;
        while (std::getline(in, item, ',')) {
            if (item.empty()) continue;
            try {
                size_t used = 0;
                const double v = std::stod(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                out.push_back(v);
            } catch (const std::exception&) {
                throw CLI::ValidationError("grid", "bad grid value '" + item + "'");
            }
        }
    }
    if (out.empty()) throw CLI::ValidationError("grid", "empty grid '" + text + "'");
    return out;
}

std::vector<int> parse_int_grid(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_grid(text)) out.push_back(static_cast<int>(std::llround(v)));
    return out;
}

void write_json(const std::string& path, const ordered_json& j) {
    ifpca::atomic_write_text(path, j.dump(2) + "\n");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

struct DataArgs {
    std::string path;
    bool transpose = false;
    bool header = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--data", path, "numeric CSV/TSV matrix, subjects in rows")->required();
        cmd->add_flag("--transpose", transpose, "input stores subjects in columns");
        cmd->add_flag("--header", header, "first row holds column ids");
    }
    ifpca::DataMatrix load() const { return ifpca::load_matrix(path, transpose, header); }
};

struct MethodKnobs {
    std::string pvalue_mode = "literal";
    std::string hc_variant = "as_printed";
    bool x_use_k_vectors = false;
    std::int64_t null_b = 100000;
    std::uint64_t null_seed = 7;
    int jobs = ifpca::default_jobs();
    int vae_d = 25, vae_hidden = 128, vae_epochs = 100, vae_batches = 50;
    double vae_lr = 5e-4;

    void attach(CLI::App* cmd, bool with_vae) {
        cmd->add_option("--pvalue-mode", pvalue_mode, "IF-step p-value mode")
            ->check(CLI::IsMember({"literal", "null_score"}));
        cmd->add_option("--hc-variant", hc_variant, "higher-criticism curve variant")
            ->check(CLI::IsMember({"as_printed", "classic"}));
        cmd->add_flag("--x-use-k-vectors", x_use_k_vectors,
                      "raw-X IF pipelines use k singular vectors instead of k-1");
        cmd->add_option("--b", null_b, "null-table Monte Carlo size")->check(CLI::PositiveNumber);
        cmd->add_option("--null-seed", null_seed, "null-table seed");
        cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        if (with_vae) {
            cmd->add_option("--vae-d", vae_d, "VAE latent dimension");
            cmd->add_option("--vae-hidden", vae_hidden, "VAE hidden width");
            cmd->add_option("--vae-epochs", vae_epochs, "VAE training epochs");
            cmd->add_option("--vae-batches", vae_batches, "VAE mini-batches per epoch");
            cmd->add_option("--vae-lr", vae_lr, "VAE learning rate");
        }
    }
    void apply(ifpca::MethodSpec& spec) const {
        spec.pvalue_mode = pvalue_mode == "literal" ? ifpca::PvalueMode::literal
                                                    : ifpca::PvalueMode::null_score;
        spec.hc_variant = hc_variant == "as_printed" ? ifpca::HcVariant::as_printed
                                                     : ifpca::HcVariant::classic;
        spec.x_use_k_vectors = x_use_k_vectors;
        spec.null_b = null_b;
        spec.null_seed = null_seed;
        spec.jobs = jobs;
    }
    ifpca::VaeHyper hyper() const {
        ifpca::VaeHyper h;
        h.d = vae_d;
        h.hidden = vae_hidden;
        h.epochs = vae_epochs;
        h.batches = vae_batches;
        h.learning_rate = vae_lr;
        return h;
    }
};

ordered_json json_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

void run_cluster(const DataArgs& data_args, const std::string& method, int k, bool k_given,
                 const std::string& labels_path, std::uint64_t seed, int repeats,
                 const MethodKnobs& knobs, const std::string& out) {
    const ifpca::DataMatrix x = data_args.load();
    std::vector<int> truth;
    if (!labels_path.empty()) truth = ifpca::load_labels(labels_path);
    if (!truth.empty() && !k_given) k = ifpca::label_count(truth);

    ifpca::MethodSpec spec = ifpca::make_method_spec(method);
    spec.k = k;
    spec.seed = seed;
    spec.repeats = repeats;
    knobs.apply(spec);
    if (spec.family == ifpca::MethodFamily::vae || spec.family == ifpca::MethodFamily::ifvae)
        spec.vae_hyper = knobs.hyper();

    const ifpca::PipelineReport rep =
        ifpca::run_method(x, spec, truth.empty() ? nullptr : &truth);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "cluster";
    j["method"] = method;
    j["data"] = {{"path", data_args.path},
                 {"n", x.n()},
                 {"p", x.p()},
                 {"transpose", data_args.transpose},
                 {"header", data_args.header}};
    j["k"] = k;
    j["seed"] = seed;
    j["repeats"] = rep.repeat_labels.size();
    j["representative_repeat"] = rep.representative_repeat;
    j["assignment"] = rep.labels;
    j["repeat_objectives"] = rep.repeat_objectives;
    if (rep.has_if_step) {
        j["retained_count"] = rep.retained.size();
        j["threshold"] = rep.threshold;
        j["fallback_used"] = rep.fallback_used;
        j["retained"] = rep.retained;
    }
    if (!truth.empty()) {
        const ifpca::MetricsReport m = ifpca::clustering_error(rep.labels, truth, k);
        j["error_count"] = m.error_count;
        j["accuracy"] = m.accuracy;
        j["ari"] = m.ari;
        j["per_repeat_errors"] = rep.per_repeat_errors;
        j["mean_error_count"] = rep.diagnostics.at("mean_error_count");
        j["mean_error_rate"] = rep.diagnostics.at("mean_error_rate");
    }
    j["tags"] = rep.tags;
    j["diagnostics"] = rep.diagnostics;

    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json(out, j);
}

void run_sweep(const DataArgs& data_args, const std::string& labels_path, int k, bool k_given,
               const std::string& m_grid_text, const std::string& clusterer_name,
               std::uint64_t seed, int repeats, const MethodKnobs& knobs,
               const std::string& out) {
    const ifpca::DataMatrix x = data_args.load();
    const std::vector<int> truth = ifpca::load_labels(labels_path);
    if (!k_given) k = ifpca::label_count(truth);
    const std::vector<int> m_grid = parse_int_grid(m_grid_text);

    ifpca::SweepOptions options;
    options.x_use_k_vectors = knobs.x_use_k_vectors;
    options.null_b = knobs.null_b;
    options.null_seed = knobs.null_seed;
    options.jobs = knobs.jobs;
    const ifpca::SweepClusterer clusterer =
        clusterer_name == "vae" ? ifpca::SweepClusterer::vae : ifpca::SweepClusterer::pca;
    if (clusterer == ifpca::SweepClusterer::vae) options.vae_hyper = knobs.hyper();

    const std::vector<ifpca::SweepPoint> points =
        ifpca::feature_sweep(x, truth, k, m_grid, clusterer, seed, repeats, options);

    std::string csv = "m,mean_error_rate";
    for (int r = 0; r < repeats; ++r) csv += ",rep_" + std::to_string(r + 1);
    csv += "\n";
    for (const ifpca::SweepPoint& pt : points) {
        csv += std::to_string(pt.m) + "," + fmt(pt.mean_error_rate);
        for (double e : pt.repeat_error_rates) csv += "," + fmt(e);
        csv += "\n";
    }
    ifpca::atomic_write_text(out, csv);

    const auto best = std::min_element(
        points.begin(), points.end(),
        [](const auto& a, const auto& b) { return a.mean_error_rate < b.mean_error_rate; });
    std::cout << "wrote " << out << " (" << points.size() << " grid points); argmin m=" << best->m
              << " mean_error_rate=" << fmt(best->mean_error_rate) << "\n";
}

void run_simulate(int p, double theta, double beta, double alpha, std::optional<int> n_override,
                  std::optional<double> epsilon_override, std::optional<double> tau_override,
                  const std::string& method_name, int reps, std::uint64_t seed,
                  const MethodKnobs& knobs, const std::string& out) {
    ifpca::RareWeakConfig config;
    config.p = p;
    config.theta = theta;
    config.beta = beta;
    config.alpha = alpha;
    config.seed = seed;
    config.n_override = n_override;
    config.epsilon_override = epsilon_override;
    config.tau_override = tau_override;

    ifpca::PhaseGridOptions options;
    options.jobs = knobs.jobs;
    options.null_b = knobs.null_b;
    options.null_seed = knobs.null_seed;
    const ifpca::PhaseMethod method = ifpca::parse_phase_method(method_name);
    const ifpca::PhaseCell cell = ifpca::simulate_method(config, method, reps, options);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "simulate";
    j["p"] = p;
    j["theta"] = theta;
    j["beta"] = beta;
    j["alpha"] = alpha;
    j["n"] = config.n();
    j["epsilon"] = config.epsilon();
    j["tau"] = config.tau();
    j["method"] = cell.method;
    j["reps"] = reps;
    j["seed"] = seed;
    j["hamming_mean"] = cell.hamming_mean;
    j["hamming_sd"] = cell.hamming_sd;
    j["select_exact_rate"] = json_or_null(cell.select_exact_rate);
    j["no_selection_count"] = cell.no_selection_count;

    std::cout << j.dump(2) << "\n";
    if (!out.empty()) write_json(out, j);
}

void run_phase(int p, double theta, const std::string& beta_grid_text,
               const std::string& alpha_grid_text, const std::string& methods_text, int reps,
               std::uint64_t seed, const MethodKnobs& knobs, const std::string& out) {
    const std::vector<double> beta_grid = parse_grid(beta_grid_text);
    const std::vector<double> alpha_grid = parse_grid(alpha_grid_text);
    std::vector<ifpca::PhaseMethod> methods;
    {
        std::istringstream in(methods_text);
        std::string item;
        while (std::getline(in, item, ','))
            if (!item.empty()) methods.push_back(ifpca::parse_phase_method(item));
    }
    if (methods.empty()) throw CLI::ValidationError("--methods", "no methods given");

    ifpca::PhaseGridOptions options;
    options.jobs = knobs.jobs;
    options.null_b = knobs.null_b;
    options.null_seed = knobs.null_seed;
    const std::vector<ifpca::PhaseCell> cells =
        ifpca::run_phase_grid(p, theta, beta_grid, alpha_grid, methods, reps, seed, options);
    ifpca::atomic_write_text(out, ifpca::phase_grid_csv(cells));

    ordered_json meta;
    meta["schema_version"] = kSchemaVersion;
    meta["command"] = "phase";
    meta["p"] = p;
    meta["theta"] = theta;
    meta["beta_grid"] = beta_grid;
    meta["alpha_grid"] = alpha_grid;
    ordered_json names = ordered_json::array();
    for (ifpca::PhaseMethod m : methods) names.push_back(ifpca::phase_method_name(m));
    meta["methods"] = names;
    meta["reps"] = reps;
    meta["seed"] = seed;
    meta["null_b"] = knobs.null_b;
    meta["null_seed"] = knobs.null_seed;
    meta["version"] = kVersion;
    write_json(out + ".meta.json", meta);

    std::cout << "wrote " << out << " (" << cells.size() << " cells) and " << out
              << ".meta.json\n";
}

void run_null_table(int n, std::int64_t b, std::uint64_t seed, const std::string& kind_name,
                    const std::string& dir) {
    const ifpca::StatKind kind = kind_name == "ks_score" ? ifpca::StatKind::ks_score
                                                         : ifpca::StatKind::studentized_value;
    const ifpca::NullCdfTable table = ifpca::load_or_build_null_cdf(n, b, seed, kind, dir);
    namespace fs = std::filesystem;
    std::ostringstream name;
    name << "n" << n << "_B" << b << "_seed" << seed << "_" << kind_name << ".csv";
    const fs::path path =
        fs::path(dir.empty() ? ifpca::null_table_dir() : dir) / name.str();

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "null-table";
    j["path"] = path.string();
    j["n"] = table.n;
    j["b_requested"] = b;
    j["draws"] = table.size();
    j["seed"] = seed;
    j["kind"] = kind_name;
    std::cout << j.dump(2) << "\n";
}

void run_select(const DataArgs& data_args, const MethodKnobs& knobs, const std::string& out) {
    const ifpca::DataMatrix x = data_args.load();
    ifpca::MethodSpec spec;
    knobs.apply(spec);

    const ifpca::NormalizedMatrix w = ifpca::normalize_columns(x);
    const ifpca::NullCdfTable sv = ifpca::load_or_build_null_cdf(
        static_cast<int>(x.n()), spec.null_b, spec.null_seed, ifpca::StatKind::studentized_value);
    ifpca::NullCdfTable ks;
    const ifpca::NullCdfTable* ks_ptr = nullptr;
    if (spec.pvalue_mode == ifpca::PvalueMode::null_score) {
        ks = ifpca::load_or_build_null_cdf(static_cast<int>(x.n()), spec.null_b, spec.null_seed,
                                           ifpca::StatKind::ks_score);
        ks_ptr = &ks;
    }
    const ifpca::KsScoreSet scores =
        ifpca::score_features(w.values, sv, ks_ptr, spec.pvalue_mode, spec.jobs);
    const ifpca::SelectionResult sel =
        ifpca::hct(scores.pvalues, static_cast<int>(x.n()), spec.hc_variant);

    std::vector<char> keep(static_cast<size_t>(w.values.cols()), 0);
    for (int c : sel.retained) keep[static_cast<size_t>(c)] = 1;
    std::string csv = "feature,raw_ks,standardized,pvalue,retained\n";
    for (Eigen::Index c = 0; c < w.values.cols(); ++c) {
        csv += std::to_string(w.retained[static_cast<size_t>(c)]) + "," + fmt(scores.raw[c]) +
               "," + fmt(scores.standardized[c]) + "," + fmt(scores.pvalues[c]) + "," +
               (keep[static_cast<size_t>(c)] ? "1" : "0") + "\n";
    }
    ifpca::atomic_write_text(out, csv);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "select";
    j["data"] = data_args.path;
    j["n"] = x.n();
    j["p"] = x.p();
    j["scored"] = w.values.cols();
    j["dropped_constant"] = w.dropped.size();
    j["selected_count"] = sel.retained.size();
    j["threshold"] = sel.threshold;
    j["fallback_used"] = sel.fallback_used;
    j["efron_mu"] = scores.mu_star;
    j["efron_sigma"] = scores.sigma_star;
    j["out"] = out;
    std::cout << j.dump(2) << "\n";
}

void run_leaderboard(const std::string& errors_path, const std::string& out) {
    std::ifstream in(errors_path);
    if (!in) throw std::runtime_error("leaderboard: cannot open " + errors_path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("leaderboard: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';

    std::vector<std::string> datasets;
    {
        std::istringstream head(line);
        std::string cell;
        bool first = true;
        while (std::getline(head, cell, delim)) {
            if (first) {
                first = false;
                continue;  // corner cell labels the method column
            }
            datasets.push_back(cell);
        }
    }
    if (datasets.empty()) throw std::runtime_error("leaderboard: header lists no datasets");

    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, delim))
            throw std::runtime_error("leaderboard: malformed line " + std::to_string(line_no));
        names.push_back(cell);
        std::vector<double> vals;
        while (std::getline(row, cell, delim)) {
            try {
                size_t used = 0;
                const double v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
                vals.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error("leaderboard: non-numeric cell '" + cell + "' at line " +
                                         std::to_string(line_no));
            }
        }
        if (vals.size() != datasets.size())
            throw std::runtime_error("leaderboard: line " + std::to_string(line_no) + " has " +
                                     std::to_string(vals.size()) + " values, expected " +
                                     std::to_string(datasets.size()));
        rows.push_back(std::move(vals));
    }
    if (rows.size() < 2) throw std::runtime_error("leaderboard: need at least 2 method rows");

    Eigen::MatrixXd errors(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(datasets.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < datasets.size(); ++j)
            errors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    const ifpca::LeaderboardReport rep = ifpca::regret_and_rank(errors);

    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "leaderboard";
    j["datasets"] = datasets;
    ordered_json excluded = ordered_json::array();
    for (int d : rep.excluded_datasets) excluded.push_back(datasets[static_cast<size_t>(d)]);
    j["excluded_datasets"] = excluded;
    ordered_json methods = ordered_json::array();
    for (size_t i = 0; i < names.size(); ++i) {
        ordered_json m;
        m["name"] = names[i];
        m["rank_mean"] = rep.rank_mean[i];
        m["rank_sd"] = rep.rank_sd[i];
        m["regret_mean"] = json_or_null(rep.regret_mean[i]);
        m["regret_sd"] = json_or_null(rep.regret_sd[i]);
        ordered_json ranks = ordered_json::array(), regrets = ordered_json::array();
        for (Eigen::Index d = 0; d < errors.cols(); ++d) {
            ranks.push_back(rep.per_dataset_ranks(static_cast<Eigen::Index>(i), d));
            regrets.push_back(json_or_null(rep.per_dataset_regrets(static_cast<Eigen::Index>(i), d)));
        }
        m["ranks"] = ranks;
        m["regrets"] = regrets;
        methods.push_back(m);
    }
    j["methods"] = methods;

    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json(out, j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Influential-feature spectral clustering toolkit"};
    app.require_subcommand(1);

    // cluster
    auto* cluster = app.add_subcommand("cluster", "run one clustering method on a data matrix");
    DataArgs cluster_data;
    cluster_data.attach(cluster);
    std::string cluster_method;
    cluster->add_option("--method", cluster_method, "method name")
        ->required()
        ->check(CLI::IsMember({"pca", "pca-x", "ifpca", "ifpca-x", "vae", "vae-x", "ifvae",
                               "ifvae-x", "spca", "sifpca"}));
    int cluster_k = 2;
    auto* cluster_k_opt = cluster->add_option("--k", cluster_k, "number of clusters");
    std::string cluster_labels;
    cluster->add_option("--labels", cluster_labels, "ground-truth labels, one per line");
    std::uint64_t cluster_seed = 0;
    cluster->add_option("--seed", cluster_seed, "random seed");
    int cluster_repeats = 0;
    cluster->add_option("--repeats", cluster_repeats, "pipeline repeats (0 = method default)");
    std::string cluster_out;
    cluster->add_option("--out", cluster_out, "output JSON path (stdout when omitted)");
    MethodKnobs cluster_knobs;
    cluster_knobs.attach(cluster, true);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "error rate vs retained feature count");
    DataArgs sweep_data;
    sweep_data.attach(sweep);
    std::string sweep_labels;
    sweep->add_option("--labels", sweep_labels, "ground-truth labels, one per line")->required();
    int sweep_k = 2;
    auto* sweep_k_opt = sweep->add_option("--k", sweep_k, "number of clusters");
    std::string sweep_m_grid;
    sweep->add_option("--m-grid", sweep_m_grid, "feature counts, lo:hi:step or comma list")
        ->required();
    std::string sweep_clusterer = "pca";
    sweep->add_option("--clusterer", sweep_clusterer, "clustering backend")
        ->check(CLI::IsMember({"pca", "vae"}));
    std::uint64_t sweep_seed = 0;
    sweep->add_option("--seed", sweep_seed, "random seed");
    int sweep_repeats = 5;
    sweep->add_option("--repeats", sweep_repeats, "repeats per grid point")
        ->check(CLI::PositiveNumber);
    std::string sweep_out;
    sweep->add_option("--out", sweep_out, "output CSV path")->required();
    MethodKnobs sweep_knobs;
    sweep_knobs.attach(sweep, true);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo summary of one model cell");
    int sim_p = 0;
    simulate->add_option("--p", sim_p, "dimension")->required()->check(CLI::PositiveNumber);
    double sim_theta = 0, sim_beta = 0, sim_alpha = 0;
    auto* sim_theta_opt = simulate->add_option("--theta", sim_theta, "n = round(p^theta)");
    auto* sim_beta_opt = simulate->add_option("--beta", sim_beta, "epsilon = p^-beta");
    auto* sim_alpha_opt = simulate->add_option("--alpha", sim_alpha, "tau = p^-alpha");
    std::optional<int> sim_n;
    std::optional<double> sim_epsilon, sim_tau;
    simulate->add_option("--n", sim_n, "override the subject count");
    simulate->add_option("--epsilon", sim_epsilon, "override the signal fraction");
    simulate->add_option("--tau", sim_tau, "override the signal strength");
    std::string sim_method;
    simulate->add_option("--method", sim_method, "simplified_pca|simplified_ifpca|pca|ifpca")
        ->required();
    int sim_reps = 50;
    simulate->add_option("--reps", sim_reps, "Monte Carlo reps")->check(CLI::PositiveNumber);
    std::uint64_t sim_seed = 0;
    simulate->add_option("--seed", sim_seed, "base seed");
    std::string sim_out;
    simulate->add_option("--out", sim_out, "also write the JSON here");
    MethodKnobs sim_knobs;
    sim_knobs.attach(simulate, false);

    // phase
    auto* phase = app.add_subcommand("phase", "Monte Carlo phase-diagram grid");
    int phase_p = 0;
    phase->add_option("--p", phase_p, "dimension")->required()->check(CLI::PositiveNumber);
    double phase_theta = 0;
    phase->add_option("--theta", phase_theta, "n = round(p^theta)")->required();
    std::string phase_beta_grid, phase_alpha_grid, phase_methods;
    phase->add_option("--beta-grid", phase_beta_grid, "sparsity exponents, lo:hi:step")
        ->required();
    phase->add_option("--alpha-grid", phase_alpha_grid, "strength exponents, lo:hi:step")
        ->required();
    phase->add_option("--methods", phase_methods, "comma list of methods")->required();
    int phase_reps = 50;
    phase->add_option("--reps", phase_reps, "reps per cell")->check(CLI::PositiveNumber);
    std::uint64_t phase_seed = 0;
    phase->add_option("--seed", phase_seed, "base seed");
    std::string phase_out;
    phase->add_option("--out", phase_out, "output CSV path")->required();
    MethodKnobs phase_knobs;
    phase_knobs.attach(phase, false);

    // null-table
    auto* nt = app.add_subcommand("null-table", "build or load a cached Monte Carlo null table");
    int nt_n = 0;
    nt->add_option("--n", nt_n, "sample size")->required()->check(CLI::PositiveNumber);
    std::int64_t nt_b = 100000;
    nt->add_option("--b", nt_b, "Monte Carlo size")->check(CLI::PositiveNumber);
    std::uint64_t nt_seed = 7;
    nt->add_option("--seed", nt_seed, "table seed");
    std::string nt_kind = "studentized_value";
    nt->add_option("--kind", nt_kind, "statistic kind")
        ->check(CLI::IsMember({"studentized_value", "ks_score"}));
    std::string nt_dir;
    nt->add_option("--dir", nt_dir, "cache directory (default $IFPCA_NULL_TABLE_DIR or ./null-tables)");

    // select
    auto* select = app.add_subcommand("select", "IF-step feature scores and selection");
    DataArgs select_data;
    select_data.attach(select);
    std::string select_out;
    select->add_option("--out", select_out, "output CSV path")->required();
    MethodKnobs select_knobs;
    select_knobs.attach(select, false);

    // leaderboard
    auto* lb = app.add_subcommand("leaderboard", "regret/rank summary of an error table");
    std::string lb_errors, lb_out;
    lb->add_option("--errors", lb_errors,
                   "CSV: header row of dataset names, one method per row (name first)")
        ->required();
    lb->add_option("--out", lb_out, "output JSON path (stdout when omitted)");

    try {
        app.parse(argc, argv);

        if (app.got_subcommand(cluster)) {
            run_cluster(cluster_data, cluster_method, cluster_k, cluster_k_opt->count() > 0,
                        cluster_labels, cluster_seed, cluster_repeats, cluster_knobs,
                        cluster_out);
        } else if (app.got_subcommand(sweep)) {
            run_sweep(sweep_data, sweep_labels, sweep_k, sweep_k_opt->count() > 0, sweep_m_grid,
                      sweep_clusterer, sweep_seed, sweep_repeats, sweep_knobs, sweep_out);
        } else if (app.got_subcommand(simulate)) {
            if (!sim_n && sim_theta_opt->count() == 0)
                throw CLI::ValidationError("simulate", "need --theta or --n");
            if (!sim_epsilon && sim_beta_opt->count() == 0)
                throw CLI::ValidationError("simulate", "need --beta or --epsilon");
            if (!sim_tau && sim_alpha_opt->count() == 0)
                throw CLI::ValidationError("simulate", "need --alpha or --tau");
            run_simulate(sim_p, sim_theta, sim_beta, sim_alpha, sim_n, sim_epsilon, sim_tau,
                         sim_method, sim_reps, sim_seed, sim_knobs, sim_out);
        } else if (app.got_subcommand(phase)) {
            run_phase(phase_p, phase_theta, phase_beta_grid, phase_alpha_grid, phase_methods,
                      phase_reps, phase_seed, phase_knobs, phase_out);
        } else if (app.got_subcommand(nt)) {
            run_null_table(nt_n, nt_b, nt_seed, nt_kind, nt_dir);
        } else if (app.got_subcommand(select)) {
            run_select(select_data, select_knobs, select_out);
        } else if (app.got_subcommand(lb)) {
            run_leaderboard(lb_errors, lb_out);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
