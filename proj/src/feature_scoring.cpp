#include "ifpca/feature_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ifpca/data_model.hpp"
#include "ifpca/parallel.hpp"
#include "ifpca/rng.hpp"

namespace ifpca {

namespace {

const char* kind_name(StatKind k) {
    return k == StatKind::studentized_value ? "studentized_value" : "ks_score";
}

StatKind kind_from_name(const std::string& s) {
    if (s == "studentized_value") return StatKind::studentized_value;
    if (s == "ks_score") return StatKind::ks_score;
    throw std::runtime_error("unknown null table kind '" + s + "'");
}

// Studentize in place: (z_i - mean) / sample sd.
void studentize(std::vector<double>& z) {
    const size_t n = z.size();
    double mu = 0.0;
    for (double v : z) mu += v;
    mu /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : z) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd <= 0.0) throw std::invalid_argument("ks_score: zero-variance input");
    for (double& v : z) v = (v - mu) / sd;
}

double ks_of_sorted(const std::vector<double>& u,
                    const std::function<double(double)>& null_cdf) {
    const double n = static_cast<double>(u.size());
    double sup = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        const double f = null_cdf(u[i]);
        const double hi = std::fabs(static_cast<double>(i + 1) / n - f);
        const double lo = std::fabs(static_cast<double>(i) / n - f);
        sup = std::max(sup, std::max(hi, lo));
    }
    return std::sqrt(n) * sup;
}

double ks_score_vec(std::vector<double> z, const std::function<double(double)>& null_cdf) {
    if (z.size() < 2) throw std::invalid_argument("ks_score: need at least 2 values");
    studentize(z);
    std::sort(z.begin(), z.end());
    return ks_of_sorted(z, null_cdf);
}

}  // namespace

double NullCdfTable::cdf(double t) const {
    const auto it = std::upper_bound(draws.begin(), draws.end(), t);
    return static_cast<double>(it - draws.begin()) / static_cast<double>(draws.size());
}

std::string NullCdfTable::key() const {
    std::ostringstream s;
    s << "n" << n << "_B" << draws.size() << "_seed" << seed << "_" << kind_name(kind);
    return s.str();
}

NullCdfTable build_null_cdf(int n, std::int64_t b, std::uint64_t seed, StatKind kind) {
    if (n < 2) throw std::invalid_argument("build_null_cdf: n must be >= 2");
    if (b < 1) throw std::invalid_argument("build_null_cdf: B must be >= 1");

    NullCdfTable t;
    t.n = n;
    t.seed = seed;
    t.kind = kind;

    if (kind == StatKind::studentized_value) {
        const std::int64_t samples = (b + n - 1) / n;
        t.draws.reserve(static_cast<size_t>(samples) * n);
        Rng rng(seed);
        std::vector<double> z(static_cast<size_t>(n));
        for (std::int64_t s = 0; s < samples; ++s) {
            for (double& v : z) v = rng.normal();
            studentize(z);
            t.draws.insert(t.draws.end(), z.begin(), z.end());
        }
    } else {
        // score B null samples against the companion studentized_value table
        const NullCdfTable companion =
            build_null_cdf(n, b, derive_seed(seed, 0x51u), StatKind::studentized_value);
        const auto f = [&companion](double x) { return companion.cdf(x); };
        t.draws.reserve(static_cast<size_t>(b));
        Rng rng(seed);
        std::vector<double> z(static_cast<size_t>(n));
        for (std::int64_t s = 0; s < b; ++s) {
            for (double& v : z) v = rng.normal();
            t.draws.push_back(ks_score_vec(z, f));
        }
    }
    std::sort(t.draws.begin(), t.draws.end());
    return t;
}

void save_null_cdf(const NullCdfTable& table, const std::string& path) {
    std::string buf;
    buf.reserve(table.draws.size() * 20 + 64);
    {
        std::ostringstream head;
        head << table.n << "," << table.draws.size() << "," << table.seed << ","
             << kind_name(table.kind) << "\n";
        buf += head.str();
    }
    char cell[40];
    for (double v : table.draws) {
        std::snprintf(cell, sizeof cell, "%.17g\n", v);
        buf += cell;
    }
    atomic_write_text(path, buf);
}

NullCdfTable load_null_cdf(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_null_cdf: cannot open " + path);
    std::string head;
    if (!std::getline(in, head)) throw std::runtime_error("load_null_cdf: empty file " + path);

    NullCdfTable t;
    {
        std::istringstream hs(head);
        std::string tok;
        std::vector<std::string> parts;
        while (std::getline(hs, tok, ',')) parts.push_back(tok);
        if (parts.size() != 4)
            throw std::runtime_error("load_null_cdf: malformed header in " + path);
        t.n = std::stoi(parts[0]);
        const std::int64_t b = std::stoll(parts[1]);
        t.seed = std::stoull(parts[2]);
        t.kind = kind_from_name(parts[3]);
        t.draws.reserve(static_cast<size_t>(b));
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.draws.push_back(std::strtod(line.c_str(), nullptr));
    }
    if (!std::is_sorted(t.draws.begin(), t.draws.end()))
        throw std::runtime_error("load_null_cdf: draws not sorted in " + path);
    if (t.draws.empty()) throw std::runtime_error("load_null_cdf: no draws in " + path);
    return t;
}

std::string null_table_dir() {
    if (const char* env = std::getenv("IFPCA_NULL_TABLE_DIR"); env && *env) return env;
    return "null-tables";
}

NullCdfTable load_or_build_null_cdf(int n, std::int64_t b, std::uint64_t seed, StatKind kind,
                                    const std::string& dir) {
    namespace fs = std::filesystem;
    const std::string d = dir.empty() ? null_table_dir() : dir;
    // the cache key uses the requested B; actual draw counts may round up to a
    // multiple of n for studentized_value tables
    std::ostringstream name;
    name << "n" << n << "_B" << b << "_seed" << seed << "_" << kind_name(kind) << ".csv";
    const fs::path path = fs::path(d) / name.str();
    if (fs::exists(path)) {
        NullCdfTable t = load_null_cdf(path.string());
        if (t.n == n && t.seed == seed && t.kind == kind) return t;
    }
    NullCdfTable t = build_null_cdf(n, b, seed, kind);
    save_null_cdf(t, path.string());
    return t;
}

double ks_score(const Eigen::VectorXd& z, const std::function<double(double)>& null_cdf) {
    std::vector<double> v(z.data(), z.data() + z.size());
    return ks_score_vec(std::move(v), null_cdf);
}

Eigen::VectorXd ks_scores_all(const Eigen::MatrixXd& w, const NullCdfTable& table, int jobs) {
    if (table.kind != StatKind::studentized_value)
        throw std::invalid_argument("ks_scores_all: table kind must be studentized_value");
    if (table.n != w.rows())
        throw std::invalid_argument("ks_scores_all: table n does not match row count");
    const int p = static_cast<int>(w.cols());
    Eigen::VectorXd out(p);
    const auto f = [&table](double x) { return table.cdf(x); };
    parallel_for(jobs, p, [&](int j) {
        std::vector<double> z(w.col(j).data(), w.col(j).data() + w.rows());
        out[j] = ks_score_vec(std::move(z), f);
    });
    return out;
}

EfronResult efron_standardize(const Eigen::VectorXd& raw_scores) {
    const Eigen::Index p = raw_scores.size();
    if (p < 2) throw std::invalid_argument("efron_standardize: need at least 2 scores");
    EfronResult r;
    r.mu_star = raw_scores.mean();
    const double ss = (raw_scores.array() - r.mu_star).square().sum();
    r.sigma_star = std::sqrt(ss / static_cast<double>(p - 1));
    if (r.sigma_star <= 0.0)
        throw std::runtime_error("efron_standardize: scores have zero variance");
    r.standardized = (raw_scores.array() - r.mu_star) / r.sigma_star;
    return r;
}

Eigen::VectorXd ks_pvalues(const Eigen::VectorXd& standardized, const NullCdfTable& table,
                           PvalueMode mode) {
    Eigen::VectorXd out(standardized.size());
    if (mode == PvalueMode::literal) {
        if (table.kind != StatKind::studentized_value)
            throw std::invalid_argument("ks_pvalues: literal mode needs a studentized_value table");
        for (Eigen::Index j = 0; j < standardized.size(); ++j)
            out[j] = 1.0 - table.cdf(standardized[j]);
    } else {
        if (table.kind != StatKind::ks_score)
            throw std::invalid_argument("ks_pvalues: null_score mode needs a ks_score table");
        // standardize the null draws by their own moments; equivalently, compare
        // m + s * psi* against the raw draws
        Eigen::Map<const Eigen::VectorXd> draws(table.draws.data(),
                                                static_cast<Eigen::Index>(table.draws.size()));
        const double m = draws.mean();
        const double s =
            std::sqrt((draws.array() - m).square().sum() / static_cast<double>(draws.size() - 1));
        for (Eigen::Index j = 0; j < standardized.size(); ++j)
            out[j] = 1.0 - table.cdf(m + s * standardized[j]);
    }
    return out;
}

KsScoreSet score_features(const Eigen::MatrixXd& w, const NullCdfTable& sv_table,
                          const NullCdfTable* ks_table, PvalueMode mode, int jobs) {
    KsScoreSet set;
    set.raw = ks_scores_all(w, sv_table, jobs);
    EfronResult ef = efron_standardize(set.raw);
    set.mu_star = ef.mu_star;
    set.sigma_star = ef.sigma_star;
    set.standardized = std::move(ef.standardized);
    if (mode == PvalueMode::literal) {
        set.pvalues = ks_pvalues(set.standardized, sv_table, mode);
        set.null_table_ref = sv_table.key();
    } else {
        if (ks_table == nullptr)
            throw std::invalid_argument("score_features: null_score mode needs a ks_score table");
        set.pvalues = ks_pvalues(set.standardized, *ks_table, mode);
        set.null_table_ref = ks_table->key();
    }
    return set;
}

Eigen::VectorXd chi_square_scores(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    if (n < 1) throw std::invalid_argument("chi_square_scores: empty matrix");
    const double dn = static_cast<double>(n);
    Eigen::VectorXd out(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        out[j] = (x.col(j).squaredNorm() - dn) / std::sqrt(2.0 * dn);
    return out;
}

}  // namespace ifpca
