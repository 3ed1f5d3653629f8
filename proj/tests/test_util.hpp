#pragma once

#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "ifpca/rng.hpp"

namespace testutil {

struct PlantedData {
    Eigen::MatrixXd x;       // n x p
    std::vector<int> y;      // labels 1/2
    std::vector<int> support;  // ascending planted feature indices
};

// Two-class planted instance: class sizes round(q*n) / rest, support features get a
// +/-tau mean shift keyed to the class sign, optional rank-one per-subject factor with
// loading `nuisance` on every off-support feature (class-independent).
inline PlantedData make_two_class(int n, int p, int s, double tau, double q,
                                  std::uint64_t seed, double nuisance = 0.0) {
    ifpca::Rng rng(seed);
    PlantedData out;

    const int n_pos = static_cast<int>(std::llround(q * n));
    out.y.assign(static_cast<size_t>(n), 2);
    std::fill(out.y.begin(), out.y.begin() + n_pos, 1);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(0, i));
        std::swap(out.y[static_cast<size_t>(i)], out.y[static_cast<size_t>(j)]);
    }

    std::vector<int> perm(static_cast<size_t>(p));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < s; ++i) {
        const int j = static_cast<int>(rng.uniform_int(i, p - 1));
        std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }
    out.support.assign(perm.begin(), perm.begin() + s);
    std::sort(out.support.begin(), out.support.end());

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
    for (int j : out.support) mu[j] = tau * rng.sign();

    out.x.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) out.x(i, j) = rng.normal();
    for (int i = 0; i < n; ++i) {
        const double sign = out.y[static_cast<size_t>(i)] == 1 ? 1.0 : -1.0;
        out.x.row(i) += sign * mu.transpose();
    }

    if (nuisance > 0.0) {
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) g[i] = rng.normal();
        Eigen::VectorXd h = Eigen::VectorXd::Constant(p, nuisance);
        for (int j : out.support) h[j] = 0.0;
        out.x += g * h.transpose();
    }
    return out;
}

// Unique scratch directory under the system temp dir, removed on destruction.
struct ScratchDir {
    std::filesystem::path path;
    explicit ScratchDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               (tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace testutil
