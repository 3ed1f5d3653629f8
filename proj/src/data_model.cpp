#include "ifpca/data_model.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace ifpca {

NormalizedMatrix normalize_columns(const DataMatrix& x, SdMode mode) {
    const Eigen::Index n = x.n(), p = x.p();
    if (n < 2) throw std::invalid_argument("normalize_columns: need at least 2 subjects");
    if (p < 1) throw std::invalid_argument("normalize_columns: empty matrix");

    const double denom = (mode == SdMode::sample) ? static_cast<double>(n - 1)
                                                  : static_cast<double>(n);
    std::vector<int> retained, dropped;
    std::vector<double> means, sds;
    retained.reserve(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mu = x.values.col(j).mean();
        const double ss = (x.values.col(j).array() - mu).square().sum();
        const double sd = std::sqrt(ss / denom);
        if (sd > 0.0) {
            retained.push_back(static_cast<int>(j));
            means.push_back(mu);
            sds.push_back(sd);
        } else {
            dropped.push_back(static_cast<int>(j));
        }
    }
    if (retained.empty())
        throw std::runtime_error("normalize_columns: all columns have zero variance");

    NormalizedMatrix w;
    w.values.resize(n, static_cast<Eigen::Index>(retained.size()));
    w.col_means.resize(static_cast<Eigen::Index>(retained.size()));
    w.col_sds.resize(static_cast<Eigen::Index>(retained.size()));
    for (size_t k = 0; k < retained.size(); ++k) {
        w.values.col(static_cast<Eigen::Index>(k)) =
            (x.values.col(retained[k]).array() - means[k]) / sds[k];
        w.col_means[static_cast<Eigen::Index>(k)] = means[k];
        w.col_sds[static_cast<Eigen::Index>(k)] = sds[k];
    }
    w.retained = std::move(retained);
    w.dropped = std::move(dropped);
    return w;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& tok, size_t row, size_t col) {
    const char* s = tok.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    while (end && *end == ' ') ++end;
    if (end == s || (end && *end != '\0') || errno == ERANGE) {
        std::ostringstream msg;
        msg << "load_matrix: non-numeric cell '" << tok << "' at row " << row << ", column "
            << col;
        throw std::runtime_error(msg.str());
    }
    return v;
}

}  // namespace

DataMatrix load_matrix(const std::string& path, bool transpose, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_matrix: cannot open " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw std::runtime_error("load_matrix: empty file " + path);

    const char delim = lines[0].find('\t') != std::string::npos ? '\t' : ',';

    std::vector<std::string> header_ids;
    size_t first_row = 0;
    if (has_header) {
        header_ids = split_line(lines[0], delim);
        first_row = 1;
        if (lines.size() == 1) throw std::runtime_error("load_matrix: header but no data rows");
    }

    const size_t rows = lines.size() - first_row;
    const size_t cols = split_line(lines[first_row], delim).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
        const auto toks = split_line(lines[first_row + r], delim);
        if (toks.size() != cols) {
            std::ostringstream msg;
            msg << "load_matrix: ragged row " << (first_row + r + 1) << " has " << toks.size()
                << " cells, expected " << cols;
            throw std::runtime_error(msg.str());
        }
        for (size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(toks[c], first_row + r + 1, c + 1);
    }
    if (has_header && header_ids.size() != cols)
        throw std::runtime_error("load_matrix: header width does not match data width");

    DataMatrix out;
    if (transpose) {
        out.values = m.transpose();
        out.subject_ids = header_ids;  // file columns become subjects
    } else {
        out.values = m;
        out.feature_ids = header_ids;
    }
    return out;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& values,
                  const std::vector<std::string>& col_ids, char delim) {
    if (!col_ids.empty() &&
        static_cast<Eigen::Index>(col_ids.size()) != values.cols())
        throw std::invalid_argument("write_matrix: id count does not match column count");
    std::string buf;
    buf.reserve(static_cast<size_t>(values.size()) * 12);
    if (!col_ids.empty()) {
        for (size_t j = 0; j < col_ids.size(); ++j) {
            if (j) buf.push_back(delim);
            buf += col_ids[j];
        }
        buf.push_back('\n');
    }
    char cell[40];
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j) buf.push_back(delim);
            std::snprintf(cell, sizeof cell, "%.17g", values(i, j));
            buf += cell;
        }
        buf.push_back('\n');
    }
    atomic_write_text(path, buf);
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_labels: cannot open " + path);
    std::vector<long> raw;
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* s = line.c_str();
        char* end = nullptr;
        errno = 0;
        const long v = std::strtol(s, &end, 10);
        while (end && *end == ' ') ++end;
        if (end == s || (end && *end != '\0') || errno == ERANGE) {
            std::ostringstream msg;
            msg << "load_labels: non-integer label '" << line << "' at line " << row;
            throw std::runtime_error(msg.str());
        }
        raw.push_back(v);
    }
    if (raw.empty()) throw std::runtime_error("load_labels: no labels in " + path);

    std::map<long, int> remap;
    for (long v : raw) remap.emplace(v, 0);
    int next = 1;
    for (auto& kv : remap) kv.second = next++;
    std::vector<int> out;
    out.reserve(raw.size());
    for (long v : raw) out.push_back(remap[v]);
    return out;
}

int label_count(const std::vector<int>& labels) {
    int k = 0;
    for (int v : labels) {
        if (v < 1) throw std::invalid_argument("label_count: labels must be in 1..K");
        k = std::max(k, v);
    }
    return k;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    const fs::path tmp = dir / (target.filename().string() + ".tmp." +
                                std::to_string(static_cast<unsigned long>(::getpid())));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write_text: cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("atomic_write_text: write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace ifpca
