#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ifpca {

// Dense subjects-by-features data matrix.  Feature/subject ids are optional; loaders
// leave them empty when the file carries none.
struct DataMatrix {
    Eigen::MatrixXd values;  // n subjects x p features
    std::vector<std::string> subject_ids;
    std::vector<std::string> feature_ids;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index p() const { return values.cols(); }
};

enum class SdMode { sample, population };

// Column-standardized matrix.  Zero-variance columns are removed before scaling;
// `retained` maps the columns of `values` back to original feature indices.
struct NormalizedMatrix {
    Eigen::MatrixXd values;   // n x m where m = retained.size()
    Eigen::VectorXd col_means;
    Eigen::VectorXd col_sds;
    std::vector<int> retained;  // ascending original indices
    std::vector<int> dropped;   // ascending original indices of zero-variance columns
};

// Center each column and divide by its standard deviation (sample denominator by
// default).  Throws if fewer than two rows or if every column has zero variance.
NormalizedMatrix normalize_columns(const DataMatrix& x, SdMode mode = SdMode::sample);

// Reads a CSV/TSV numeric matrix.  The delimiter (comma or tab) is detected from the
// first line.  With has_header the first row is treated as ids for the file's columns;
// after an optional transpose those ids become feature ids (no transpose) or subject
// ids (transpose).  Ragged rows, non-numeric cells and empty files are errors that
// cite the offending 1-based row/column.
DataMatrix load_matrix(const std::string& path, bool transpose = false,
                       bool has_header = false);

// Writes a matrix with full round-trip precision; optional header row of column ids.
void write_matrix(const std::string& path, const Eigen::MatrixXd& values,
                  const std::vector<std::string>& col_ids = {}, char delim = ',');

// Reads one integer label per line and remaps the distinct values, in sorted order,
// to 1..K (so files using 0/1 or -1/+1 conventions load cleanly).
std::vector<int> load_labels(const std::string& path);

// Number of classes in a 1..K label vector.
int label_count(const std::vector<int>& labels);

// Writes a whole file atomically (temp file in the same directory + rename).
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace ifpca
