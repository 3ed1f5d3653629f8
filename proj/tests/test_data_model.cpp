#include <cmath>
#include <fstream>
#include <stdexcept>

#include "doctest.h"
#include "ifpca/data_model.hpp"
#include "ifpca/rng.hpp"
#include "test_util.hpp"

using namespace ifpca;

TEST_SUITE("data_model") {

TEST_CASE("normalize_columns centers, scales, and drops constant columns") {
    DataMatrix x;
    x.values.resize(5, 3);
    x.values << 1, 7, 2,
                2, 7, 4,
                3, 7, 6,
                4, 7, 8,
                5, 7, 10;
    const NormalizedMatrix w = normalize_columns(x);
    REQUIRE(w.values.cols() == 2);
    CHECK(w.retained == std::vector<int>{0, 2});
    CHECK(w.dropped == std::vector<int>{1});
    for (Eigen::Index c = 0; c < w.values.cols(); ++c) {
        CHECK(std::fabs(w.values.col(c).mean()) < 1e-14);
        const double sd = std::sqrt(w.values.col(c).squaredNorm() / 4.0);  // n-1 = 4
        CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
    }
    // the two retained columns are affine images of each other, so they normalize equal
    CHECK((w.values.col(0) - w.values.col(1)).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("normalize_columns is idempotent on already-normalized data") {
    testutil::PlantedData d = testutil::make_two_class(20, 8, 3, 1.0, 0.5, 77);
    DataMatrix x;
    x.values = d.x;
    const NormalizedMatrix w1 = normalize_columns(x);
    DataMatrix again;
    again.values = w1.values;
    const NormalizedMatrix w2 = normalize_columns(again);
    CHECK((w1.values - w2.values).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("normalize_columns population mode uses the n denominator") {
    DataMatrix x;
    x.values.resize(4, 1);
    x.values << 0, 2, 4, 6;
    const NormalizedMatrix w = normalize_columns(x, SdMode::population);
    const double sd = std::sqrt(w.values.col(0).squaredNorm() / 4.0);  // n = 4
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize_columns rejects degenerate input") {
    DataMatrix one_row;
    one_row.values.resize(1, 3);
    one_row.values << 1, 2, 3;
    CHECK_THROWS_AS(normalize_columns(one_row), std::invalid_argument);

    DataMatrix all_const;
    all_const.values = Eigen::MatrixXd::Ones(4, 2);
    CHECK_THROWS_AS(normalize_columns(all_const), std::runtime_error);
}

TEST_CASE("matrix round-trip through CSV preserves values exactly") {
    testutil::ScratchDir dir("ifpca_dm");
    Rng rng(5);
    Eigen::MatrixXd m(7, 4);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal() * 1e3;
    m(0, 0) = 1.0 / 3.0;
    m(1, 1) = -0.0;
    const std::string path = dir.file("m.csv");
    write_matrix(path, m);
    const DataMatrix back = load_matrix(path);
    REQUIRE(back.n() == 7);
    REQUIRE(back.p() == 4);
    CHECK((back.values - m).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("load_matrix handles tabs, headers, and transpose") {
    testutil::ScratchDir dir("ifpca_dm2");
    const std::string path = dir.file("t.tsv");
    std::ofstream(path) << "g1\tg2\tg3\n1\t2\t3\n4\t5\t6\n";

    const DataMatrix plain = load_matrix(path, false, true);
    REQUIRE(plain.n() == 2);
    REQUIRE(plain.p() == 3);
    CHECK(plain.values(1, 2) == 6.0);
    CHECK(plain.feature_ids == std::vector<std::string>{"g1", "g2", "g3"});

    // 3 file-columns become 3 subjects after transpose; header ids follow them
    const DataMatrix flipped = load_matrix(path, true, true);
    REQUIRE(flipped.n() == 3);
    REQUIRE(flipped.p() == 2);
    CHECK(flipped.values(2, 1) == 6.0);
    CHECK(flipped.subject_ids == std::vector<std::string>{"g1", "g2", "g3"});
}

TEST_CASE("load_matrix reports the offending cell") {
    testutil::ScratchDir dir("ifpca_dm3");
    const std::string ragged = dir.file("r.csv");
    std::ofstream(ragged) << "1,2,3\n4,5\n";
    CHECK_THROWS_WITH_AS(load_matrix(ragged), doctest::Contains("row 2"),
                         std::runtime_error);

    const std::string junk = dir.file("j.csv");
    std::ofstream(junk) << "1,2\n3,oops\n";
    CHECK_THROWS_AS(load_matrix(junk), std::runtime_error);

    const std::string empty = dir.file("e.csv");
    std::ofstream(empty) << "";
    CHECK_THROWS_AS(load_matrix(empty), std::runtime_error);
}

TEST_CASE("load_labels remaps arbitrary integer codings to 1..K") {
    testutil::ScratchDir dir("ifpca_dm4");
    const std::string path = dir.file("y.txt");
    std::ofstream(path) << "-1\n1\n1\n-1\n1\n";
    const std::vector<int> y = load_labels(path);
    CHECK(y == std::vector<int>{1, 2, 2, 1, 2});
    CHECK(label_count(y) == 2);

    const std::string zeros = dir.file("z.txt");
    std::ofstream(zeros) << "0\n2\n5\n0\n";
    CHECK(load_labels(zeros) == std::vector<int>{1, 2, 3, 1});
}

TEST_CASE("atomic_write_text replaces content whole") {
    testutil::ScratchDir dir("ifpca_dm5");
    const std::string path = dir.file("a.txt");
    atomic_write_text(path, "first\n");
    atomic_write_text(path, "second\n");
    CHECK(testutil::read_file(path) == "second\n");
}

}  // TEST_SUITE
