#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "ifpca/pipelines.hpp"
#include "test_util.hpp"

using namespace ifpca;

namespace {

const std::vector<std::string> kAllMethods = {"pca",  "pca-x",  "ifpca", "ifpca-x", "vae",
                                              "vae-x", "ifvae", "ifvae-x", "spca", "sifpca"};

VaeHyper quick_vae() {
    VaeHyper h;
    h.d = 3;
    h.hidden = 6;
    h.epochs = 6;
    h.batches = 4;
    h.learning_rate = 1e-3;
    return h;
}

}  // namespace

TEST_SUITE("pipelines") {

TEST_CASE("method names round-trip and carry the documented defaults") {
    for (const std::string& name : kAllMethods) {
        const MethodSpec spec = make_method_spec(name);
        CHECK(method_name(spec) == name);
    }
    CHECK_THROWS_AS(make_method_spec("nope"), std::invalid_argument);

    CHECK(default_repeats(make_method_spec("pca")) == 5);
    CHECK(default_repeats(make_method_spec("pca-x")) == 5);
    CHECK(default_repeats(make_method_spec("ifpca")) == 5);
    CHECK(default_repeats(make_method_spec("ifpca-x")) == 20);
    CHECK(default_repeats(make_method_spec("vae")) == 10);
    CHECK(default_repeats(make_method_spec("vae-x")) == 10);
    CHECK(default_repeats(make_method_spec("ifvae")) == 10);
    CHECK(default_repeats(make_method_spec("ifvae-x")) == 10);
    CHECK(default_repeats(make_method_spec("spca")) == 1);
    CHECK(default_repeats(make_method_spec("sifpca")) == 1);
}

TEST_CASE("every method wires the advertised matrices and reductions") {
    testutil::PlantedData d = testutil::make_two_class(36, 40, 8, 1.8, 0.5, 10);
    DataMatrix x;
    x.values = d.x;

    const auto run = [&](const std::string& name) {
        MethodSpec spec = make_method_spec(name);
        spec.k = 2;
        spec.seed = 4;
        spec.repeats = 2;
        spec.null_b = 3000;
        if (spec.family == MethodFamily::vae || spec.family == MethodFamily::ifvae)
            spec.vae_hyper = quick_vae();
        return run_method(x, spec, &d.y);
    };

    const auto expect = [&](const std::string& name, const std::string& if_matrix,
                            const std::string& cl_matrix, const std::string& reduction,
                            bool has_if) {
        const PipelineReport rep = run(name);
        CHECK(rep.tags.at("method") == name);
        CHECK(rep.tags.at("if_step_matrix") == if_matrix);
        CHECK(rep.tags.at("clustering_matrix") == cl_matrix);
        CHECK(rep.tags.at("reduction") == reduction);
        CHECK(rep.has_if_step == has_if);
        CHECK(rep.labels.size() == 36);
        for (int l : rep.labels) CHECK((l == 1 || l == 2));
        if (has_if) {
            CHECK_FALSE(rep.retained.empty());
            for (size_t i = 1; i < rep.retained.size(); ++i)
                CHECK(rep.retained[i - 1] < rep.retained[i]);
        }
    };

    expect("pca", "none", "W", "svd_top_1", false);
    expect("pca-x", "none", "X", "svd_top_2", false);
    expect("ifpca", "W", "W^IF", "svd_top_1", true);
    expect("ifpca-x", "W", "X^IF", "svd_top_1", true);
    expect("vae", "none", "W", "vae_latent_3", false);
    expect("vae-x", "none", "X", "vae_latent_3", false);
    expect("ifvae", "W", "W^IF", "vae_latent_3", true);
    expect("ifvae-x", "W", "X^IF", "vae_latent_3", true);
    expect("spca", "none", "X", "first_sv_sign", false);
    expect("sifpca", "X", "X^IF", "first_sv_sign", true);
}

TEST_CASE("raw-matrix IF pipelines can switch to k singular vectors") {
    testutil::PlantedData d = testutil::make_two_class(30, 30, 6, 1.8, 0.5, 3);
    DataMatrix x;
    x.values = d.x;
    MethodSpec spec = make_method_spec("ifpca-x");
    spec.k = 2;
    spec.seed = 1;
    spec.repeats = 2;
    spec.null_b = 2000;
    spec.x_use_k_vectors = true;
    const PipelineReport rep = run_method(x, spec);
    CHECK(rep.tags.at("reduction") == "svd_top_2");
}

TEST_CASE("ifpca recovers a strong planted two-class structure") {
    testutil::PlantedData d = testutil::make_two_class(100, 1500, 60, 1.4, 0.7, 21);
    DataMatrix x;
    x.values = d.x;
    MethodSpec spec = make_method_spec("ifpca");
    spec.k = 2;
    spec.seed = 5;
    spec.null_b = 20000;
    const PipelineReport rep = run_method(x, spec, &d.y);
    CHECK(rep.diagnostics.at("representative_error_count") <= 2.0);
    CHECK(rep.retained.size() >= 30);
    CHECK(rep.retained.size() <= 1000);
    CHECK(rep.threshold > 0.0);
    CHECK(rep.per_repeat_errors.size() == 5);  // family default repeats
    const double mean =
        std::accumulate(rep.per_repeat_errors.begin(), rep.per_repeat_errors.end(), 0.0) / 5.0;
    CHECK(rep.diagnostics.at("mean_error_count") == doctest::Approx(mean));
}

TEST_CASE("run_method is deterministic for a fixed spec") {
    testutil::PlantedData d = testutil::make_two_class(40, 80, 10, 1.5, 0.5, 30);
    DataMatrix x;
    x.values = d.x;
    MethodSpec spec = make_method_spec("ifpca");
    spec.k = 2;
    spec.seed = 12;
    spec.repeats = 3;
    spec.null_b = 2000;
    const PipelineReport a = run_method(x, spec);
    const PipelineReport b = run_method(x, spec);
    CHECK(a.labels == b.labels);
    CHECK(a.repeat_objectives == b.repeat_objectives);
    CHECK(a.retained == b.retained);
}

TEST_CASE("feature sweep at the HCT count reproduces the raw-matrix pipeline") {
    testutil::PlantedData d = testutil::make_two_class(60, 300, 20, 1.5, 0.5, 91);
    DataMatrix x;
    x.values = d.x;

    MethodSpec spec = make_method_spec("ifpca-x");
    spec.k = 2;
    spec.seed = 77;
    spec.repeats = 3;
    spec.null_b = 5000;
    const PipelineReport rep = run_method(x, spec, &d.y);
    const int m_hat = static_cast<int>(rep.retained.size());
    REQUIRE(m_hat >= 1);

    SweepOptions options;
    options.null_b = 5000;
    const std::vector<SweepPoint> pts = feature_sweep(x, d.y, 2, {m_hat},
                                                      SweepClusterer::pca, 77, 3, options);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].m == m_hat);
    REQUIRE(pts[0].repeat_error_rates.size() == 3);
    for (int r = 0; r < 3; ++r)
        CHECK(pts[0].repeat_error_rates[static_cast<size_t>(r)] ==
              rep.per_repeat_errors[static_cast<size_t>(r)] / 60.0);
    CHECK(pts[0].mean_error_rate == doctest::Approx(rep.diagnostics.at("mean_error_rate")));
}

TEST_CASE("feature sweep with every feature reproduces the raw-matrix VAE pipeline") {
    testutil::PlantedData d = testutil::make_two_class(24, 18, 5, 2.0, 0.5, 44);
    DataMatrix x;
    x.values = d.x;

    MethodSpec spec = make_method_spec("vae-x");
    spec.k = 2;
    spec.seed = 13;
    spec.repeats = 2;
    spec.vae_hyper = quick_vae();
    const PipelineReport rep = run_method(x, spec, &d.y);

    SweepOptions options;
    options.null_b = 2000;
    options.vae_hyper = quick_vae();
    const std::vector<SweepPoint> pts =
        feature_sweep(x, d.y, 2, {18}, SweepClusterer::vae, 13, 2, options);
    REQUIRE(pts.size() == 1);
    for (int r = 0; r < 2; ++r)
        CHECK(pts[0].repeat_error_rates[static_cast<size_t>(r)] ==
              rep.per_repeat_errors[static_cast<size_t>(r)] / 24.0);
}

TEST_CASE("feature sweep validates the grid") {
    testutil::PlantedData d = testutil::make_two_class(20, 15, 4, 1.5, 0.5, 2);
    DataMatrix x;
    x.values = d.x;
    SweepOptions options;
    options.null_b = 2000;
    CHECK_THROWS_AS(feature_sweep(x, d.y, 2, {0}, SweepClusterer::pca, 1, 2, options),
                    std::invalid_argument);
    CHECK_THROWS_AS(feature_sweep(x, d.y, 2, {16}, SweepClusterer::pca, 1, 2, options),
                    std::invalid_argument);
    CHECK_THROWS_AS(feature_sweep(x, d.y, 2, {}, SweepClusterer::pca, 1, 2, options),
                    std::invalid_argument);
}

TEST_CASE("simplified ifpca reports an explicit empty selection on pure noise") {
    int throws = 0;
    for (std::uint64_t seed = 60; seed < 70; ++seed) {
        Rng rng(seed);
        DataMatrix x;
        x.values.resize(30, 50);
        for (Eigen::Index i = 0; i < x.values.size(); ++i) x.values(i) = rng.normal();
        MethodSpec spec = make_method_spec("sifpca");
        spec.seed = seed;
        try {
            const PipelineReport rep = run_method(x, spec);
            CHECK_FALSE(rep.retained.empty());  // something crossed the fixed threshold
        } catch (const NoFeaturesSelected& e) {
            ++throws;
            CHECK(std::string(e.what()).find("threshold") != std::string::npos);
        }
    }
    CHECK(throws >= 5);  // most pure-noise draws stay under sqrt(2 log p)
}

TEST_CASE("run_method validates shapes and arguments") {
    testutil::PlantedData d = testutil::make_two_class(10, 6, 2, 1.0, 0.5, 8);
    DataMatrix x;
    x.values = d.x;

    MethodSpec spec = make_method_spec("pca");
    spec.k = 1;
    CHECK_THROWS_AS(run_method(x, spec), std::invalid_argument);

    spec.k = 2;
    std::vector<int> short_truth = {1, 2};
    CHECK_THROWS_AS(run_method(x, spec, &short_truth), std::invalid_argument);

    DataMatrix row;
    row.values = Eigen::MatrixXd::Ones(1, 6);
    CHECK_THROWS_AS(run_method(row, spec), std::invalid_argument);
}

}  // TEST_SUITE
