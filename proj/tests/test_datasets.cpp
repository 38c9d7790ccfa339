#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "graphx/csv.hpp"
#include "graphx/datasets.hpp"

using namespace graphx;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("two-moons: noiseless geometry", "[datasets]") {
    const auto d = synth_two_moons(4, 0.0, 1);
    CHECK(d.truth == std::vector<std::size_t>{0, 0, 1, 1});
    CHECK(d.classes == 2);
    // Upper arc centred at the origin, lower arc centred at (1, 0.5).
    for (std::size_t i = 0; i < 4; ++i) {
        const double cx = i < 2 ? 0.0 : 1.0;
        const double cy = i < 2 ? 0.0 : 0.5;
        const double r = std::hypot(d.features(i, 0) - cx, d.features(i, 1) - cy);
        CHECK_THAT(r, WithinAbs(1.0, 1e-15));
    }
    CHECK_THAT(d.features(0, 0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(d.features(1, 0), WithinAbs(-1.0, 1e-15));
    CHECK_THAT(d.features(2, 0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(d.features(3, 0), WithinAbs(2.0, 1e-15));
}

TEST_CASE("two-moons: deterministic and balanced", "[datasets]") {
    const auto a = synth_two_moons(500, 0.1, 9);
    const auto b = synth_two_moons(500, 0.1, 9);
    CHECK(a.features.values() == b.features.values());
    CHECK(a.truth == b.truth);
    std::size_t ones = 0;
    for (auto t : a.truth) ones += t;
    CHECK(ones == 250);
    const auto c = synth_two_moons(500, 0.1, 10);
    CHECK_FALSE(c.features.values() == a.features.values());
    CHECK_THROWS_AS(synth_two_moons(5, 0.1, 1), Error);
    CHECK_THROWS_AS(synth_two_moons(10, -0.1, 1), Error);
}

TEST_CASE("sbm: deterministic extremes", "[datasets][sbm]") {
    const std::vector<std::size_t> sizes{3, 3};
    const auto s = synth_sbm(sizes, 1.0, 0.0, 1);
    CHECK(s.graph.edge_count() == 6); // two triangles
    for (const auto& e : s.graph.edges()) CHECK(s.truth[e.i] == s.truth[e.j]);

    const auto full = synth_sbm(sizes, 1.0, 1.0, 1);
    CHECK(full.graph.edge_count() == 15);
}

TEST_CASE("sbm: matches an independent re-simulation", "[datasets][sbm]") {
    const std::vector<std::size_t> sizes{20, 20};
    const auto s = synth_sbm(sizes, 0.5, 0.02, 1234);
    REQUIRE(s.attempts == 1);

    std::mt19937_64 rng(1234);
    std::size_t inter = 0, intra = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t j = i + 1; j < 40; ++j) {
            const bool same = (i < 20) == (j < 20);
            const double draw = std::ldexp(static_cast<double>(rng() >> 11), -53);
            if (draw < (same ? 0.5 : 0.02)) (same ? intra : inter) += 1;
        }
    }
    std::size_t got_inter = 0;
    for (const auto& e : s.graph.edges()) got_inter += s.truth[e.i] != s.truth[e.j] ? 1 : 0;
    CHECK(got_inter == inter);
    CHECK(s.graph.edge_count() == inter + intra);
}

TEST_CASE("sbm: parameter validation names the parameter", "[datasets][sbm]") {
    const std::vector<std::size_t> sizes{5, 5};
    try {
        synth_sbm(sizes, 0.5, 1.5, 1);
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK_THAT(std::string(e.what()), ContainsSubstring("p-out"));
    }
    CHECK_THROWS_AS(synth_sbm(sizes, 0.2, 0.3, 1), Error);
    // p_in = 0 leaves nodes isolated on every attempt.
    try {
        synth_sbm(sizes, 0.01, 0.0, 1);
        FAIL("expected GenerationFailed");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GenerationFailed);
    }
}

TEST_CASE("partition: stratified seeds", "[datasets][partition]") {
    std::vector<std::size_t> truth(100);
    for (std::size_t i = 50; i < 100; ++i) truth[i] = 1;
    const auto p = make_partition(truth, 2, 0.02, 1);
    CHECK(p.constraints.seeds(0).size() == 1);
    CHECK(p.constraints.seeds(1).size() == 1);
    CHECK(p.heldout.size() == 98);
    for (auto i : p.constraints.seeds(0)) CHECK(truth[i] == 0);
    for (auto i : p.constraints.seeds(1)) CHECK(truth[i] == 1);

    const auto q = make_partition(truth, 2, 0.2, 2);
    const auto r = make_partition(truth, 2, 0.2, 3);
    CHECK(q.constraints.seeds(0).size() == r.constraints.seeds(0).size());
    CHECK(q.constraints.seeds(1).size() == 10);
    CHECK(q.constraints.seeds(0) != r.constraints.seeds(0));
    CHECK(make_partition(truth, 2, 0.2, 2).constraints.seeds(1) == q.constraints.seeds(1));
}

TEST_CASE("partition: boundary fractions", "[datasets][partition]") {
    std::vector<std::size_t> truth{0, 0, 0, 1, 1, 1};
    const auto all = make_partition(truth, 2, 1.0, 1);
    CHECK(all.degenerate);
    CHECK(all.heldout.empty());
    CHECK(all.constraints.seed_count() == 6);
    try {
        make_partition(truth, 2, 0.1, 1);
        FAIL("expected FractionTooSmall");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::FractionTooSmall);
    }
}

TEST_CASE("csv: features parse, validate and round trip", "[datasets][csv]") {
    std::istringstream ok("# x,y\n1.5,2\n-3,4e-3\n5,6\n");
    const auto x = csv::read_features(ok);
    CHECK(x.rows() == 3);
    CHECK(x.cols() == 2);
    CHECK(x(1, 1) == 4e-3);

    std::istringstream nan("1,2\nNaN,3\n");
    try {
        csv::read_features(nan);
        FAIL("expected NonFiniteValue");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteValue);
        CHECK(e.index() == 2u);
    }
    std::istringstream ragged("1,2\n3\n");
    try {
        csv::read_features(ragged);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK(e.index() == 2u);
    }

    const auto d = synth_two_moons(50, 0.1, 4);
    std::stringstream buf;
    csv::write_features(buf, d.features);
    const auto back = csv::read_features(buf);
    CHECK(back.values() == d.features.values());
}

TEST_CASE("csv: truth and labels", "[datasets][csv]") {
    std::istringstream truth_in("node,class\n2,1\n0,0\n1,1\n");
    CHECK(csv::read_truth(truth_in) == std::vector<std::size_t>{0, 1, 1});
    std::istringstream dup("node,class\n0,0\n0,1\n");
    CHECK_THROWS_AS(csv::read_truth(dup), Error);
    std::istringstream no_header("0,0\n");
    CHECK_THROWS_AS(csv::read_truth(no_header), Error);

    std::istringstream labels("node,class\n4,1\n0,0\n");
    const auto c = csv::read_labels(labels, 6, 0, 0.1);
    CHECK(c.classes() == 2);
    CHECK(c.class_of(4) == 1);
    std::istringstream missing("node,class\n0,0\n");
    try {
        csv::read_labels(missing, 6, 2, 0.1);
        FAIL("expected EmptyClass");
    } catch (const Error& e) {
        CHECK_THAT(std::string(e.what()), ContainsSubstring("class 1 has no seeds"));
    }
}

TEST_CASE("csv: dataset loader checks row counts", "[datasets][csv]") {
    const auto dir = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
    const auto f = dir + "/graphx_test_features.csv";
    const auto t = dir + "/graphx_test_truth.csv";
    csv::save_features(f, FeatureMatrix(3, 2, {1, 2, 3, 4, 5, 6}));
    csv::save_truth(t, std::vector<std::size_t>{0, 1, 0, 1});
    try {
        csv::load_dataset(f, t);
        FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ShapeMismatch);
    }
    csv::save_truth(t, std::vector<std::size_t>{0, 1, 0});
    const auto d = csv::load_dataset(f, t);
    CHECK(d.classes == 2);
    std::remove(f.c_str());
    std::remove(t.c_str());
}

TEST_CASE("csv: scores round trip and malformed input", "[datasets][csv]") {
    ScoreMatrix s(3, 2);
    s(0, 0) = 0.1;
    s(0, 1) = -0.1;
    s(1, 0) = 1.0 / 3.0;
    s(1, 1) = 1.0 / 3.0;
    s(2, 1) = 1e-300;
    const auto p = predict(s);
    std::stringstream buf;
    csv::write_scores(buf, p);
    CHECK_THAT(buf.str(), ContainsSubstring("node,score_0,score_1,label,tie\n"));
    const auto back = csv::read_scores(buf);
    CHECK(back.scores == p.scores);
    CHECK(back.labels == p.labels);
    CHECK(back.ties == p.ties);

    std::istringstream bad("node,score_0,score_1,label,tie\n0,0.1,0.2,1,0\n1,0.1,oops,0,0\n");
    try {
        csv::read_scores(bad);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK_THAT(std::string(e.what()), ContainsSubstring("line 3"));
    }
}
