#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <complex>
#include <vector>

#include "semqam/constellation.hpp"
#include "semqam/metrics.hpp"
#include "support.hpp"

using namespace semqam;

TEST_CASE("gray qam geometry at order 4") {
    const Constellation cst = gray_qam(4, 1.0);
    REQUIRE(cst.points.size() == 4);
    for (const cplx& p : cst.points) {
        REQUIRE_THAT(std::fabs(p.real()), Catch::Matchers::WithinAbs(0.707107, 1e-6));
        REQUIRE_THAT(std::fabs(p.imag()), Catch::Matchers::WithinAbs(0.707107, 1e-6));
    }
}

TEST_CASE("gray qam geometry at order 16") {
    const Constellation cst = gray_qam(16, 1.0);
    const double unit = 1.0 / std::sqrt(10.0);
    for (const cplx& p : cst.points) {
        const double re = std::fabs(p.real()) / unit;
        const double im = std::fabs(p.imag()) / unit;
        REQUIRE((std::fabs(re - 1.0) < 1e-9 || std::fabs(re - 3.0) < 1e-9));
        REQUIRE((std::fabs(im - 1.0) < 1e-9 || std::fabs(im - 3.0) < 1e-9));
    }
}

TEST_CASE("gray qam meets the power budget at every order") {
    for (int M : {4, 16, 64, 256, 1024}) {
        for (double P : {1.0, 2.5}) {
            const Constellation cst = gray_qam(M, P);
            REQUIRE_THAT(mean_power(cst.points), Catch::Matchers::WithinAbs(P, 1e-9));
        }
    }
    REQUIRE_THROWS_AS(gray_qam(8, 1.0), ConfigError);
    REQUIRE_THROWS_AS(gray_qam(2, 1.0), ConfigError);
}

TEST_CASE("gray labeling gives one-bit transitions between grid neighbors") {
    for (int M : {4, 16, 64, 256}) {
        const Constellation cst = gray_qam(M, 1.0);
        const int m = int(std::lround(std::sqrt(double(M))));
        std::vector<int> inverse(M);
        for (int c = 0; c < M; ++c) inverse[cst.labeling[c]] = c;
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) {
                if (c + 1 < m) {
                    const int a = inverse[r * m + c];
                    const int b = inverse[r * m + c + 1];
                    REQUIRE(std::popcount(unsigned(a ^ b)) == 1);
                }
                if (r + 1 < m) {
                    const int a = inverse[r * m + c];
                    const int b = inverse[(r + 1) * m + c];
                    REQUIRE(std::popcount(unsigned(a ^ b)) == 1);
                }
            }
        }
    }
}

TEST_CASE("normalize_power recenters and rescales") {
    SECTION("two-point example") {
        const auto out = normalize_power({cplx(2.0, 0.0), cplx(-2.0, 0.0)}, 1.0);
        REQUIRE_THAT(out[0].real(), Catch::Matchers::WithinAbs(1.0, 1e-12));
        REQUIRE_THAT(out[1].real(), Catch::Matchers::WithinAbs(-1.0, 1e-12));
    }
    SECTION("idempotent on a normalized constellation") {
        const Constellation cst = gray_qam(4, 1.0);
        const auto out = normalize_power(cst.points, 1.0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            REQUIRE_THAT(out[i].real(),
                         Catch::Matchers::WithinAbs(cst.points[i].real(), 1e-15));
            REQUIRE_THAT(out[i].imag(),
                         Catch::Matchers::WithinAbs(cst.points[i].imag(), 1e-15));
        }
    }
    SECTION("random clouds land exactly on budget") {
        Rng rng(4);
        for (double P : {0.5, 1.0, 3.0}) {
            std::vector<cplx> pts(12);
            for (cplx& p : pts) p = cplx(3.0 * rng.normal() + 1.0, 3.0 * rng.normal() - 2.0);
            const auto out = normalize_power(pts, P);
            REQUIRE_THAT(mean_power(out), Catch::Matchers::WithinAbs(P, 1e-12));
            cplx mean(0.0, 0.0);
            for (const cplx& p : out) mean += p;
            REQUIRE_THAT(std::abs(mean) / double(out.size()),
                         Catch::Matchers::WithinAbs(0.0, 1e-12));
        }
    }
    SECTION("degenerate all-equal input is flagged, not scaled") {
        bool degenerate = false;
        const auto out = normalize_power({cplx(1.0, 1.0), cplx(1.0, 1.0)}, 1.0, &degenerate);
        REQUIRE(degenerate);
        for (const cplx& p : out) REQUIRE(p == cplx(0.0, 0.0));
    }
    SECTION("non-finite input throws") {
        REQUIRE_THROWS_AS(
            normalize_power({cplx(std::nan(""), 0.0), cplx(1.0, 0.0)}, 1.0), NumericError);
    }
}

TEST_CASE("shaping loss on the antipodal fixture") {
    const Constellation cst = testutil::two_point_constellation();
    // received exactly at point 0, N0 = 1: softmax gap e^{-4}
    const double loss = qam_loss(cst, {0}, {cplx(1.0, 0.0)}, 1.0, {1.0});
    REQUIRE_THAT(loss, Catch::Matchers::WithinAbs(std::log1p(std::exp(-4.0)), 1e-9));

    SECTION("loss is linear in the importance weight") {
        const double twice = qam_loss(cst, {0}, {cplx(1.0, 0.0)}, 1.0, {2.0});
        REQUIRE_THAT(twice, Catch::Matchers::WithinRel(2.0 * loss, 1e-12));
    }
    SECTION("zero-importance samples contribute nothing") {
        const double padded = qam_loss(cst, {0, 1}, {cplx(1.0, 0.0), cplx(5.0, 5.0)}, 1.0,
                                       {2.0, 0.0});
        REQUIRE_THAT(padded, Catch::Matchers::WithinRel(loss, 1e-12));
    }
    SECTION("invalid noise density is rejected") {
        REQUIRE_THROWS_AS(qam_loss(cst, {0}, {cplx(1.0, 0.0)}, 0.0, {1.0}), ConfigError);
        REQUIRE_THROWS_AS(qam_loss(cst, {0}, {cplx(1.0, 0.0)}, -1.0, {1.0}), ConfigError);
    }
}

TEST_CASE("shaping loss is invariant under rotation") {
    Rng rng(6);
    Constellation cst = testutil::random_constellation(16, 1.0, rng);
    std::vector<int> sent(32);
    std::vector<cplx> rec(32);
    std::vector<double> w(32);
    for (int k = 0; k < 32; ++k) {
        sent[k] = int(rng.below(16));
        rec[k] = concept_point(cst, sent[k]) + cplx(0.3 * rng.normal(), 0.3 * rng.normal());
        w[k] = 0.1 + rng.uniform();
    }
    const double base = qam_loss(cst, sent, rec, 0.5, w);

    const cplx rot = std::polar(1.0, 1.234);
    Constellation rotated = cst;
    for (cplx& p : rotated.points) p *= rot;
    std::vector<cplx> rec_rot = rec;
    for (cplx& r : rec_rot) r *= rot;
    REQUIRE_THAT(qam_loss(rotated, sent, rec_rot, 0.5, w),
                 Catch::Matchers::WithinRel(base, 1e-12));
}

TEST_CASE("loss gradient matches finite differences") {
    Rng rng(12);
    for (int M : {4, 16}) {
        for (int trial = 0; trial < 3; ++trial) {
            Constellation cst = testutil::random_constellation(M, 1.0, rng);
            const int n = 24;
            std::vector<int> sent(n);
            std::vector<cplx> rec(n);
            std::vector<double> w(n);
            const double n0 = 0.4 + rng.uniform();
            for (int k = 0; k < n; ++k) {
                sent[k] = int(rng.below(M));
                rec[k] = concept_point(cst, sent[k]) +
                         cplx(std::sqrt(n0 / 2.0) * rng.normal(),
                              std::sqrt(n0 / 2.0) * rng.normal());
                w[k] = 0.1 + rng.uniform();
            }
            const auto got = qam_loss_gradient(cst, sent, rec, n0, w);
            const auto want = testutil::fd_qam_loss_gradient(cst, sent, rec, n0, w);
            REQUIRE(testutil::grad_rel_err(got, want) < 1e-5);
        }
    }
}

TEST_CASE("loss gradient edge cases") {
    const Constellation cst = testutil::two_point_constellation();
    SECTION("zero weights give a zero gradient") {
        const auto g = qam_loss_gradient(cst, {0, 1}, {cplx(1.0, 0.0), cplx(-1.0, 0.0)}, 1.0,
                                         {0.0, 0.0});
        for (const cplx& v : g) REQUIRE(std::abs(v) == 0.0);
    }
    SECTION("saturated softmax leaves only an exponentially small pull") {
        const auto g = qam_loss_gradient(cst, {0}, {cplx(1.0, 0.0)}, 1.0, {1.0});
        for (const cplx& v : g) REQUIRE(std::abs(v) <= 4.0 * std::exp(-4.0));
    }
}

TEST_CASE("zero training steps returns the gray baseline") {
    TrainConfig cfg;
    cfg.steps = 0;
    const auto stream = pool_stream({{0, 0.9}, {1, 0.2}, {2, 0.4}, {3, 0.5}});
    const Constellation out = train_constellation(stream, 4, 1.0, cfg);
    const Constellation gray = gray_qam(4, 1.0);
    for (int i = 0; i < 4; ++i) REQUIRE(concept_point(out, i) == concept_point(gray, i));
}

TEST_CASE("training is deterministic and respects the power budget") {
    testutil::SourceStatistics st = testutil::make_synthetic_stats(16, 3);
    std::vector<SciSample> pool;
    for (int i = 0; i < 16; ++i)
        for (int k = 0; k < int(st.usage_counts[i]); ++k)
            pool.push_back({i, st.avg_sci[i]});

    TrainConfig cfg;
    cfg.steps = 250;
    cfg.checkpoint_every = 50;
    cfg.validation_size = 128;
    cfg.seed = 9;
    const Constellation a = train_constellation(pool_stream(pool), 16, 1.0, cfg);
    const Constellation b = train_constellation(pool_stream(pool), 16, 1.0, cfg);
    REQUIRE(a.points == b.points);
    REQUIRE(a.labeling == b.labeling);
    REQUIRE_THAT(mean_power(a.points), Catch::Matchers::WithinAbs(1.0, 1e-9));

    cfg.seed = 10;
    const Constellation c = train_constellation(pool_stream(pool), 16, 1.0, cfg);
    REQUIRE(a.points != c.points);
}

TEST_CASE("training validates its configuration") {
    const auto stream = pool_stream({{0, 0.5}});
    TrainConfig cfg;
    cfg.steps = -1;
    REQUIRE_THROWS_AS(train_constellation(stream, 4, 1.0, cfg), ConfigError);
    cfg.steps = 10;
    cfg.batch_size = 0;
    REQUIRE_THROWS_AS(train_constellation(stream, 4, 1.0, cfg), ConfigError);
    cfg.batch_size = 8;
    cfg.snr_min_db = 5.0;
    cfg.snr_max_db = -5.0;
    REQUIRE_THROWS_AS(train_constellation(stream, 4, 1.0, cfg), ConfigError);
}
