#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "semqam/semantics.hpp"
#include "semqam/synth.hpp"

using namespace semqam;

namespace {

// balanced, linearly separable two-class set on a 2x2 canvas
ImageDataset separable_dataset(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    ImageDataset ds;
    ds.height = 2;
    ds.width = 2;
    ds.num_classes = 2;
    for (int i = 0; i < per_class; ++i) {
        ds.images.push_back({0.8 + 0.1 * rng.uniform(), 0.1 * rng.uniform(),
                             0.1 * rng.uniform(), 0.1 * rng.uniform()});
        ds.labels.push_back(0);
        ds.images.push_back({0.1 * rng.uniform(), 0.8 + 0.1 * rng.uniform(),
                             0.1 * rng.uniform(), 0.1 * rng.uniform()});
        ds.labels.push_back(1);
    }
    return ds;
}

}  // namespace

TEST_CASE("zero-weight classifier outputs uniform probabilities") {
    TaskClassifier clf;
    clf.height = 1;
    clf.width = 1;
    clf.weights = {{0.0}, {0.0}, {0.0}, {0.0}};
    clf.biases = {0.0, 0.0, 0.0, 0.0};
    const auto p = classify(clf, {0.7});
    for (double v : p) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(0.25, 1e-15));
}

TEST_CASE("classifier softmax matches the closed form") {
    TaskClassifier clf;
    clf.height = 1;
    clf.width = 1;
    clf.weights = {{0.0}, {0.0}};
    clf.biases = {std::log(2.0), 0.0};
    const auto p = classify(clf, {0.0});
    REQUIRE_THAT(p[0], Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
    REQUIRE_THAT(p[1], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("classifier softmax matches an independent evaluation") {
    Rng rng(3);
    TaskClassifier clf;
    clf.height = 1;
    clf.width = 3;
    clf.weights.assign(4, std::vector<double>(3));
    clf.biases.assign(4, 0.0);
    for (auto& row : clf.weights)
        for (double& w : row) w = rng.normal();
    for (double& b : clf.biases) b = rng.normal();
    const std::vector<double> x = {0.2, 0.9, 0.4};
    const auto p = classify(clf, x);

    double denom = 0.0;
    std::vector<double> want(4);
    for (int c = 0; c < 4; ++c) {
        double z = clf.biases[c];
        for (int d = 0; d < 3; ++d) z += clf.weights[c][d] * x[d];
        want[c] = std::exp(z);
        denom += want[c];
    }
    double sum = 0.0;
    for (int c = 0; c < 4; ++c) {
        REQUIRE_THAT(p[c], Catch::Matchers::WithinRel(want[c] / denom, 1e-12));
        sum += p[c];
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THROWS_AS(classify(clf, {0.1, 0.2}), DataError);
}

TEST_CASE("training separates linearly separable clouds") {
    const ImageDataset train = separable_dataset(100, 41);
    const ImageDataset test = separable_dataset(50, 42);
    const TaskClassifier clf = train_classifier(train, 20, 0.5, 16, 1);
    REQUIRE(classifier_accuracy(clf, test) == 1.0);
}

TEST_CASE("zero epochs leaves the uniform model") {
    const ImageDataset ds = separable_dataset(40, 11);
    const TaskClassifier clf = train_classifier(ds, 0, 0.5, 16, 1);
    // argmax of a uniform vector resolves to class 0
    REQUIRE_THAT(classifier_accuracy(clf, ds), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("full-set loss is monotonically non-increasing across epochs") {
    const ImageDataset ds = separable_dataset(60, 13);
    double prev = cross_entropy_loss(train_classifier(ds, 0, 0.1, 32, 2), ds);
    for (int epochs = 1; epochs <= 8; ++epochs) {
        const double loss = cross_entropy_loss(train_classifier(ds, epochs, 0.1, 32, 2), ds);
        REQUIRE(loss <= prev + 1e-3);
        prev = loss;
    }
}

TEST_CASE("degenerate training sets are rejected") {
    ImageDataset empty;
    empty.height = empty.width = 2;
    REQUIRE_THROWS_AS(train_classifier(empty, 1, 0.1, 8, 0), DataError);

    ImageDataset single;
    single.height = single.width = 1;
    single.num_classes = 1;
    single.images = {{0.5}, {0.6}};
    single.labels = {0, 0};
    REQUIRE_THROWS_AS(train_classifier(single, 1, 0.1, 8, 0), DataError);
}

TEST_CASE("kl divergence is zero only at equality") {
    const std::vector<double> p = {0.2, 0.5, 0.3};
    REQUIRE_THAT(kl_divergence(p, p), Catch::Matchers::WithinAbs(0.0, 1e-15));
    REQUIRE(kl_divergence(p, {0.3, 0.4, 0.3}) > 0.0);
    // zero entries are floored rather than producing infinities
    const double kl = kl_divergence({1.0, 0.0, 0.0}, {0.0, 1.0, 0.0});
    REQUIRE(std::isfinite(kl));
    REQUIRE(kl > 0.0);
}

TEST_CASE("perfect reconstruction yields unit semantic quality") {
    const ImageDataset ds = separable_dataset(50, 23);
    const TaskClassifier clf = train_classifier(ds, 20, 0.5, 16, 3);
    REQUIRE(classifier_accuracy(clf, ds) == 1.0);
    const SemanticQuality q = semantic_quality(clf, ds.images, ds.images, ds.labels);
    REQUIRE_THAT(q.q_task, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(q.p_conf, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(q.s_dist, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(q.q_sem, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("component weights are 0.6, 0.25, 0.15") {
    // uniform classifier: distributions match, argmax is class 0, labels say 1
    TaskClassifier clf;
    clf.height = 1;
    clf.width = 1;
    clf.weights = {{0.0}, {0.0}};
    clf.biases = {0.0, 0.0};
    const std::vector<std::vector<double>> imgs = {{0.3}, {0.8}};
    const SemanticQuality q = semantic_quality(clf, imgs, imgs, {1, 1});
    REQUIRE_THAT(q.q_task, Catch::Matchers::WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(q.p_conf, Catch::Matchers::WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(q.s_dist, Catch::Matchers::WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(q.q_sem, Catch::Matchers::WithinAbs(0.4, 1e-15));
}

TEST_CASE("semantic quality stays in the unit interval") {
    const ImageDataset ds = separable_dataset(30, 29);
    const TaskClassifier clf = train_classifier(ds, 5, 0.3, 16, 4);
    Rng rng(77);
    std::vector<std::vector<double>> noisy = ds.images;
    for (auto& img : noisy)
        for (double& v : img) v = std::clamp(v + 0.4 * rng.normal(), 0.0, 1.0);
    const SemanticQuality q = semantic_quality(clf, ds.images, noisy, ds.labels);
    REQUIRE(q.q_sem >= 0.0);
    REQUIRE(q.q_sem <= 1.0);
    REQUIRE(q.q_task >= 0.0);
    REQUIRE(q.q_task <= 1.0);
    REQUIRE_THROWS_AS(semantic_quality(clf, ds.images, noisy, {0}), ConsistencyError);
}
