#pragma once

// Frozen downstream task model: linear softmax classifier trained with
// mini-batch gradient descent, plus the composite semantic quality score.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "semqam/common.hpp"
#include "semqam/ingest.hpp"

namespace semqam {

struct TaskClassifier {
    std::vector<std::vector<double>> weights;  // |Y| x (H*W)
    std::vector<double> biases;                // |Y|
    int height = 0;
    int width = 0;
};

struct SemanticQuality {
    double q_sem = 0.0;
    double q_task = 0.0;
    double p_conf = 0.0;
    double s_dist = 0.0;
};

inline std::vector<double> classify(const TaskClassifier& clf, const std::vector<double>& image) {
    const std::size_t dim = std::size_t(clf.height) * clf.width;
    if (image.size() != dim)
        throw DataError("classify: image size " + std::to_string(image.size()) + " != " +
                        std::to_string(dim));
    const std::size_t C = clf.weights.size();
    std::vector<double> logits(C);
    for (std::size_t c = 0; c < C; ++c) {
        double z = clf.biases[c];
        const auto& w = clf.weights[c];
        for (std::size_t d = 0; d < dim; ++d) z += w[d] * image[d];
        logits[c] = z;
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    std::vector<double> probs(C);
    for (std::size_t c = 0; c < C; ++c) {
        probs[c] = std::exp(logits[c] - zmax);
        sum += probs[c];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

inline TaskClassifier train_classifier(const ImageDataset& ds, int epochs = 30,
                                       double learning_rate = 0.05, int batch_size = 64,
                                       std::uint64_t seed = 0) {
    if (ds.images.empty()) throw DataError("train_classifier: empty dataset");
    {
        std::set<int> distinct(ds.labels.begin(), ds.labels.end());
        if (distinct.size() < 2) throw DataError("train_classifier: single-class dataset");
    }
    const int C = ds.num_classes;
    const std::size_t dim = std::size_t(ds.height) * ds.width;
    const std::size_t n = ds.images.size();

    TaskClassifier clf;
    clf.height = ds.height;
    clf.width = ds.width;
    clf.weights.assign(C, std::vector<double>(dim, 0.0));
    clf.biases.assign(C, 0.0);

    Rng rng(mix_seed(seed, 0xc1a55, 0));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<std::vector<double>> gw(C, std::vector<double>(dim));
    std::vector<double> gb(C);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t end = std::min(n, start + batch_size);
            const double inv_b = 1.0 / double(end - start);
            for (auto& g : gw) std::fill(g.begin(), g.end(), 0.0);
            std::fill(gb.begin(), gb.end(), 0.0);
            for (std::size_t k = start; k < end; ++k) {
                const auto& x = ds.images[order[k]];
                const int y = ds.labels[order[k]];
                std::vector<double> p = classify(clf, x);
                for (int c = 0; c < C; ++c) {
                    const double delta = (p[c] - (c == y ? 1.0 : 0.0)) * inv_b;
                    gb[c] += delta;
                    auto& g = gw[c];
                    for (std::size_t d = 0; d < dim; ++d) g[d] += delta * x[d];
                }
            }
            for (int c = 0; c < C; ++c) {
                clf.biases[c] -= learning_rate * gb[c];
                auto& w = clf.weights[c];
                const auto& g = gw[c];
                for (std::size_t d = 0; d < dim; ++d) w[d] -= learning_rate * g[d];
            }
        }
    }
    return clf;
}

inline double cross_entropy_loss(const TaskClassifier& clf, const ImageDataset& ds) {
    if (ds.images.empty()) throw DataError("cross_entropy_loss: empty dataset");
    double loss = 0.0;
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        const auto p = classify(clf, ds.images[i]);
        loss -= std::log(std::max(p[ds.labels[i]], 1e-300));
    }
    return loss / double(ds.images.size());
}

inline double classifier_accuracy(const TaskClassifier& clf, const ImageDataset& ds) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        const auto p = classify(clf, ds.images[i]);
        const int pred = int(std::max_element(p.begin(), p.end()) - p.begin());
        if (pred == ds.labels[i]) ++correct;
    }
    return ds.images.empty() ? 0.0 : double(correct) / double(ds.images.size());
}

namespace detail {

inline std::vector<double> floor_renorm(std::vector<double> p) {
    double sum = 0.0;
    for (double& v : p) {
        v = std::max(v, 1e-12);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace detail

inline double kl_divergence(const std::vector<double>& p_raw, const std::vector<double>& q_raw) {
    const auto p = detail::floor_renorm(p_raw);
    const auto q = detail::floor_renorm(q_raw);
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
    return std::max(0.0, kl);
}

inline SemanticQuality semantic_quality(const TaskClassifier& clf,
                                        const std::vector<std::vector<double>>& originals,
                                        const std::vector<std::vector<double>>& reconstructions,
                                        const std::vector<int>& labels) {
    if (originals.size() != reconstructions.size() || originals.size() != labels.size())
        throw ConsistencyError("semantic_quality: collection length mismatch");
    const std::size_t n = originals.size();
    SemanticQuality q;
    double conf_gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = classify(clf, originals[i]);
        const auto ph = classify(clf, reconstructions[i]);
        const int pred = int(std::max_element(ph.begin(), ph.end()) - ph.begin());
        if (pred == labels[i]) q.q_task += 1.0;
        conf_gap += std::fabs(*std::max_element(p.begin(), p.end()) -
                              *std::max_element(ph.begin(), ph.end()));
        q.s_dist += std::exp(-kl_divergence(p, ph));
    }
    q.q_task /= double(n);
    q.p_conf = 1.0 - conf_gap / double(n);
    q.s_dist /= double(n);
    q.q_sem = 0.6 * q.q_task + 0.25 * q.p_conf + 0.15 * q.s_dist;
    return q;
}

}  // namespace semqam
