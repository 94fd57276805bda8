#pragma once

// Constellation geometry and shaping: Gray-coded square QAM baselines and the
// SCI-weighted softmax trainer with a hard average-power constraint.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "semqam/common.hpp"

namespace semqam {

using cplx = std::complex<double>;

struct Constellation {
    std::vector<cplx> points;   // M symbol coordinates
    double power_budget = 1.0;  // P, mean |x|^2
    std::vector<int> labeling;  // concept index -> point index, bijective
};

struct TrainConfig {
    int steps = 4000;
    double learning_rate = 1e-3;
    double snr_min_db = -10.0;
    double snr_max_db = 20.0;
    int batch_size = 128;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    int checkpoint_every = 200;
    int validation_size = 512;
};

inline cplx concept_point(const Constellation& cst, int concept_index) {
    return cst.points[cst.labeling[concept_index]];
}

namespace detail {

inline int gray_encode(int v) { return v ^ (v >> 1); }

}  // namespace detail

inline Constellation gray_qam(int M, double P) {
    if (M != 4 && M != 16 && M != 64 && M != 256 && M != 1024)
        throw ConfigError("gray_qam: unsupported order " + std::to_string(M));
    const int m = int(std::lround(std::sqrt(double(M))));
    const int b = int(std::lround(std::log2(double(M))));
    const double mean_power = 2.0 * (double(m) * m - 1.0) / 3.0;
    const double scale = std::sqrt(P / mean_power);

    Constellation cst;
    cst.power_budget = P;
    cst.points.resize(M);
    cst.labeling.assign(M, 0);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int point = r * m + c;
            cst.points[point] = cplx((2 * c - (m - 1)) * scale, (2 * r - (m - 1)) * scale);
            const int idx = (detail::gray_encode(r) << (b / 2)) | detail::gray_encode(c);
            cst.labeling[idx] = point;
        }
    }
    return cst;
}

inline std::vector<cplx> normalize_power(std::vector<cplx> points, double P,
                                         bool* degenerate = nullptr) {
    if (points.empty()) throw ConfigError("normalize_power: empty constellation");
    if (degenerate) *degenerate = false;
    cplx mean(0.0, 0.0);
    for (const cplx& p : points) {
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw NumericError("normalize_power: non-finite coordinate");
        mean += p;
    }
    mean /= double(points.size());
    double power = 0.0;
    for (cplx& p : points) {
        p -= mean;
        power += std::norm(p);
    }
    power /= double(points.size());
    if (power == 0.0) {
        if (degenerate) *degenerate = true;
        return points;
    }
    const double s = std::sqrt(P / power);
    for (cplx& p : points) p *= s;
    return points;
}

inline double mean_power(const std::vector<cplx>& points) {
    double s = 0.0;
    for (const cplx& p : points) s += std::norm(p);
    return s / double(points.size());
}

namespace detail {

// Softmax over -|y - x_i|^2 / N0 for all points, numerically stabilized.
inline void point_softmax(const std::vector<cplx>& points, cplx received, double n0,
                          std::vector<double>& out) {
    const std::size_t M = points.size();
    out.resize(M);
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < M; ++i) {
        out[i] = -std::norm(received - points[i]) / n0;
        zmax = std::max(zmax, out[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        out[i] = std::exp(out[i] - zmax);
        sum += out[i];
    }
    for (std::size_t i = 0; i < M; ++i) out[i] /= sum;
}

}  // namespace detail

inline double qam_loss(const Constellation& cst, const std::vector<int>& sent_indices,
                       const std::vector<cplx>& received, double n0,
                       const std::vector<double>& sci_weights) {
    if (n0 <= 0.0) throw ConfigError("qam_loss: N0 must be positive");
    if (sent_indices.size() != received.size() || sent_indices.size() != sci_weights.size())
        throw ConsistencyError("qam_loss: input length mismatch");
    std::vector<double> probs;
    double loss = 0.0;
    for (std::size_t j = 0; j < sent_indices.size(); ++j) {
        detail::point_softmax(cst.points, received[j], n0, probs);
        const int target = cst.labeling[sent_indices[j]];
        loss -= sci_weights[j] * std::log(std::max(probs[target], 1e-300));
    }
    return loss / double(sent_indices.size());
}

inline std::vector<cplx> qam_loss_gradient(const Constellation& cst,
                                           const std::vector<int>& sent_indices,
                                           const std::vector<cplx>& received, double n0,
                                           const std::vector<double>& sci_weights) {
    if (n0 <= 0.0) throw ConfigError("qam_loss_gradient: N0 must be positive");
    if (sent_indices.size() != received.size() || sent_indices.size() != sci_weights.size())
        throw ConsistencyError("qam_loss_gradient: input length mismatch");
    const std::size_t M = cst.points.size();
    std::vector<cplx> grad(M, cplx(0.0, 0.0));
    std::vector<double> probs;
    const double inv_n = 1.0 / double(sent_indices.size());
    for (std::size_t j = 0; j < sent_indices.size(); ++j) {
        detail::point_softmax(cst.points, received[j], n0, probs);
        const int target = cst.labeling[sent_indices[j]];
        const double w = sci_weights[j] * inv_n * 2.0 / n0;
        for (std::size_t i = 0; i < M; ++i) {
            const double coeff = w * ((int(i) == target ? 1.0 : 0.0) - probs[i]);
            grad[i] += coeff * (cst.points[i] - received[j]);
        }
    }
    return grad;
}

struct SciSample {
    int index = 0;
    double sci = 0.0;
};

using SampleStream = std::function<SciSample(Rng&)>;

// Uniform draws from a fixed pool of observed (index, sci) occurrences.
inline SampleStream pool_stream(std::vector<SciSample> pool) {
    if (pool.empty()) throw DataError("pool_stream: empty pool");
    return [pool = std::move(pool)](Rng& rng) { return pool[rng.below(pool.size())]; };
}

inline Constellation train_constellation(const SampleStream& stream, int M, double P,
                                         const TrainConfig& cfg) {
    if (cfg.steps < 0) throw ConfigError("train_constellation: negative steps");
    if (cfg.snr_min_db > cfg.snr_max_db)
        throw ConfigError("train_constellation: snr_min_db > snr_max_db");
    if (cfg.batch_size < 1) throw ConfigError("train_constellation: batch_size < 1");

    const Constellation gray = gray_qam(M, P);
    Constellation cst;
    cst.power_budget = P;
    cst.labeling.resize(M);
    cst.points.resize(M);
    for (int i = 0; i < M; ++i) {
        cst.labeling[i] = i;
        cst.points[i] = concept_point(gray, i);
    }
    if (cfg.steps == 0) return cst;

    Rng rng(mix_seed(cfg.seed, 0x7a11, std::uint64_t(M)));

    // Frozen validation batch: samples, mean-1 weights, and unit noise reused
    // at the three probe SNRs.
    Rng val_rng(mix_seed(cfg.seed, 0xa11d, std::uint64_t(M)));
    std::vector<int> val_idx(cfg.validation_size);
    std::vector<double> val_w(cfg.validation_size);
    std::vector<cplx> val_noise(cfg.validation_size);
    double wsum = 0.0;
    for (int k = 0; k < cfg.validation_size; ++k) {
        const SciSample s = stream(val_rng);
        val_idx[k] = s.index;
        val_w[k] = s.sci;
        wsum += s.sci;
        val_noise[k] = cplx(val_rng.normal(), val_rng.normal());
    }
    for (double& w : val_w) w *= double(cfg.validation_size) / wsum;
    const double val_snrs[3] = {cfg.snr_min_db, 0.5 * (cfg.snr_min_db + cfg.snr_max_db),
                                cfg.snr_max_db};
    auto validation_loss = [&](const Constellation& c) {
        double total = 0.0;
        std::vector<cplx> rec(cfg.validation_size);
        for (double snr : val_snrs) {
            const double n0 = P / db_to_linear(snr);
            const double sigma = std::sqrt(n0 / 2.0);
            for (int k = 0; k < cfg.validation_size; ++k)
                rec[k] = concept_point(c, val_idx[k]) + sigma * val_noise[k];
            total += qam_loss(c, val_idx, rec, n0, val_w);
        }
        return total / 3.0;
    };

    std::vector<cplx> m_state(M, cplx(0.0, 0.0));
    std::vector<cplx> v_state(M, cplx(0.0, 0.0));
    Constellation best = cst;
    double best_loss = std::numeric_limits<double>::infinity();
    bool have_checkpoint = false;

    std::vector<int> batch_idx(cfg.batch_size);
    std::vector<double> batch_w(cfg.batch_size);
    std::vector<cplx> batch_rec(cfg.batch_size);
    for (int step = 1; step <= cfg.steps; ++step) {
        double bw_sum = 0.0;
        for (int k = 0; k < cfg.batch_size; ++k) {
            const SciSample s = stream(rng);
            batch_idx[k] = s.index;
            batch_w[k] = s.sci;
            bw_sum += s.sci;
        }
        const double w_scale = double(cfg.batch_size) / bw_sum;
        for (double& w : batch_w) w *= w_scale;

        const double snr = rng.uniform(cfg.snr_min_db, cfg.snr_max_db);
        const double n0 = P / db_to_linear(snr);
        const double sigma = std::sqrt(n0 / 2.0);
        for (int k = 0; k < cfg.batch_size; ++k)
            batch_rec[k] =
                concept_point(cst, batch_idx[k]) + cplx(sigma * rng.normal(), sigma * rng.normal());

        const std::vector<cplx> grad = qam_loss_gradient(cst, batch_idx, batch_rec, n0, batch_w);
        const double bc1 = 1.0 - std::pow(cfg.beta1, double(step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, double(step));
        for (int i = 0; i < M; ++i) {
            const double gr = grad[i].real();
            const double gi = grad[i].imag();
            m_state[i] = cplx(cfg.beta1 * m_state[i].real() + (1.0 - cfg.beta1) * gr,
                              cfg.beta1 * m_state[i].imag() + (1.0 - cfg.beta1) * gi);
            v_state[i] = cplx(cfg.beta2 * v_state[i].real() + (1.0 - cfg.beta2) * gr * gr,
                              cfg.beta2 * v_state[i].imag() + (1.0 - cfg.beta2) * gi * gi);
            const double mr = m_state[i].real() / bc1;
            const double mi = m_state[i].imag() / bc1;
            const double vr = v_state[i].real() / bc2;
            const double vi = v_state[i].imag() / bc2;
            cst.points[i] -= cplx(cfg.learning_rate * mr / (std::sqrt(vr) + cfg.adam_eps),
                                  cfg.learning_rate * mi / (std::sqrt(vi) + cfg.adam_eps));
        }
        cst.points = normalize_power(std::move(cst.points), P);

        if (step % cfg.checkpoint_every == 0 || step == cfg.steps) {
            const double vl = validation_loss(cst);
            if (!have_checkpoint || vl < best_loss) {
                best_loss = vl;
                best = cst;
                have_checkpoint = true;
            }
        }
    }
    return best;
}

}  // namespace semqam
