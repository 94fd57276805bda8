#pragma once

// Numerical checks for the suboptimality theory: the weighted-SSV gradient,
// KKT stationarity residuals, the protection-gap bound, and the BER-paradox
// Monte Carlo comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "semqam/channel.hpp"
#include "semqam/common.hpp"
#include "semqam/constellation.hpp"
#include "semqam/metrics.hpp"
#include "semqam/source.hpp"

namespace semqam {

struct StationarityReport {
    double zeta_star = 0.0;
    double kkt_residual_max = 0.0;
    double kkt_residual_mean = 0.0;
    double projected_gradient_norm = 0.0;
    bool is_stationary = false;
};

struct GapReport {
    double empirical_gap = 0.0;  // S_w(gray) - S_w(optimized)
    double bound_value = 0.0;
    double d_min = 0.0;
    double d_max = 0.0;
    double w_max = 0.0;
    double zeta_star = 0.0;
};

struct BerParadoxRow {
    double snr_db = 0.0;
    double ber_gray = 0.0;
    double ber_learned = 0.0;
    double sem_err_gray = 0.0;     // fraction of symbol errors whose sent symbol is top-set
    double sem_err_learned = 0.0;
    std::uint64_t errors_gray = 0;
    std::uint64_t errors_learned = 0;
};

namespace detail {

inline void check_symmetric(const SourceStatistics& st) {
    const int M = int(st.cooccurrence.size());
    for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j)
            if (std::fabs(st.cooccurrence[i][j] - st.cooccurrence[j][i]) > 1e-12)
                throw ConsistencyError("cooccurrence matrix is not symmetric");
}

}  // namespace detail

// Gradient of the weighted SSV with respect to the point assigned to each
// concept index.
inline std::vector<cplx> ssv_gradient(const Constellation& cst, const SourceStatistics& st) {
    const int M = int(cst.points.size());
    if (int(st.cooccurrence.size()) != M)
        throw ConsistencyError("ssv_gradient: dimension mismatch");
    detail::check_symmetric(st);
    std::vector<cplx> grad(M, cplx(0.0, 0.0));
    for (int k = 0; k < M; ++k) {
        const cplx xk = concept_point(cst, k);
        cplx acc(0.0, 0.0);
        for (int j = 0; j < M; ++j) {
            if (j == k) continue;
            const cplx d = xk - concept_point(cst, j);
            acc += (st.avg_sci[k] + st.avg_sci[j]) * st.cooccurrence[k][j] *
                   std::exp(-std::norm(d)) * d;
        }
        grad[k] = -2.0 * double(M) * acc;
    }
    return grad;
}

inline StationarityReport kkt_residual(const Constellation& cst, const SourceStatistics& st,
                                       double tolerance = 1e-4) {
    const int M = int(cst.points.size());
    if (int(st.cooccurrence.size()) != M)
        throw ConsistencyError("kkt_residual: dimension mismatch");
    detail::check_symmetric(st);

    double power_sum = 0.0;
    for (int i = 0; i < M; ++i) power_sum += std::norm(concept_point(cst, i));
    if (power_sum == 0.0) throw DegenerateError("kkt_residual: all-zero constellation");

    std::vector<cplx> force(M, cplx(0.0, 0.0));
    for (int i = 0; i < M; ++i) {
        const cplx xi = concept_point(cst, i);
        for (int j = 0; j < M; ++j) {
            if (j == i) continue;
            const cplx d = xi - concept_point(cst, j);
            force[i] += (st.avg_sci[i] + st.avg_sci[j]) * st.cooccurrence[i][j] *
                        std::exp(-std::norm(d)) * d;
        }
    }
    double dot = 0.0;
    for (int i = 0; i < M; ++i) {
        const cplx xi = concept_point(cst, i);
        dot += xi.real() * force[i].real() + xi.imag() * force[i].imag();
    }
    StationarityReport rep;
    rep.zeta_star = double(M) * dot / power_sum;

    double rmax = 0.0;
    double rsum = 0.0;
    for (int i = 0; i < M; ++i) {
        const cplx r = (2.0 * rep.zeta_star / double(M)) * concept_point(cst, i) - 2.0 * force[i];
        const double rn = std::abs(r);
        rmax = std::max(rmax, rn);
        rsum += rn;
    }
    rep.kkt_residual_max = rmax;
    rep.kkt_residual_mean = rsum / double(M);

    const std::vector<cplx> grad = ssv_gradient(cst, st);
    double gx = 0.0;
    for (int i = 0; i < M; ++i) {
        const cplx xi = concept_point(cst, i);
        gx += grad[i].real() * xi.real() + grad[i].imag() * xi.imag();
    }
    const double coeff = gx / power_sum;
    double pnorm2 = 0.0;
    for (int i = 0; i < M; ++i) {
        const cplx p = grad[i] - coeff * concept_point(cst, i);
        pnorm2 += std::norm(p);
    }
    rep.projected_gradient_norm = std::sqrt(pnorm2);
    rep.is_stationary = rep.kkt_residual_max <= tolerance;
    return rep;
}

inline double min_pairwise_distance(const Constellation& cst) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cst.points.size(); ++i)
        for (std::size_t j = i + 1; j < cst.points.size(); ++j)
            best = std::min(best, std::abs(cst.points[i] - cst.points[j]));
    return best;
}

inline GapReport gap_bound(const SourceStatistics& st, const Constellation& gray,
                           const Constellation& optimized, double P) {
    const int M = int(gray.points.size());
    if (int(optimized.points.size()) != M)
        throw ConsistencyError("gap_bound: constellation orders differ");
    if (int(st.cooccurrence.size()) != M) throw ConsistencyError("gap_bound: stats dimension");

    GapReport rep;
    rep.d_min = min_pairwise_distance(gray);
    rep.d_max = 2.0 * std::sqrt(double(M) * P);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;
            rep.w_max =
                std::max(rep.w_max, (st.avg_sci[i] + st.avg_sci[j]) * st.cooccurrence[i][j]);
        }
    rep.zeta_star = kkt_residual(optimized, st).zeta_star;
    const double kernel = std::exp(-rep.d_min * rep.d_min) - std::exp(-rep.d_max * rep.d_max);
    rep.bound_value =
        rep.w_max > 0.0
            ? st.concentration * st.asymmetry * double(M) / (1.0 + rep.zeta_star / rep.w_max) *
                  kernel
            : 0.0;
    rep.empirical_gap = weighted_ssv(gray, st) - weighted_ssv(optimized, st);
    return rep;
}

// Direct projected gradient descent on the weighted SSV. Used to manufacture
// near-stationary constellations for the residual checks.
inline Constellation minimize_weighted_ssv(Constellation cst, const SourceStatistics& st,
                                           int steps, double lr) {
    for (int t = 0; t < steps; ++t) {
        const std::vector<cplx> grad = ssv_gradient(cst, st);
        std::vector<cplx> next(cst.points.size());
        for (std::size_t c = 0; c < cst.points.size(); ++c) next[c] = cplx(0.0, 0.0);
        for (std::size_t c = 0; c < cst.points.size(); ++c)
            next[cst.labeling[c]] = concept_point(cst, int(c)) - lr * grad[c];
        cst.points = normalize_power(std::move(next), cst.power_budget);
    }
    return cst;
}

// Draws indices from the empirical usage distribution.
inline std::vector<int> sample_source_indices(const SourceStatistics& st, std::size_t count,
                                              Rng& rng) {
    std::vector<double> cdf(st.usage_counts.size());
    double total = 0.0;
    for (std::size_t i = 0; i < st.usage_counts.size(); ++i) {
        total += double(st.usage_counts[i]);
        cdf[i] = total;
    }
    if (total == 0.0) throw DataError("sample_source_indices: empty usage counts");
    std::vector<int> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double u = rng.uniform() * total;
        out[k] = int(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (out[k] >= int(cdf.size())) out[k] = int(cdf.size()) - 1;
    }
    return out;
}

inline std::vector<BerParadoxRow> ber_paradox_check(const Constellation& gray,
                                                    const Constellation& learned,
                                                    const SourceStatistics& st,
                                                    const std::vector<double>& snr_list,
                                                    std::size_t symbols_per_point,
                                                    std::uint64_t seed) {
    if (gray.points.size() != learned.points.size())
        throw ConsistencyError("ber_paradox_check: constellation orders differ");
    const std::vector<int> top = top_semantic_set(st);
    std::vector<bool> is_top(gray.points.size(), false);
    for (int i : top) is_top[i] = true;

    std::vector<BerParadoxRow> rows;
    for (std::size_t s = 0; s < snr_list.size(); ++s) {
        Rng rng(mix_seed(seed, 0xbe4, s));
        const std::vector<int> indices = sample_source_indices(st, symbols_per_point, rng);
        ChannelConfig chan;
        chan.snr_db = snr_list[s];
        chan.seed = mix_seed(seed, 0xc4a, s);
        const LinkResult rg = simulate_link(gray, indices, chan);
        const LinkResult rl = simulate_link(learned, indices, chan);

        auto top_error_fraction = [&](const LinkResult& r) {
            std::uint64_t top_errors = 0;
            std::uint64_t total_errors = 0;
            for (std::size_t i = 0; i < r.confusion.size(); ++i)
                for (std::size_t j = 0; j < r.confusion[i].size(); ++j) {
                    if (i == j) continue;
                    total_errors += r.confusion[i][j];
                    if (is_top[i]) top_errors += r.confusion[i][j];
                }
            return total_errors ? double(top_errors) / double(total_errors) : 0.0;
        };

        BerParadoxRow row;
        row.snr_db = snr_list[s];
        row.ber_gray = rg.ber();
        row.ber_learned = rl.ber();
        row.sem_err_gray = top_error_fraction(rg);
        row.sem_err_learned = top_error_fraction(rl);
        row.errors_gray = rg.symbol_errors;
        row.errors_learned = rl.symbol_errors;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace semqam
