#pragma once

// Shared fixtures and independent oracles for the test suite. Oracles are
// written against the metric definitions directly, not by calling back into
// the library loops they are meant to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "semqam/constellation.hpp"
#include "semqam/metrics.hpp"
#include "semqam/source.hpp"

namespace testutil {

using semqam::Constellation;
using semqam::cplx;
using semqam::Rng;
using semqam::SourceStatistics;

// Synthetic source with one dominant-importance symbol living inside a
// tightly coupled first block. A geometry that ignores importance keeps the
// dominant symbol crowded, which is exactly the regime the suboptimality
// checks need.
inline SourceStatistics make_synthetic_stats(int M, std::uint64_t seed) {
    Rng rng(semqam::mix_seed(seed, 0x57a7, std::uint64_t(M)));
    SourceStatistics st;
    st.avg_sci.assign(M, 0.0);
    st.usage_counts.assign(M, 0);
    st.cooccurrence.assign(M, std::vector<double>(M, 0.0));
    for (int i = 0; i < M; ++i) {
        st.avg_sci[i] = i == 0 ? 0.9 : 0.1 + 0.04 * rng.uniform();
        st.usage_counts[i] = 50 + std::int64_t(rng.below(50));
    }
    const int half = M / 2;
    double total = 0.0;
    for (int i = 0; i < M; ++i) {
        for (int j = i + 1; j < M; ++j) {
            double w = 1.0;
            if (i < half && j < half) w = 4.0;
            else if (i >= half) w = 2.0;
            w += 0.2 * rng.uniform();
            st.cooccurrence[i][j] = st.cooccurrence[j][i] = w;
            total += 2.0 * w;
        }
    }
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) st.cooccurrence[i][j] /= total;

    double mean = 0.0;
    for (double v : st.avg_sci) mean += v;
    st.mean_sci = mean / double(M);
    st.concentration = 0.0;
    for (double v : st.avg_sci) st.concentration = std::max(st.concentration, v - st.mean_sci);
    double pmax = -1.0;
    double pmin = 1e300;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;
            pmax = std::max(pmax, st.cooccurrence[i][j]);
            pmin = std::min(pmin, st.cooccurrence[i][j]);
        }
    st.asymmetry = pmax - pmin;
    return st;
}

// Random power-normalized constellation with a shuffled labeling.
inline Constellation random_constellation(int M, double P, Rng& rng) {
    Constellation cst;
    cst.power_budget = P;
    cst.points.resize(M);
    for (int i = 0; i < M; ++i) cst.points[i] = cplx(rng.normal(), rng.normal());
    cst.points = semqam::normalize_power(std::move(cst.points), P);
    cst.labeling.resize(M);
    for (int i = 0; i < M; ++i) cst.labeling[i] = i;
    for (std::size_t i = cst.labeling.size(); i > 1; --i)
        std::swap(cst.labeling[i - 1], cst.labeling[rng.below(i)]);
    return cst;
}

// Antipodal two-point fixture with a single co-occurring pair.
inline Constellation two_point_constellation() {
    Constellation cst;
    cst.points = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
    cst.power_budget = 1.0;
    cst.labeling = {0, 1};
    return cst;
}

inline SourceStatistics two_point_stats() {
    SourceStatistics st;
    st.avg_sci = {0.5, 0.5};
    st.cooccurrence = {{0.0, 0.5}, {0.5, 0.0}};
    st.mean_sci = 0.5;
    st.concentration = 0.0;
    st.asymmetry = 0.0;
    st.usage_counts = {1, 1};
    return st;
}

// Quadratic-time re-derivation of the per-symbol vulnerability from its
// definition, using explicit real arithmetic.
inline std::vector<double> naive_ssv(const Constellation& cst, const SourceStatistics& st) {
    const int M = int(cst.points.size());
    std::vector<double> out(M, 0.0);
    for (int i = 0; i < M; ++i) {
        const cplx xi = cst.points[cst.labeling[i]];
        double sum = 0.0;
        for (int j = 0; j < M; ++j) {
            if (j == i) continue;
            const cplx xj = cst.points[cst.labeling[j]];
            const double dre = xi.real() - xj.real();
            const double dim = xi.imag() - xj.imag();
            sum += st.cooccurrence[i][j] * std::exp(-(dre * dre + dim * dim));
        }
        out[i] = double(M) * double(M) * sum;
    }
    return out;
}

inline double naive_weighted_ssv(const Constellation& cst, const SourceStatistics& st) {
    const auto s = naive_ssv(cst, st);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += st.avg_sci[i] * s[i];
    return acc / double(s.size());
}

// Central finite differences of the weighted vulnerability with respect to
// the point assigned to each concept.
inline std::vector<cplx> fd_ssv_gradient(const Constellation& cst, const SourceStatistics& st,
                                         double h = 1e-6) {
    const int M = int(cst.points.size());
    std::vector<cplx> grad(M);
    Constellation work = cst;
    for (int k = 0; k < M; ++k) {
        const int p = cst.labeling[k];
        double parts[2];
        for (int comp = 0; comp < 2; ++comp) {
            const cplx orig = work.points[p];
            const cplx step = comp == 0 ? cplx(h, 0.0) : cplx(0.0, h);
            work.points[p] = orig + step;
            const double up = semqam::weighted_ssv(work, st);
            work.points[p] = orig - step;
            const double dn = semqam::weighted_ssv(work, st);
            work.points[p] = orig;
            parts[comp] = (up - dn) / (2.0 * h);
        }
        grad[k] = cplx(parts[0], parts[1]);
    }
    return grad;
}

// Central finite differences of the shaping loss with respect to each stored
// point.
inline std::vector<cplx> fd_qam_loss_gradient(const Constellation& cst,
                                              const std::vector<int>& sent,
                                              const std::vector<cplx>& received, double n0,
                                              const std::vector<double>& weights,
                                              double h = 1e-6) {
    Constellation work = cst;
    std::vector<cplx> grad(cst.points.size());
    for (std::size_t p = 0; p < cst.points.size(); ++p) {
        double parts[2];
        for (int comp = 0; comp < 2; ++comp) {
            const cplx orig = work.points[p];
            const cplx step = comp == 0 ? cplx(h, 0.0) : cplx(0.0, h);
            work.points[p] = orig + step;
            const double up = semqam::qam_loss(work, sent, received, n0, weights);
            work.points[p] = orig - step;
            const double dn = semqam::qam_loss(work, sent, received, n0, weights);
            work.points[p] = orig;
            parts[comp] = (up - dn) / (2.0 * h);
        }
        grad[p] = cplx(parts[0], parts[1]);
    }
    return grad;
}

// Relative error between two gradient fields, measured on whole-vector norms.
inline double grad_rel_err(const std::vector<cplx>& got, const std::vector<cplx>& want) {
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        diff += std::norm(got[i] - want[i]);
        ref += std::norm(want[i]);
    }
    return std::sqrt(diff) / std::max(1e-12, std::sqrt(ref));
}

inline double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1e-12, std::fabs(want));
}

}  // namespace testutil
