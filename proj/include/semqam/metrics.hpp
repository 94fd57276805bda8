#pragma once

// Semantic-vulnerability metrics: per-symbol SSV, its SCI-weighted mean, and
// the semantic protection probability.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "semqam/common.hpp"
#include "semqam/constellation.hpp"
#include "semqam/source.hpp"

namespace semqam {

struct VulnerabilityReport {
    std::vector<double> per_symbol_ssv;  // S_i
    double weighted_ssv = 0.0;           // S_w
    std::optional<double> spp;           // S_p, empty when no above-mean symbols exist
    double mean_vulnerability = 0.0;     // mu_S
    std::vector<int> top_set;            // symbols with above-mean SCI
    double delta = 0.0;
    double gamma = 0.0;
};

inline std::vector<double> ssv_per_symbol(const Constellation& cst, const SourceStatistics& st) {
    const int M = int(cst.points.size());
    if (int(st.cooccurrence.size()) != M)
        throw ConsistencyError("ssv_per_symbol: statistics dimension " +
                               std::to_string(st.cooccurrence.size()) + " != constellation " +
                               std::to_string(M));
    std::vector<double> ssv(M, 0.0);
    const double m2 = double(M) * double(M);
    for (int i = 0; i < M; ++i) {
        const cplx xi = concept_point(cst, i);
        double acc = 0.0;
        for (int j = 0; j < M; ++j) {
            if (j == i) continue;
            acc += st.cooccurrence[i][j] * std::exp(-std::norm(xi - concept_point(cst, j)));
        }
        ssv[i] = m2 * acc;
    }
    return ssv;
}

inline double weighted_ssv(const Constellation& cst, const SourceStatistics& st) {
    const auto ssv = ssv_per_symbol(cst, st);
    double acc = 0.0;
    for (std::size_t i = 0; i < ssv.size(); ++i) acc += st.avg_sci[i] * ssv[i];
    return acc / double(ssv.size());
}

inline std::optional<double> spp_from_values(const std::vector<double>& ssv,
                                             const std::vector<double>& avg_sci,
                                             double mean_sci) {
    if (ssv.size() != avg_sci.size())
        throw ConsistencyError("spp_from_values: vulnerability/importance size mismatch");
    const int M = int(ssv.size());
    double mu_s = 0.0;
    for (double v : ssv) mu_s += v;
    mu_s /= double(M);
    int top = 0;
    int protected_count = 0;
    for (int i = 0; i < M; ++i) {
        if (avg_sci[i] > mean_sci) {
            ++top;
            if (ssv[i] < mu_s) ++protected_count;
        }
    }
    if (top == 0) return std::nullopt;
    return double(protected_count) / double(top);
}

inline std::optional<double> spp(const Constellation& cst, const SourceStatistics& st) {
    return spp_from_values(ssv_per_symbol(cst, st), st.avg_sci, st.mean_sci);
}

inline VulnerabilityReport vulnerability_report(const Constellation& cst,
                                                const SourceStatistics& st) {
    VulnerabilityReport rep;
    rep.per_symbol_ssv = ssv_per_symbol(cst, st);
    double mu_s = 0.0;
    double sw = 0.0;
    for (std::size_t i = 0; i < rep.per_symbol_ssv.size(); ++i) {
        mu_s += rep.per_symbol_ssv[i];
        sw += st.avg_sci[i] * rep.per_symbol_ssv[i];
    }
    rep.mean_vulnerability = mu_s / double(rep.per_symbol_ssv.size());
    rep.weighted_ssv = sw / double(rep.per_symbol_ssv.size());
    rep.top_set = top_semantic_set(st);
    rep.spp = spp(cst, st);
    rep.delta = st.concentration;
    rep.gamma = st.asymmetry;
    return rep;
}

}  // namespace semqam
