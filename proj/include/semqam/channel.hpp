#pragma once

// AWGN link simulation: modulate concept indices, add seeded complex noise,
// demap by minimum distance, count symbol and bit errors.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "semqam/common.hpp"
#include "semqam/constellation.hpp"

namespace semqam {

struct ChannelConfig {
    double snr_db = 10.0;  // E_s/N0 per complex symbol
    std::uint64_t seed = 0;
};

struct LinkResult {
    std::uint64_t symbols_sent = 0;
    std::uint64_t symbol_errors = 0;
    std::uint64_t bit_errors = 0;
    int bits_per_symbol = 0;
    std::vector<std::vector<std::int64_t>> confusion;  // sent -> decoded counts

    double ser() const { return symbols_sent ? double(symbol_errors) / double(symbols_sent) : 0.0; }
    double ber() const {
        return symbols_sent ? double(bit_errors) / (double(bits_per_symbol) * double(symbols_sent))
                            : 0.0;
    }
};

inline std::vector<cplx> awgn(const std::vector<cplx>& symbols, double snr_db, double P,
                              std::uint64_t seed) {
    if (P <= 0.0) throw ConfigError("awgn: P must be positive");
    const double sigma2 = P / db_to_linear(snr_db);
    const double sigma = std::sqrt(sigma2 / 2.0);
    Rng rng(mix_seed(seed, 0xa963, 0));
    std::vector<cplx> out(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i)
        out[i] = symbols[i] + cplx(sigma * rng.normal(), sigma * rng.normal());
    return out;
}

inline int demap(const Constellation& cst, cplx received) {
    if (!std::isfinite(received.real()) || !std::isfinite(received.imag()))
        throw NumericError("demap: non-finite received symbol");
    double best = std::numeric_limits<double>::infinity();
    int bp = 0;
    for (std::size_t i = 0; i < cst.points.size(); ++i) {
        const double d = std::norm(received - cst.points[i]);
        if (d < best) {
            best = d;
            bp = int(i);
        }
    }
    // invert the labeling permutation: point index -> concept index
    for (std::size_t c = 0; c < cst.labeling.size(); ++c)
        if (cst.labeling[c] == bp) return int(c);
    throw ConsistencyError("demap: labeling is not a bijection");
}

inline LinkResult simulate_link(const Constellation& cst, const std::vector<int>& concept_indices,
                                const ChannelConfig& chan,
                                std::vector<int>* decoded_out = nullptr) {
    const int M = int(cst.points.size());
    const int b = int(std::lround(std::log2(double(M))));
    LinkResult res;
    res.bits_per_symbol = b;
    res.symbols_sent = concept_indices.size();
    res.confusion.assign(M, std::vector<std::int64_t>(M, 0));
    if (decoded_out) {
        decoded_out->clear();
        decoded_out->reserve(concept_indices.size());
    }

    std::vector<int> inverse(M);
    for (int c = 0; c < M; ++c) inverse[cst.labeling[c]] = c;

    const double sigma2 = cst.power_budget / db_to_linear(chan.snr_db);
    const double sigma = std::sqrt(sigma2 / 2.0);
    Rng rng(mix_seed(chan.seed, 0xa963, 0));
    for (int idx : concept_indices) {
        const cplx sent = concept_point(cst, idx);
        const cplx received = sent + cplx(sigma * rng.normal(), sigma * rng.normal());
        double best = std::numeric_limits<double>::infinity();
        int bp = 0;
        for (int i = 0; i < M; ++i) {
            const double d = std::norm(received - cst.points[i]);
            if (d < best) {
                best = d;
                bp = i;
            }
        }
        const int decoded = inverse[bp];
        ++res.confusion[idx][decoded];
        if (decoded_out) decoded_out->push_back(decoded);
        if (decoded != idx) {
            ++res.symbol_errors;
            res.bit_errors += std::popcount(std::uint32_t(decoded) ^ std::uint32_t(idx));
        }
    }
    return res;
}

}  // namespace semqam
