#pragma once

// Concept vocabulary learning and source statistics: k-means codebook,
// nearest-neighbor quantization, SCI scoring (mutual-information relevance
// times label-purity), co-occurrence statistics, Top-K selection, and
// scatter-and-zero-fill reconstruction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "semqam/common.hpp"
#include "semqam/ingest.hpp"

namespace semqam {

struct ConceptCodebook {
    std::vector<std::vector<double>> entries;  // M vectors of dimension d_p
    int bits_per_symbol = 0;                   // log2(M)
};

struct ConceptGrid {
    std::vector<int> indices;          // N concept indices, one per slot
    std::vector<double> per_slot_sci;  // N reals in (0,1)
};

struct SourceStatistics {
    std::vector<double> avg_sci;                   // M reals in (0,1)
    std::vector<std::vector<double>> cooccurrence; // M x M, symmetric, zero diagonal
    double mean_sci = 0.0;                         // mu over symbols
    double concentration = 0.0;                    // delta = max_i(avg_sci_i - mean)
    double asymmetry = 0.0;                        // gamma = max offdiag - min offdiag
    std::vector<std::int64_t> usage_counts;        // M integers
};

constexpr double kSciEps = 1e-3;

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        d += t * t;
    }
    return d;
}

inline bool is_power_of_four(int m) {
    if (m < 4) return false;
    while (m % 4 == 0) m /= 4;
    return m == 1;
}

}  // namespace detail

inline ConceptCodebook train_codebook(const std::vector<std::vector<double>>& patches, int M,
                                      std::uint64_t seed, int max_iters = 100,
                                      double tol = 1e-6) {
    if (patches.empty()) throw DataError("train_codebook: no patches");
    {
        std::set<std::vector<double>> distinct;
        for (const auto& p : patches) {
            distinct.insert(p);
            if (int(distinct.size()) >= M) break;
        }
        if (int(distinct.size()) < M)
            throw DataError("train_codebook: fewer than " + std::to_string(M) +
                            " distinct patches");
    }
    const std::size_t n = patches.size();
    Rng rng(mix_seed(seed, 0xc0de, std::uint64_t(M)));

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.reserve(M);
    centroids.push_back(patches[rng.below(n)]);
    std::vector<double> d2(n);
    while (int(centroids.size()) < M) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, detail::sq_dist(patches[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        centroids.push_back(patches[pick]);
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < max_iters; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int bj = 0;
            for (int j = 0; j < M; ++j) {
                const double d = detail::sq_dist(patches[i], centroids[j]);
                if (d < best) {
                    best = d;
                    bj = j;
                }
            }
            assign[i] = bj;
        }
        std::vector<std::vector<double>> sums(M, std::vector<double>(patches[0].size(), 0.0));
        std::vector<std::size_t> counts(M, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            auto& s = sums[assign[i]];
            for (std::size_t d = 0; d < s.size(); ++d) s[d] += patches[i][d];
        }
        double max_move = 0.0;
        for (int j = 0; j < M; ++j) {
            if (counts[j] == 0) {
                // reseed to the point farthest from its assigned centroid
                double far = -1.0;
                std::size_t fi = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = detail::sq_dist(patches[i], centroids[assign[i]]);
                    if (d > far) {
                        far = d;
                        fi = i;
                    }
                }
                max_move = std::max(max_move,
                                    std::sqrt(detail::sq_dist(centroids[j], patches[fi])));
                centroids[j] = patches[fi];
                continue;
            }
            std::vector<double> next(sums[j].size());
            for (std::size_t d = 0; d < next.size(); ++d) next[d] = sums[j][d] / double(counts[j]);
            max_move = std::max(max_move, std::sqrt(detail::sq_dist(centroids[j], next)));
            centroids[j] = std::move(next);
        }
        if (max_move < tol) break;
    }

    ConceptCodebook cb;
    cb.entries = std::move(centroids);
    cb.bits_per_symbol = int(std::lround(std::log2(double(M))));
    for (const auto& e : cb.entries)
        for (double v : e)
            if (!std::isfinite(v)) throw NumericError("train_codebook: non-finite centroid");
    return cb;
}

inline int quantize(const ConceptCodebook& cb, const std::vector<double>& patch) {
    if (patch.size() != cb.entries.at(0).size())
        throw DataError("quantize: patch dimension " + std::to_string(patch.size()) +
                        " != codebook dimension " + std::to_string(cb.entries[0].size()));
    double best = std::numeric_limits<double>::infinity();
    int bi = 0;
    for (std::size_t k = 0; k < cb.entries.size(); ++k) {
        const double d = detail::sq_dist(patch, cb.entries[k]);
        if (d < best) {
            best = d;
            bi = int(k);
        }
    }
    return bi;
}

inline std::vector<int> quantize_grid(const ConceptCodebook& cb, const PatchGrid& grid) {
    std::vector<int> idx(grid.patches.size());
    for (std::size_t s = 0; s < grid.patches.size(); ++s) idx[s] = quantize(cb, grid.patches[s]);
    return idx;
}

struct SciModel {
    std::vector<double> slot_relevance;           // N, normalized MI(Z_s; Y)
    std::vector<double> concept_informativeness;  // M, normalized 1 - H(Y|c)/log|Y|
};

// Per-occurrence SCI for the concept code observed at a slot.
inline double occurrence_sci(const SciModel& model, int slot, int code) {
    const double v = model.slot_relevance[slot] * model.concept_informativeness[code];
    return std::clamp(v, kSciEps, 1.0 - kSciEps);
}

// Raw per-slot mutual information between the slot's concept index and the
// label, add-one smoothed over the full M x |Y| table.
inline std::vector<double> slot_mutual_information(const std::vector<std::vector<int>>& grids,
                                                   const std::vector<int>& labels, int M, int N,
                                                   int num_classes) {
    if (grids.empty() || labels.empty()) throw DataError("slot_mutual_information: empty input");
    if (grids.size() != labels.size())
        throw ConsistencyError("slot_mutual_information: grid/label count mismatch");
    std::vector<double> mi_per_slot(N, 0.0);
    std::vector<double> joint(std::size_t(M) * num_classes);
    for (int s = 0; s < N; ++s) {
        std::fill(joint.begin(), joint.end(), 1.0);
        for (std::size_t g = 0; g < grids.size(); ++g)
            joint[std::size_t(grids[g][s]) * num_classes + labels[g]] += 1.0;
        const double total = double(M) * num_classes + double(grids.size());
        std::vector<double> pz(M, 0.0), py(num_classes, 0.0);
        for (int z = 0; z < M; ++z)
            for (int y = 0; y < num_classes; ++y) {
                const double p = joint[std::size_t(z) * num_classes + y] / total;
                pz[z] += p;
                py[y] += p;
            }
        double mi = 0.0;
        for (int z = 0; z < M; ++z)
            for (int y = 0; y < num_classes; ++y) {
                const double p = joint[std::size_t(z) * num_classes + y] / total;
                mi += p * std::log(p / (pz[z] * py[y]));
            }
        mi_per_slot[s] = std::max(0.0, mi);
    }
    return mi_per_slot;
}

// Raw label purity per concept code: 1 - H(Y | code=c)/log|Y|, add-one
// smoothed.
inline std::vector<double> concept_label_purity(const std::vector<std::vector<int>>& grids,
                                                const std::vector<int>& labels, int M,
                                                int num_classes) {
    if (grids.empty() || labels.empty()) throw DataError("concept_label_purity: empty input");
    std::vector<double> label_counts(std::size_t(M) * num_classes, 1.0);
    for (std::size_t g = 0; g < grids.size(); ++g)
        for (int s = 0; s < int(grids[g].size()); ++s)
            label_counts[std::size_t(grids[g][s]) * num_classes + labels[g]] += 1.0;
    std::vector<double> purity(M, 0.0);
    for (int c = 0; c < M; ++c) {
        double tot = 0.0;
        for (int y = 0; y < num_classes; ++y) tot += label_counts[std::size_t(c) * num_classes + y];
        double h = 0.0;
        for (int y = 0; y < num_classes; ++y) {
            const double p = label_counts[std::size_t(c) * num_classes + y] / tot;
            if (p > 0.0) h -= p * std::log(p);
        }
        purity[c] = 1.0 - h / std::log(double(num_classes));
    }
    return purity;
}

inline SciModel estimate_sci(const std::vector<std::vector<int>>& grids,
                             const std::vector<int>& labels, int M, int N, int num_classes) {
    SciModel model;
    model.slot_relevance = slot_mutual_information(grids, labels, M, N, num_classes);
    model.concept_informativeness = concept_label_purity(grids, labels, M, num_classes);
    const double max_r =
        *std::max_element(model.slot_relevance.begin(), model.slot_relevance.end());
    if (max_r > 0.0)
        for (double& r : model.slot_relevance) r /= max_r;
    const double max_g = *std::max_element(model.concept_informativeness.begin(),
                                           model.concept_informativeness.end());
    if (max_g > 0.0)
        for (double& g : model.concept_informativeness) g /= max_g;
    return model;
}

inline ConceptGrid make_concept_grid(const SciModel& model, const std::vector<int>& indices) {
    ConceptGrid grid;
    grid.indices = indices;
    grid.per_slot_sci.resize(indices.size());
    for (std::size_t s = 0; s < indices.size(); ++s)
        grid.per_slot_sci[s] = occurrence_sci(model, int(s), indices[s]);
    return grid;
}

inline SourceStatistics compute_statistics(const std::vector<ConceptGrid>& grids, int M) {
    if (grids.empty()) throw DataError("compute_statistics: no grids");
    SourceStatistics st;
    st.avg_sci.assign(M, 0.0);
    st.usage_counts.assign(M, 0);
    st.cooccurrence.assign(M, std::vector<double>(M, 0.0));

    std::vector<double> sci_sum(M, 0.0);
    double pair_total = 0.0;
    for (const auto& g : grids) {
        const std::size_t n = g.indices.size();
        for (std::size_t s = 0; s < n; ++s) {
            const int c = g.indices[s];
            ++st.usage_counts[c];
            sci_sum[c] += g.per_slot_sci[s];
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                const int i = g.indices[a];
                const int j = g.indices[b];
                if (i == j) continue;
                st.cooccurrence[i][j] += 1.0;
                st.cooccurrence[j][i] += 1.0;
                pair_total += 1.0;
            }
    }
    for (int i = 0; i < M; ++i)
        st.avg_sci[i] =
            st.usage_counts[i] > 0 ? sci_sum[i] / double(st.usage_counts[i]) : kSciEps;
    if (pair_total > 0.0) {
        const double norm = 2.0 * pair_total;
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) st.cooccurrence[i][j] /= norm;
    }

    st.mean_sci = std::accumulate(st.avg_sci.begin(), st.avg_sci.end(), 0.0) / double(M);
    st.concentration = 0.0;
    for (double v : st.avg_sci) st.concentration = std::max(st.concentration, v - st.mean_sci);
    double pmax = -std::numeric_limits<double>::infinity();
    double pmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (i == j) continue;
            pmax = std::max(pmax, st.cooccurrence[i][j]);
            pmin = std::min(pmin, st.cooccurrence[i][j]);
        }
    st.asymmetry = (M > 1) ? pmax - pmin : 0.0;
    return st;
}

// Symbols whose average SCI strictly exceeds the mean.
inline std::vector<int> top_semantic_set(const SourceStatistics& st) {
    std::vector<int> out;
    for (std::size_t i = 0; i < st.avg_sci.size(); ++i)
        if (st.avg_sci[i] > st.mean_sci) out.push_back(int(i));
    return out;
}

inline std::vector<int> top_k(const std::vector<double>& per_slot_sci, int K) {
    const int N = int(per_slot_sci.size());
    if (K < 1 || K > N)
        throw ConfigError("top_k: K=" + std::to_string(K) + " out of range [1," +
                          std::to_string(N) + "]");
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (per_slot_sci[a] != per_slot_sci[b]) return per_slot_sci[a] > per_slot_sci[b];
        return a < b;
    });
    std::vector<int> out(order.begin(), order.begin() + K);
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<double> reconstruct(const ConceptCodebook& cb,
                                       const std::vector<std::pair<int, int>>& received,
                                       int slot_rows, int slot_cols, int patch_side, int height,
                                       int width) {
    const int N = slot_rows * slot_cols;
    PatchGrid grid;
    grid.slot_rows = slot_rows;
    grid.slot_cols = slot_cols;
    grid.patch_side = patch_side;
    grid.patches.assign(std::size_t(N),
                        std::vector<double>(std::size_t(patch_side) * patch_side, 0.0));
    std::vector<bool> seen(N, false);
    for (const auto& [pos, idx] : received) {
        if (pos < 0 || pos >= N)
            throw ConsistencyError("reconstruct: position " + std::to_string(pos) +
                                   " out of range");
        if (seen[pos])
            throw ConsistencyError("reconstruct: duplicate position " + std::to_string(pos));
        seen[pos] = true;
        grid.patches[pos] = cb.entries.at(idx);
    }
    return unpatchify(grid, height, width);
}

}  // namespace semqam
