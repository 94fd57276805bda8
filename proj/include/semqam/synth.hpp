#pragma once

// Synthetic digit dataset: 7x5 glyphs upscaled and jittered onto a 28x28
// canvas. Gives a deterministic, locally generated stand-in with the same
// shape and label structure as the usual handwritten-digit corpora.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semqam/common.hpp"
#include "semqam/ingest.hpp"

namespace semqam {

namespace detail {

inline const std::array<std::array<const char*, 7>, 10>& digit_glyphs() {
    static const std::array<std::array<const char*, 7>, 10> glyphs = {{
        {"#####", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"},
        {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."},
        {"#####", "....#", "....#", "#####", "#....", "#....", "#####"},
        {"#####", "....#", "....#", ".####", "....#", "....#", "#####"},
        {"#...#", "#...#", "#...#", "#####", "....#", "....#", "....#"},
        {"#####", "#....", "#....", "#####", "....#", "....#", "#####"},
        {"#####", "#....", "#....", "#####", "#...#", "#...#", "#####"},
        {"#####", "....#", "...#.", "..#..", "..#..", ".#...", ".#..."},
        {"#####", "#...#", "#...#", "#####", "#...#", "#...#", "#####"},
        {"#####", "#...#", "#...#", "#####", "....#", "....#", "#####"},
    }};
    return glyphs;
}

}  // namespace detail

// Renders `count` images, labels cycling 0..9, deterministic in `seed`.
inline ImageDataset make_digit_dataset(int count, std::uint64_t seed) {
    constexpr int kSide = 28;
    constexpr int kScale = 3;
    constexpr int kGlyphRows = 7;
    constexpr int kGlyphCols = 5;
    const auto& glyphs = detail::digit_glyphs();

    ImageDataset ds;
    ds.height = kSide;
    ds.width = kSide;
    ds.num_classes = 10;
    ds.images.reserve(count);
    ds.labels.reserve(count);

    Rng gen(mix_seed(seed, 0xd161, 0));
    for (int i = 0; i < count; ++i) {
        const int label = i % 10;
        std::vector<double> img(std::size_t(kSide) * kSide, 0.0);

        const int base_row = (kSide - kGlyphRows * kScale) / 2;
        const int base_col = (kSide - kGlyphCols * kScale) / 2;
        const int jit_r = int(gen.below(5)) - 2;
        const int jit_c = int(gen.below(5)) - 2;
        const double intensity = 0.7 + 0.3 * gen.uniform();

        for (int gr = 0; gr < kGlyphRows; ++gr) {
            for (int gc = 0; gc < kGlyphCols; ++gc) {
                if (glyphs[label][gr][gc] != '#') continue;
                for (int sr = 0; sr < kScale; ++sr) {
                    for (int sc = 0; sc < kScale; ++sc) {
                        const int r = base_row + gr * kScale + sr + jit_r;
                        const int c = base_col + gc * kScale + sc + jit_c;
                        if (r < 0 || r >= kSide || c < 0 || c >= kSide) continue;
                        double v = intensity * (0.85 + 0.15 * gen.uniform());
                        img[std::size_t(r) * kSide + c] = std::min(1.0, v);
                    }
                }
            }
        }
        for (auto& v : img) {
            if (v == 0.0 && gen.uniform() < 0.02) v = 0.15 * gen.uniform();
        }
        ds.images.push_back(std::move(img));
        ds.labels.push_back(label);
    }
    return ds;
}

}  // namespace semqam
