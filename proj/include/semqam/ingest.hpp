#pragma once

// Dataset ingestion: IDX and CSV parsing/writing plus the fixed concept-slot
// patch grid.
//
// IDX layout (big-endian 32-bit header words):
//   images: magic 2051, count, rows, cols, then count*rows*cols u8 pixels
//   labels: magic 2049, count, then count u8 labels
// Pixels are scaled to [0,1] by /255 on load.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "semqam/common.hpp"

namespace semqam {

struct ImageDataset {
    std::vector<std::vector<double>> images;  // each H*W, row-major, values in [0,1]
    std::vector<int> labels;
    int height = 0;
    int width = 0;
    int num_classes = 0;
};

struct PatchGrid {
    std::vector<std::vector<double>> patches;  // N vectors of patch_side^2, row-major slots
    int slot_rows = 0;
    int slot_cols = 0;
    int patch_side = 0;
};

namespace detail {

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    if (off + 4 > b.size()) throw FormatError("idx: truncated header");
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

inline void write_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    b.push_back(std::uint8_t(v >> 24));
    b.push_back(std::uint8_t(v >> 16));
    b.push_back(std::uint8_t(v >> 8));
    b.push_back(std::uint8_t(v));
}

}  // namespace detail

constexpr std::uint32_t kIdxImageMagic = 2051;
constexpr std::uint32_t kIdxLabelMagic = 2049;

inline ImageDataset parse_idx(const std::vector<std::uint8_t>& image_bytes,
                              const std::vector<std::uint8_t>& label_bytes) {
    const std::uint32_t img_magic = detail::read_be32(image_bytes, 0);
    if (img_magic != kIdxImageMagic)
        throw FormatError("idx: bad image magic " + std::to_string(img_magic));
    const std::uint32_t n_images = detail::read_be32(image_bytes, 4);
    const std::uint32_t rows = detail::read_be32(image_bytes, 8);
    const std::uint32_t cols = detail::read_be32(image_bytes, 12);
    const std::size_t expected = std::size_t(n_images) * rows * cols;
    if (image_bytes.size() != 16 + expected)
        throw FormatError("idx: image payload length " + std::to_string(image_bytes.size() - 16) +
                          ", expected " + std::to_string(expected));

    const std::uint32_t lab_magic = detail::read_be32(label_bytes, 0);
    if (lab_magic != kIdxLabelMagic)
        throw FormatError("idx: bad label magic " + std::to_string(lab_magic));
    const std::uint32_t n_labels = detail::read_be32(label_bytes, 4);
    if (label_bytes.size() != 8 + n_labels) throw FormatError("idx: label payload truncated");
    if (n_labels != n_images)
        throw ConsistencyError("idx: image count " + std::to_string(n_images) +
                               " != label count " + std::to_string(n_labels));

    ImageDataset ds;
    ds.height = int(rows);
    ds.width = int(cols);
    ds.images.resize(n_images);
    ds.labels.resize(n_labels);
    std::size_t off = 16;
    for (std::uint32_t i = 0; i < n_images; ++i) {
        auto& img = ds.images[i];
        img.resize(std::size_t(rows) * cols);
        for (std::size_t p = 0; p < img.size(); ++p) img[p] = image_bytes[off++] / 255.0;
    }
    int max_label = 0;
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        ds.labels[i] = label_bytes[8 + i];
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.num_classes = max_label + 1;
    return ds;
}

inline std::vector<std::uint8_t> write_idx_images(const ImageDataset& ds) {
    std::vector<std::uint8_t> out;
    detail::write_be32(out, kIdxImageMagic);
    detail::write_be32(out, std::uint32_t(ds.images.size()));
    detail::write_be32(out, std::uint32_t(ds.height));
    detail::write_be32(out, std::uint32_t(ds.width));
    for (const auto& img : ds.images)
        for (double v : img) out.push_back(std::uint8_t(std::lround(v * 255.0)));
    return out;
}

inline std::vector<std::uint8_t> write_idx_labels(const ImageDataset& ds) {
    std::vector<std::uint8_t> out;
    detail::write_be32(out, kIdxLabelMagic);
    detail::write_be32(out, std::uint32_t(ds.labels.size()));
    for (int l : ds.labels) out.push_back(std::uint8_t(l));
    return out;
}

// CSV rows are `label,p1,...,p_{H*W}` with pixels in [0,255].
inline ImageDataset parse_csv(const std::string& text, int height, int width) {
    ImageDataset ds;
    ds.height = height;
    ds.width = width;
    const std::size_t pixels = std::size_t(height) * width;
    std::istringstream lines(text);
    std::string line;
    int max_label = 0;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string cell;
        std::vector<double> values;
        values.reserve(pixels + 1);
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos])))
                    ++pos;
                if (pos != cell.size()) throw std::invalid_argument(cell);
                values.push_back(v);
            } catch (const std::exception&) {
                throw FormatError("csv: non-numeric cell '" + cell + "' on line " +
                                  std::to_string(line_no));
            }
        }
        if (values.size() != pixels + 1)
            throw FormatError("csv: line " + std::to_string(line_no) + " has " +
                              std::to_string(values.size() ? values.size() - 1 : 0) +
                              " pixels, expected " + std::to_string(pixels));
        ds.labels.push_back(int(values[0]));
        max_label = std::max(max_label, ds.labels.back());
        std::vector<double> img(pixels);
        for (std::size_t p = 0; p < pixels; ++p) img[p] = values[p + 1] / 255.0;
        ds.images.push_back(std::move(img));
    }
    ds.num_classes = ds.labels.empty() ? 0 : max_label + 1;
    return ds;
}

inline std::string write_csv(const ImageDataset& ds) {
    std::ostringstream out;
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        out << ds.labels[i];
        for (double v : ds.images[i]) out << ',' << std::lround(v * 255.0);
        out << '\n';
    }
    return out.str();
}

// Zero-pads `image` centered to target_side x target_side and splits it into
// non-overlapping patch_side x patch_side tiles in row-major slot order.
inline PatchGrid patchify(const std::vector<double>& image, int height, int width,
                          int target_side, int patch_side) {
    if (patch_side <= 0 || target_side % patch_side != 0)
        throw ConfigError("patchify: patch_side must divide target_side");
    if (target_side < std::max(height, width))
        throw ConfigError("patchify: target_side smaller than image");
    const int pad_top = (target_side - height) / 2;
    const int pad_left = (target_side - width) / 2;
    const int slots = target_side / patch_side;

    PatchGrid grid;
    grid.slot_rows = slots;
    grid.slot_cols = slots;
    grid.patch_side = patch_side;
    grid.patches.assign(std::size_t(slots) * slots,
                        std::vector<double>(std::size_t(patch_side) * patch_side, 0.0));
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const int pr = r + pad_top;
            const int pc = c + pad_left;
            const int slot = (pr / patch_side) * slots + (pc / patch_side);
            const int local = (pr % patch_side) * patch_side + (pc % patch_side);
            grid.patches[slot][local] = image[std::size_t(r) * width + c];
        }
    }
    return grid;
}

// Inverse of patchify: reassembles the tiles and crops the centered padding.
inline std::vector<double> unpatchify(const PatchGrid& grid, int height, int width) {
    const int target_side = grid.slot_rows * grid.patch_side;
    const int pad_top = (target_side - height) / 2;
    const int pad_left = (target_side - width) / 2;
    std::vector<double> image(std::size_t(height) * width, 0.0);
    for (int pr = 0; pr < target_side; ++pr) {
        const int r = pr - pad_top;
        if (r < 0 || r >= height) continue;
        for (int pc = 0; pc < target_side; ++pc) {
            const int c = pc - pad_left;
            if (c < 0 || c >= width) continue;
            const int slot = (pr / grid.patch_side) * grid.slot_cols + (pc / grid.patch_side);
            const int local = (pr % grid.patch_side) * grid.patch_side + (pc % grid.patch_side);
            image[std::size_t(r) * width + c] = grid.patches[slot][local];
        }
    }
    return image;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

inline std::string read_file_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace semqam
