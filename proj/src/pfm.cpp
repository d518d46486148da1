// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/pfm.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace polarmat {

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
}

struct ParsedHeader {
    PfmHeader header;
    bool little_endian = true;
    std::size_t data_offset = 0;
};

// Reads whitespace-separated header tokens; data starts after the single
// whitespace byte that terminates the scale.
ParsedHeader parse_header(std::istream& in, const std::filesystem::path& path) {
    auto corrupt = [&](const std::string& what) {
        return Error(ErrorCode::CorruptImage, path.string() + ": " + what);
    };
    auto token = [&]() {
        std::string t;
        int ch;
        while ((ch = in.get()) != EOF && std::isspace(ch)) {
        }
        while (ch != EOF && !std::isspace(ch)) {
            t.push_back(static_cast<char>(ch));
            ch = in.get();
        }
        if (t.empty()) throw corrupt("truncated header at byte offset " + std::to_string(static_cast<long long>(in.tellg())));
        return t;
    };
    ParsedHeader out;
    const std::string magic = token();
    if (magic == "PF")
        out.header.channels = 3;
    else if (magic == "Pf")
        out.header.channels = 1;
    else
        throw corrupt("bad magic '" + magic.substr(0, 8) + "'");
    try {
        std::size_t used = 0;
        const std::string w = token(), h = token();
        out.header.width = std::stoi(w, &used);
        if (used != w.size()) throw std::invalid_argument(w);
        out.header.height = std::stoi(h, &used);
        if (used != h.size()) throw std::invalid_argument(h);
        const std::string s = token();
        const double scale = std::stod(s, &used);
        if (used != s.size() || scale == 0.0 || !std::isfinite(scale)) throw std::invalid_argument(s);
        out.little_endian = scale < 0.0;
    } catch (const std::logic_error&) {
        throw corrupt("malformed header");
    }
    if (out.header.width <= 0 || out.header.height <= 0) throw corrupt("non-positive image size");
    out.data_offset = static_cast<std::size_t>(in.tellg());
    return out;
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const PfmImage& image) {
    if (image.channels != 1 && image.channels != 3)
        throw Error(ErrorCode::InvalidArgument, "PFM images have 1 or 3 channels");
    if (image.width <= 0 || image.height <= 0 ||
        image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels)
        throw Error(ErrorCode::DimensionMismatch, "PFM data does not match its size");
    for (std::size_t i = 0; i < image.data.size(); ++i)
        if (!std::isfinite(image.data[i]))
            throw Error(ErrorCode::CorruptImage, path.string() + ": non-finite value at element " + std::to_string(i));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << (image.channels == 3 ? "PF" : "Pf") << '\n' << image.width << ' ' << image.height << "\n-1.0\n";
    const std::size_t row = static_cast<std::size_t>(image.width) * image.channels;
    std::vector<char> bytes(row * sizeof(float));
    for (int y = image.height - 1; y >= 0; --y) {
        const float* src = &image.data[static_cast<std::size_t>(y) * row];
        for (std::size_t i = 0; i < row; ++i) {
            std::uint32_t v;
            std::memcpy(&v, &src[i], 4);
            if constexpr (std::endian::native == std::endian::big) v = byteswap32(v);
            std::memcpy(&bytes[i * 4], &v, 4);
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

PfmHeader read_pfm_header(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, path.string() + " does not exist");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_header(in, path).header;
}

PfmImage read_pfm(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, path.string() + " does not exist");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    const ParsedHeader h = parse_header(in, path);
    PfmImage img;
    img.width = h.header.width;
    img.height = h.header.height;
    img.channels = h.header.channels;
    const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
    const std::size_t expected = row * img.height * sizeof(float);
    std::vector<char> bytes(expected);
    in.read(bytes.data(), static_cast<std::streamsize>(expected));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != expected)
        throw Error(ErrorCode::CorruptImage, path.string() + ": pixel data truncated at byte offset " +
                                                 std::to_string(h.data_offset + got) + ", expected " +
                                                 std::to_string(h.data_offset + expected) + " bytes");
    img.data.resize(row * img.height);
    const bool swap = h.little_endian != (std::endian::native == std::endian::little);
    for (int y = 0; y < img.height; ++y) {
        const char* src = &bytes[static_cast<std::size_t>(img.height - 1 - y) * row * 4];
        float* dst = &img.data[static_cast<std::size_t>(y) * row];
        for (std::size_t i = 0; i < row; ++i) {
            std::uint32_t v;
            std::memcpy(&v, src + i * 4, 4);
            if (swap) v = byteswap32(v);
            std::memcpy(&dst[i], &v, 4);
        }
    }
    return img;
}

namespace {

template <class V>
PfmImage vector_map_to_pfm(const Grid<V>& map) {
    PfmImage img{map.width(), map.height(), 3, std::vector<float>(map.size() * 3)};
    for (std::size_t i = 0; i < map.size(); ++i)
        for (int c = 0; c < 3; ++c) img.data[i * 3 + c] = static_cast<float>(map[i][c]);
    return img;
}

template <class V>
Grid<V> vector_map_from_pfm(const PfmImage& img) {
    if (img.channels != 3) throw Error(ErrorCode::DimensionMismatch, "expected a 3-channel PFM image");
    Grid<V> map(img.height, img.width);
    for (std::size_t i = 0; i < map.size(); ++i)
        for (int c = 0; c < 3; ++c) map[i][c] = img.data[i * 3 + c];
    return map;
}

}  // namespace

PfmImage to_pfm(const ScalarMap& map) {
    PfmImage img{map.width(), map.height(), 1, std::vector<float>(map.size())};
    for (std::size_t i = 0; i < map.size(); ++i) img.data[i] = static_cast<float>(map[i]);
    return img;
}

PfmImage to_pfm(const RgbMap& map) { return vector_map_to_pfm(map); }
PfmImage to_pfm(const NormalMap& map) { return vector_map_to_pfm(map); }

ScalarMap scalar_map(const PfmImage& img) {
    if (img.channels != 1) throw Error(ErrorCode::DimensionMismatch, "expected a 1-channel PFM image");
    ScalarMap map(img.height, img.width);
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = img.data[i];
    return map;
}

RgbMap rgb_map(const PfmImage& img) { return vector_map_from_pfm<Rgb>(img); }
NormalMap normal_map(const PfmImage& img) { return vector_map_from_pfm<Vec3>(img); }

PfmImage stack_to_pfm(const ImageStack& stack) {
    return {stack.width(), stack.count() * stack.height(), 3, stack.values()};
}

ImageStack stack_from_pfm(const PfmImage& img, int count) {
    if (img.channels != 3 || count <= 0 || img.height % count != 0)
        throw Error(ErrorCode::DimensionMismatch, "image does not hold " + std::to_string(count) + " RGB frames");
    ImageStack stack(count, img.height / count, img.width);
    stack.values() = img.data;
    return stack;
}

PfmImage frame_to_pfm(const ImageStack& stack, int k) {
    const std::size_t n = static_cast<std::size_t>(stack.height()) * stack.width() * 3;
    const float* p = stack.frame(k);
    return {stack.width(), stack.height(), 3, std::vector<float>(p, p + n)};
}

void frame_from_pfm(ImageStack& stack, int k, const PfmImage& img) {
    if (img.channels != 3 || img.width != stack.width() || img.height != stack.height())
        throw Error(ErrorCode::DimensionMismatch, "frame " + std::to_string(k) + " has " + std::to_string(img.width) +
                                                      "x" + std::to_string(img.height) + "x" +
                                                      std::to_string(img.channels) + ", expected " +
                                                      std::to_string(stack.width()) + "x" +
                                                      std::to_string(stack.height()) + "x3");
    std::memcpy(stack.frame(k), img.data.data(), img.data.size() * sizeof(float));
}

}  // namespace polarmat
