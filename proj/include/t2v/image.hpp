#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "t2v/common.hpp"

namespace t2v::img {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // packed RGB, row-major

    static Image blank(int w, int h, Rgb fill = {}) {
        Image im;
        im.width = w;
        im.height = h;
        im.pixels.resize(static_cast<std::size_t>(w) * h * 3);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) im.set(x, y, fill);
        return im;
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    Rgb get(int x, int y) const {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }

    void set(int x, int y, Rgb c) {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
    }

    bool operator==(const Image&) const = default;
};

// ---- PPM (P6) / PGM (P5) -----------------------------------------------
// Frames are pre-extracted lossless images; binary PPM keeps the harness free
// of codec dependencies. A P5 greyscale frame loads as grey RGB.

namespace detail {

inline int read_pnm_int(const std::string& data, std::size_t& pos) {
    while (pos < data.size()) {
        if (data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
    int v = 0;
    bool any = false;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
        v = v * 10 + (data[pos] - '0');
        ++pos;
        any = true;
    }
    if (!any) throw IoError("malformed PNM header");
    return v;
}

}  // namespace detail

inline Image load_pnm(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    if (data.size() < 2 || data[0] != 'P' || (data[1] != '6' && data[1] != '5'))
        throw IoError("unsupported image format (want binary PPM/PGM): " + path.string());
    const bool grey = data[1] == '5';
    std::size_t pos = 2;
    const int w = detail::read_pnm_int(data, pos);
    const int h = detail::read_pnm_int(data, pos);
    const int maxval = detail::read_pnm_int(data, pos);
    if (maxval != 255) throw IoError("unsupported PNM maxval: " + path.string());
    ++pos;  // single whitespace after header
    const std::size_t needed = static_cast<std::size_t>(w) * h * (grey ? 1 : 3);
    if (data.size() - pos < needed) throw IoError("truncated PNM payload: " + path.string());

    Image im;
    im.width = w;
    im.height = h;
    im.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    if (grey) {
        for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
            const std::uint8_t v = static_cast<std::uint8_t>(data[pos + i]);
            im.pixels[i * 3] = im.pixels[i * 3 + 1] = im.pixels[i * 3 + 2] = v;
        }
    } else {
        std::copy_n(reinterpret_cast<const std::uint8_t*>(data.data()) + pos, needed,
                    im.pixels.begin());
    }
    return im;
}

inline std::string encode_ppm(const Image& im) {
    std::string out = "P6\n" + std::to_string(im.width) + " " + std::to_string(im.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(im.pixels.data()), im.pixels.size());
    return out;
}

inline void save_ppm(const Image& im, const std::filesystem::path& path) {
    write_file(path, encode_ppm(im));
}

// Ordered frame files in a directory: *.ppm/*.pgm sorted by filename.
inline std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir))
        throw IoError("frame source does not exist: " + dir.string());
    if (!std::filesystem::is_directory(dir))
        throw IoError("frame source is a file, not a directory of extracted frames: " +
                      dir.string() + " (decode containers externally, see README)");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no frame images (*.ppm, *.pgm) in " + dir.string());
    return files;
}

inline std::vector<Image> load_frames(const std::filesystem::path& dir) {
    std::vector<Image> frames;
    for (const auto& f : list_frame_files(dir)) frames.push_back(load_pnm(f));
    return frames;
}

// ---- rasterization -----------------------------------------------------

inline void plot(Image& im, int x, int y, Rgb c) {
    if (im.in_bounds(x, y)) im.set(x, y, c);
}

// Integer Bresenham; endpoints included, pixels outside the frame dropped.
inline void draw_line(Image& im, int x0, int y0, int x1, int y1, Rgb c) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        plot(im, x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

}  // namespace t2v::img
