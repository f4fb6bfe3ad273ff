#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "t2v/common.hpp"

namespace t2v::stats {

// A correlation value with an explicit undefined flag. Zero-variance inputs
// are flagged, never reported as silent zeros.
struct Corr {
    double value = 0.0;
    bool defined = false;
};

struct PairedSeries {
    std::vector<double> xs;
    std::vector<double> ys;
};

inline PairedSeries make_paired(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size())
        throw ValidationError("paired series length mismatch");
    if (xs.size() < 2)
        throw ValidationError("paired series needs at least 2 elements");
    for (double v : xs)
        if (!std::isfinite(v)) throw ValidationError("non-finite value in xs");
    for (double v : ys)
        if (!std::isfinite(v)) throw ValidationError("non-finite value in ys");
    return PairedSeries{std::move(xs), std::move(ys)};
}

inline double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Average ranks, 1-based; tied values share the mean of their rank block.
inline std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline Corr pearson(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    const double mx = mean(xs), my = mean(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return {0.0, false};
    return {sxy / std::sqrt(sxx * syy), true};
}

inline Corr pearson(const PairedSeries& p) { return pearson(p.xs, p.ys); }

// Pearson correlation of average-ranked series.
inline Corr spearman(std::span<const double> xs, std::span<const double> ys) {
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

inline Corr spearman(const PairedSeries& p) { return spearman(p.xs, p.ys); }

struct PairCounts {
    std::int64_t concordant = 0;
    std::int64_t discordant = 0;
    std::int64_t tied_x = 0;     // tied in x only
    std::int64_t tied_y = 0;     // tied in y only
    std::int64_t tied_both = 0;  // tied in both
};

inline PairCounts count_pairs(std::span<const double> xs, std::span<const double> ys) {
    PairCounts c;
    const std::size_t n = xs.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            if (dx == 0.0 && dy == 0.0)
                ++c.tied_both;
            else if (dx == 0.0)
                ++c.tied_x;
            else if (dy == 0.0)
                ++c.tied_y;
            else if ((dx > 0.0) == (dy > 0.0))
                ++c.concordant;
            else
                ++c.discordant;
        }
    }
    return c;
}

// Kendall tau-b: (C - D) / sqrt((n0 - T_x)(n0 - T_y)) where n0 = n(n-1)/2 and
// T_x, T_y count pairs tied in x resp. y (pairs tied in both count in each).
inline Corr kendall(std::span<const double> xs, std::span<const double> ys) {
    const auto c = count_pairs(xs, ys);
    const std::int64_t n = static_cast<std::int64_t>(xs.size());
    const std::int64_t n0 = n * (n - 1) / 2;
    const std::int64_t tx = c.tied_x + c.tied_both;
    const std::int64_t ty = c.tied_y + c.tied_both;
    const double denom_sq = static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty);
    if (denom_sq <= 0.0) return {0.0, false};
    return {static_cast<double>(c.concordant - c.discordant) / std::sqrt(denom_sq), true};
}

inline Corr kendall(const PairedSeries& p) { return kendall(p.xs, p.ys); }

}  // namespace t2v::stats
