#pragma once

// Test-only brute-force oracles. These deliberately take different routes
// than the library implementations: ranks by comparison counting, Kendall
// tie terms by value grouping, losses by literal pair enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace oracle {

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double mx = mean(xs), my = mean(ys);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

// rank_i = #{j : v_j < v_i} + (#{j : v_j == v_i} + 1) / 2, 1-based average rank.
inline std::vector<double> ranks_by_counting(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        int less = 0, equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) ++less;
            if (v[j] == v[i]) ++equal;
        }
        r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return r;
}

inline std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    return pearson(ranks_by_counting(xs), ranks_by_counting(ys));
}

// tau-b with tie terms from value-group counting: T = sum over groups of t(t-1)/2.
inline std::optional<double> kendall_tau_b(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::int64_t n = static_cast<std::int64_t>(xs.size());
    std::int64_t num = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            const double sx = (xs[i] < xs[j]) ? -1.0 : (xs[i] > xs[j] ? 1.0 : 0.0);
            const double sy = (ys[i] < ys[j]) ? -1.0 : (ys[i] > ys[j] ? 1.0 : 0.0);
            num += static_cast<std::int64_t>(sx * sy);
        }
    }
    auto tie_pairs = [](const std::vector<double>& v) {
        std::map<double, std::int64_t> groups;
        for (double x : v) ++groups[x];
        std::int64_t t = 0;
        for (auto& [_, c] : groups) t += c * (c - 1) / 2;
        return t;
    };
    const std::int64_t n0 = n * (n - 1) / 2;
    const std::int64_t tx = tie_pairs(xs), ty = tie_pairs(ys);
    if (n0 == tx || n0 == ty) return std::nullopt;
    return static_cast<double>(num) /
           std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
}

// Eq. 4 over unordered pairs, literal enumeration.
inline double rank_loss(const std::vector<double>& pred, const std::vector<double>& gt) {
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            const double sgn = (gt[j] > gt[i]) ? 1.0 : (gt[j] < gt[i] ? -1.0 : 0.0);
            total += std::max((pred[i] - pred[j]) * sgn, 0.0);
        }
    }
    return total;
}

inline bool has_strict_inversion(const std::vector<double>& pred, const std::vector<double>& gt) {
    for (std::size_t i = 0; i < pred.size(); ++i)
        for (std::size_t j = 0; j < pred.size(); ++j)
            if (gt[i] < gt[j] && pred[i] > pred[j]) return true;
    return false;
}

// Eq. 5 by centered dot and norms.
inline double linear_loss(const std::vector<double>& pred, const std::vector<double>& gt) {
    const double mp = mean(pred), mg = mean(gt);
    double dot = 0, np = 0, ng = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        dot += (pred[i] - mp) * (gt[i] - mg);
        np += (pred[i] - mp) * (pred[i] - mp);
        ng += (gt[i] - mg) * (gt[i] - mg);
    }
    if (np == 0 || ng == 0) return 0.5;
    return (1.0 - dot / (std::sqrt(np) * std::sqrt(ng))) / 2.0;
}

}  // namespace oracle
