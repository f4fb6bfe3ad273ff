#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "t2v/common.hpp"

namespace t2v::quality {

// One provider's raw scores for a video set. provider_id is "technical",
// "semantic", or "custom:<name>".
struct RawScoreBatch {
    std::string provider_id;
    std::vector<std::pair<std::string, double>> entries;  // (video_id, raw score)
};

struct RemapContext {
    double mu = 0.0;
    double sigma = 0.0;  // population standard deviation of the source batch
    int source_batch_size = 0;
};

struct QualityResult {
    std::string video_id;
    double remapped_tech = 0.0;
    double remapped_sem = 0.0;
    double fused = 0.0;  // (remapped_tech + remapped_sem) / 2
};

inline void validate_batch(const RawScoreBatch& batch) {
    if (batch.entries.empty()) throw ValidationError("empty score batch from " + batch.provider_id);
    std::map<std::string, int> seen;
    for (const auto& [id, score] : batch.entries) {
        if (!std::isfinite(score))
            throw ValidationError("non-finite score for video '" + id + "' from " + batch.provider_id);
        if (++seen[id] > 1)
            throw ValidationError("duplicate video_id '" + id + "' in batch from " + batch.provider_id);
    }
}

// Perceptual remap R(s) = 1 / (1 + exp(-(s - mu)/sigma)) with mu, sigma taken
// from the batch itself (sigma is the population standard deviation). A
// constant batch maps to all-0.5.
inline std::pair<std::map<std::string, double>, RemapContext> remap(const RawScoreBatch& batch) {
    validate_batch(batch);
    const std::size_t n = batch.entries.size();

    double mu = 0.0;
    for (const auto& [_, s] : batch.entries) mu += s;
    mu /= static_cast<double>(n);

    double var = 0.0;
    bool all_equal = true;
    for (const auto& [_, s] : batch.entries) {
        var += (s - mu) * (s - mu);
        all_equal = all_equal && (s == batch.entries.front().second);
    }
    var /= static_cast<double>(n);
    const double sigma = all_equal ? 0.0 : std::sqrt(var);

    std::map<std::string, double> out;
    for (const auto& [id, s] : batch.entries) {
        out[id] = (sigma == 0.0) ? 0.5 : 1.0 / (1.0 + std::exp(-(s - mu) / sigma));
    }
    return {std::move(out), RemapContext{mu, sigma, static_cast<int>(n)}};
}

// Fuse two remapped score maps over the same video set.
inline std::vector<QualityResult> fuse(const std::map<std::string, double>& tech,
                                       const std::map<std::string, double>& sem) {
    if (tech.size() != sem.size())
        throw ValidationError("technical/semantic score sets differ in size");
    std::vector<QualityResult> out;
    out.reserve(tech.size());
    for (const auto& [id, t] : tech) {
        auto it = sem.find(id);
        if (it == sem.end())
            throw ValidationError("video '" + id + "' present in technical scores but not semantic");
        out.push_back({id, t, it->second, (t + it->second) / 2.0});
    }
    return out;
}

// ---- list-wise training objectives ----------------------------------------

// Predicted and ground-truth score lists plus the rank-loss weight.
struct ScoreLists {
    std::vector<double> pred;
    std::vector<double> gt;
    double lambda = 0.3;
};

inline void validate_lists(const ScoreLists& l) {
    if (l.pred.size() != l.gt.size()) throw ValidationError("score list length mismatch");
    if (l.pred.size() < 2) throw ValidationError("score lists need at least 2 elements");
    if (l.lambda < 0.0) throw ValidationError("lambda must be >= 0");
    for (double v : l.pred)
        if (!std::isfinite(v)) throw ValidationError("non-finite predicted score");
    for (double v : l.gt)
        if (!std::isfinite(v)) throw ValidationError("non-finite ground-truth score");
}

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Pairwise rank hinge over unordered pairs i < j. The all-ordered-pairs sum
// is exactly twice this (each term is symmetric under index swap); the factor
// is absorbed into lambda.
inline double rank_loss(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size()) throw ValidationError("score list length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        for (std::size_t j = i + 1; j < pred.size(); ++j)
            total += std::max((pred[i] - pred[j]) * sgn(gt[j] - gt[i]), 0.0);
    return total;
}

struct LinearLoss {
    double value = 0.5;
    bool degenerate = false;  // zero variance in either list; value fixed at 0.5
};

// Centered-cosine linear loss: (1 - cos(pred - mean, gt - mean)) / 2.
inline LinearLoss linear_loss(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size()) throw ValidationError("score list length mismatch");
    const std::size_t n = pred.size();
    double mp = 0.0, mg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += pred[i];
        mg += gt[i];
    }
    mp /= static_cast<double>(n);
    mg /= static_cast<double>(n);
    double dot = 0.0, npred = 0.0, ngt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = pred[i] - mp, v = gt[i] - mg;
        dot += u * v;
        npred += u * u;
        ngt += v * v;
    }
    if (npred == 0.0 || ngt == 0.0) return {0.5, true};
    return {(1.0 - dot / (std::sqrt(npred) * std::sqrt(ngt))) / 2.0, false};
}

inline double total_loss(const ScoreLists& l) {
    validate_lists(l);
    return linear_loss(l.pred, l.gt).value + l.lambda * rank_loss(l.pred, l.gt);
}

// Analytic gradient of total_loss w.r.t. pred. At rank-hinge kinks (pair term
// exactly 0) the subgradient 0 is chosen; a degenerate linear term contributes
// a zero gradient.
inline std::vector<double> loss_gradients(const ScoreLists& l) {
    validate_lists(l);
    const std::size_t n = l.pred.size();
    std::vector<double> grad(n, 0.0);

    // rank part
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = sgn(l.gt[j] - l.gt[i]);
            if ((l.pred[i] - l.pred[j]) * s > 0.0) {
                grad[i] += l.lambda * s;
                grad[j] -= l.lambda * s;
            }
        }
    }

    // linear part: L = (1 - u.v / (|u||v|)) / 2 with u = C pred, v = C gt,
    // C the centering map; dL/dpred = C dL/du.
    double mp = 0.0, mg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += l.pred[i];
        mg += l.gt[i];
    }
    mp /= static_cast<double>(n);
    mg /= static_cast<double>(n);
    std::vector<double> u(n), v(n);
    double dot = 0.0, nu2 = 0.0, nv2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = l.pred[i] - mp;
        v[i] = l.gt[i] - mg;
        dot += u[i] * v[i];
        nu2 += u[i] * u[i];
        nv2 += v[i] * v[i];
    }
    if (nu2 > 0.0 && nv2 > 0.0) {
        const double nu = std::sqrt(nu2), nv = std::sqrt(nv2);
        std::vector<double> dldu(n);
        double mean_dldu = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dldu[i] = -0.5 * (v[i] / (nu * nv) - dot * u[i] / (nu * nu * nu * nv));
            mean_dldu += dldu[i];
        }
        mean_dldu /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) grad[i] += dldu[i] - mean_dldu;
    }
    return grad;
}

}  // namespace t2v::quality
