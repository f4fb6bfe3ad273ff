#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "t2v/common.hpp"
#include "t2v/image.hpp"

namespace t2v::trajectory {

// Classification thresholds, all per frame.
inline constexpr double kStaticThresholdPx = 0.2;    // median |displacement| below this => static
inline constexpr double kZoomThreshold = 0.01;       // |scale - 1| above this => zoom
inline constexpr double kRotationThresholdDeg = 0.2; // |angle| above this => rotation

struct TrackPoint {
    int frame_index = 0;
    double x = 0.0;
    double y = 0.0;
    bool visible = true;
};

struct Track {
    int track_id = 0;
    std::vector<TrackPoint> points;  // frame_index strictly increasing
};

struct TrajectoryBundle {
    std::vector<Track> tracks;
    int frame_count = 0;
    int width = 0;
    int height = 0;
    int out_of_frame_points = 0;  // points with coordinates outside the frame, kept but flagged
};

inline void validate_bundle(TrajectoryBundle& b) {
    if (b.frame_count < 0) throw ValidationError("negative frame_count");
    if (b.width <= 0 || b.height <= 0) throw ValidationError("non-positive frame size");
    b.out_of_frame_points = 0;
    for (auto& track : b.tracks) {
        int prev = -1;
        for (const auto& p : track.points) {
            if (p.frame_index < 0 || p.frame_index >= b.frame_count)
                throw ValidationError("track " + std::to_string(track.track_id) +
                                      ": frame index " + std::to_string(p.frame_index) +
                                      " outside [0," + std::to_string(b.frame_count) + ")");
            if (p.frame_index <= prev)
                throw ValidationError("track " + std::to_string(track.track_id) +
                                      ": frame indices not strictly increasing at " +
                                      std::to_string(p.frame_index));
            prev = p.frame_index;
            if (p.x < 0 || p.x >= b.width || p.y < 0 || p.y >= b.height)
                ++b.out_of_frame_points;
        }
    }
}

// Tracker output adapter. Schema:
//   {"frame_count": N, "width": W, "height": H,
//    "tracks": [{"track_id": K, "points": [[frame, x, y, visible], ...]}, ...]}
inline TrajectoryBundle load_trajectory(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("trajectory " + path.string() + ": " + e.what());
    }
    TrajectoryBundle b;
    try {
        b.frame_count = j.at("frame_count").get<int>();
        b.width = j.at("width").get<int>();
        b.height = j.at("height").get<int>();
        for (const auto& tj : j.value("tracks", nlohmann::json::array())) {
            Track t;
            t.track_id = tj.at("track_id").get<int>();
            for (const auto& pj : tj.at("points")) {
                if (!pj.is_array() || pj.size() != 4)
                    throw ValidationError("point must be [frame, x, y, visible]");
                TrackPoint p;
                p.frame_index = pj[0].get<int>();
                p.x = pj[1].get<double>();
                p.y = pj[2].get<double>();
                p.visible = pj[3].is_boolean() ? pj[3].get<bool>() : pj[3].get<int>() != 0;
                t.points.push_back(p);
            }
            b.tracks.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("trajectory " + path.string() + ": " + e.what());
    }
    try {
        validate_bundle(b);
    } catch (const ValidationError& e) {
        throw ValidationError("trajectory " + path.string() + ": " + e.what());
    }
    std::sort(b.tracks.begin(), b.tracks.end(),
              [](const Track& a, const Track& c) { return a.track_id < c.track_id; });
    return b;
}

inline nlohmann::json trajectory_to_json(const TrajectoryBundle& b) {
    nlohmann::json j;
    j["frame_count"] = b.frame_count;
    j["width"] = b.width;
    j["height"] = b.height;
    j["tracks"] = nlohmann::json::array();
    for (const auto& t : b.tracks) {
        nlohmann::json tj;
        tj["track_id"] = t.track_id;
        tj["points"] = nlohmann::json::array();
        for (const auto& p : t.points)
            tj["points"].push_back({p.frame_index, p.x, p.y, p.visible});
        j["tracks"].push_back(std::move(tj));
    }
    return j;
}

inline void save_trajectory(const TrajectoryBundle& b, const std::filesystem::path& path) {
    write_file(path, trajectory_to_json(b).dump(2) + "\n");
}

// ---- overlay rendering ----------------------------------------------------

struct OverlayConfig {
    int tail_length = 8;  // how many trailing positions the polyline keeps
};

// Fixed palette cycled by track_id.
inline img::Rgb track_color(int track_id) {
    static constexpr std::array<img::Rgb, 8> palette{{{230, 60, 50},
                                                      {60, 200, 80},
                                                      {70, 110, 240},
                                                      {235, 200, 40},
                                                      {220, 70, 220},
                                                      {60, 210, 210},
                                                      {245, 140, 30},
                                                      {245, 245, 245}}};
    return palette[static_cast<std::size_t>(track_id) % palette.size()];
}

// Draw per-track polylines of the last cfg.tail_length visible positions onto
// copies of the input frames. Invisible points are skipped; an empty bundle
// reproduces the input pixels exactly.
inline std::vector<img::Image> render_overlay(std::span<const img::Image> frames,
                                              const TrajectoryBundle& bundle,
                                              const OverlayConfig& cfg = {}) {
    if (static_cast<int>(frames.size()) != bundle.frame_count)
        throw ValidationError("frame count mismatch: " + std::to_string(frames.size()) +
                              " frames vs bundle frame_count " +
                              std::to_string(bundle.frame_count));
    for (const auto& f : frames)
        if (f.width != bundle.width || f.height != bundle.height)
            throw ValidationError("frame size mismatch with trajectory bundle");

    std::vector<img::Image> out(frames.begin(), frames.end());
    for (int f = 0; f < bundle.frame_count; ++f) {
        for (const auto& track : bundle.tracks) {
            std::vector<std::pair<int, int>> tail;
            for (const auto& p : track.points) {
                if (p.frame_index > f) break;
                if (!p.visible) continue;
                tail.emplace_back(static_cast<int>(std::llround(p.x)),
                                  static_cast<int>(std::llround(p.y)));
            }
            if (tail.size() > static_cast<std::size_t>(cfg.tail_length))
                tail.erase(tail.begin(),
                           tail.end() - static_cast<std::ptrdiff_t>(cfg.tail_length));
            if (tail.empty()) continue;
            const img::Rgb c = track_color(track.track_id);
            if (tail.size() == 1) {
                img::plot(out[f], tail[0].first, tail[0].second, c);
                continue;
            }
            for (std::size_t i = 0; i + 1 < tail.size(); ++i)
                img::draw_line(out[f], tail[i].first, tail[i].second, tail[i + 1].first,
                               tail[i + 1].second, c);
        }
    }
    return out;
}

// ---- motion summary ---------------------------------------------------------

enum class MotionClass {
    none,
    static_scene,
    pan_left,
    pan_right,
    pan_up,
    pan_down,
    zoom_in,
    zoom_out,
    rotate_cw,
    rotate_ccw,
};

struct MotionEstimate {
    MotionClass cls = MotionClass::none;
    double median_dx = 0.0;         // px/frame, image coords (x right, y down)
    double median_dy = 0.0;
    double median_angle_deg = 0.0;  // similarity fit; negative appears counter-clockwise on screen
    double median_scale = 1.0;
    int sample_count = 0;
    int outlier_tracks = 0;
    int total_tracks = 0;
    double outlier_dx = 0.0;  // median displacement of the outlier tracks
    double outlier_dy = 0.0;
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

struct FramePair {
    std::vector<std::pair<double, double>> from;
    std::vector<std::pair<double, double>> to;
};

}  // namespace detail

inline MotionEstimate estimate_motion(const TrajectoryBundle& bundle) {
    MotionEstimate est;
    est.total_tracks = static_cast<int>(bundle.tracks.size());

    // adjacent-frame displacements per track
    std::vector<double> all_dx, all_dy;
    std::vector<std::pair<double, double>> per_track_median;
    std::vector<detail::FramePair> pairs(
        static_cast<std::size_t>(std::max(0, bundle.frame_count - 1)));
    for (const auto& track : bundle.tracks) {
        std::vector<double> tdx, tdy;
        for (std::size_t i = 0; i + 1 < track.points.size(); ++i) {
            const auto& a = track.points[i];
            const auto& b = track.points[i + 1];
            if (!a.visible || !b.visible) continue;
            if (b.frame_index != a.frame_index + 1) continue;
            tdx.push_back(b.x - a.x);
            tdy.push_back(b.y - a.y);
            all_dx.push_back(b.x - a.x);
            all_dy.push_back(b.y - a.y);
            auto& fp = pairs[static_cast<std::size_t>(a.frame_index)];
            fp.from.emplace_back(a.x, a.y);
            fp.to.emplace_back(b.x, b.y);
        }
        if (!tdx.empty())
            per_track_median.emplace_back(detail::median(tdx), detail::median(tdy));
    }
    est.sample_count = static_cast<int>(all_dx.size());
    if (est.sample_count == 0) return est;

    est.median_dx = detail::median(all_dx);
    est.median_dy = detail::median(all_dy);

    // least-squares similarity fit q = s R(theta) p + t per consecutive frame
    // pair; medians over pairs
    std::vector<double> angles, scales;
    for (const auto& fp : pairs) {
        if (fp.from.size() < 2) continue;
        double mx = 0, my = 0, nx = 0, ny = 0;
        const double n = static_cast<double>(fp.from.size());
        for (std::size_t i = 0; i < fp.from.size(); ++i) {
            mx += fp.from[i].first;
            my += fp.from[i].second;
            nx += fp.to[i].first;
            ny += fp.to[i].second;
        }
        mx /= n;
        my /= n;
        nx /= n;
        ny /= n;
        double a = 0, b = 0, pp = 0;
        for (std::size_t i = 0; i < fp.from.size(); ++i) {
            const double px = fp.from[i].first - mx, py = fp.from[i].second - my;
            const double qx = fp.to[i].first - nx, qy = fp.to[i].second - ny;
            a += px * qx + py * qy;
            b += px * qy - py * qx;
            pp += px * px + py * py;
        }
        if (pp == 0.0) continue;
        angles.push_back(std::atan2(b, a) * 180.0 / std::numbers::pi);
        scales.push_back(std::sqrt(a * a + b * b) / pp);
    }
    est.median_angle_deg = detail::median(angles);
    est.median_scale = scales.empty() ? 1.0 : detail::median(scales);

    // classification precedence: rotation, zoom, static, pan
    if (!angles.empty() && std::abs(est.median_angle_deg) > kRotationThresholdDeg) {
        // image y points down, so a negative fitted angle appears
        // counter-clockwise as viewed
        est.cls = est.median_angle_deg < 0 ? MotionClass::rotate_ccw : MotionClass::rotate_cw;
    } else if (!scales.empty() && std::abs(est.median_scale - 1.0) > kZoomThreshold) {
        est.cls = est.median_scale > 1.0 ? MotionClass::zoom_in : MotionClass::zoom_out;
    } else if (std::hypot(est.median_dx, est.median_dy) < kStaticThresholdPx) {
        est.cls = MotionClass::static_scene;
    } else if (std::abs(est.median_dx) >= std::abs(est.median_dy)) {
        // scene content moving right means the camera pans left
        est.cls = est.median_dx > 0 ? MotionClass::pan_left : MotionClass::pan_right;
    } else {
        est.cls = est.median_dy > 0 ? MotionClass::pan_up : MotionClass::pan_down;
    }

    // per-track outliers against the global median displacement
    std::vector<double> odx, ody;
    const double mag = std::hypot(est.median_dx, est.median_dy);
    for (const auto& [tdx, tdy] : per_track_median) {
        if (std::hypot(tdx - est.median_dx, tdy - est.median_dy) > std::max(1.0, 0.5 * mag)) {
            ++est.outlier_tracks;
            odx.push_back(tdx);
            ody.push_back(tdy);
        }
    }
    est.outlier_dx = detail::median(odx);
    est.outlier_dy = detail::median(ody);
    return est;
}

namespace detail {

inline std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

}  // namespace detail

// Deterministic natural-language description of the dominant global motion
// plus any per-track outliers. Text-only VQA backends receive this instead of
// overlay frames.
inline std::string summarize_motion(const TrajectoryBundle& bundle) {
    const MotionEstimate est = estimate_motion(bundle);
    std::string s;
    switch (est.cls) {
        case MotionClass::none:
            return "no reliable motion detected";
        case MotionClass::static_scene:
            s = "the scene is static (median motion " +
                detail::fmt1(std::hypot(est.median_dx, est.median_dy)) + " px/frame)";
            break;
        case MotionClass::pan_left:
            s = "the camera pans left (scene content pans from left to right, ~" +
                detail::fmt1(std::abs(est.median_dx)) + " px/frame)";
            break;
        case MotionClass::pan_right:
            s = "the camera pans right (scene content pans from right to left, ~" +
                detail::fmt1(std::abs(est.median_dx)) + " px/frame)";
            break;
        case MotionClass::pan_up:
            s = "the camera pans up (scene content pans from top to bottom, ~" +
                detail::fmt1(std::abs(est.median_dy)) + " px/frame)";
            break;
        case MotionClass::pan_down:
            s = "the camera pans down (scene content pans from bottom to top, ~" +
                detail::fmt1(std::abs(est.median_dy)) + " px/frame)";
            break;
        case MotionClass::zoom_in:
            s = "the view is zooming in (scale " +
                detail::fmt1((est.median_scale - 1.0) * 100.0) + "%/frame)";
            break;
        case MotionClass::zoom_out:
            s = "the view is zooming out (scale " +
                detail::fmt1((est.median_scale - 1.0) * 100.0) + "%/frame)";
            break;
        case MotionClass::rotate_cw:
            s = "the scene is rotating clockwise (" +
                detail::fmt1(std::abs(est.median_angle_deg)) + " deg/frame)";
            break;
        case MotionClass::rotate_ccw:
            s = "the scene is rotating counter-clockwise (" +
                detail::fmt1(std::abs(est.median_angle_deg)) + " deg/frame)";
            break;
    }
    if (est.outlier_tracks > 0) {
        s += "; " + std::to_string(est.outlier_tracks) + " of " +
             std::to_string(est.total_tracks) +
             " tracks move independently of the global motion (median (" +
             detail::fmt1(est.outlier_dx) + ", " + detail::fmt1(est.outlier_dy) + ") px/frame)";
    }
    return s;
}

}  // namespace t2v::trajectory
