#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "t2v/common.hpp"
#include "t2v/stats.hpp"

namespace t2v::dataset {

struct RaterAnnotation {
    std::string rater_id;
    int alignment_score = 0;  // 1..5
    int quality_score = 0;    // 1..5

    bool operator==(const RaterAnnotation&) const = default;
};

struct VideoRecord {
    std::string video_id;
    std::string prompt_text;
    std::string generator_id;
    std::string frame_source;                   // dir of ordered frame images, or container file
    std::optional<std::string> trajectory_path; // optional TrajectoryBundle file
    std::vector<RaterAnnotation> annotations;

    bool operator==(const VideoRecord&) const = default;
};

struct Manifest {
    std::vector<VideoRecord> records;
    std::set<std::string> generator_ids;  // always equals the set appearing in records
    std::filesystem::path base_dir;       // directory of the manifest file; paths resolve against it

    // Resolve a record-relative path against the manifest location.
    std::filesystem::path resolve(const std::string& p) const {
        std::filesystem::path rel(p);
        if (rel.is_absolute()) return rel;
        return base_dir / rel;
    }
};

// One generator held in, all others held out (Table-4-style protocol).
struct CrossModelSplit {
    std::string held_in;
    std::set<std::string> held_out;
};

namespace detail {

inline void check_score(int v, const std::string& field, const std::string& video_id) {
    if (v < 1 || v > 5)
        throw ValidationError("record '" + video_id + "': " + field + "=" + std::to_string(v) +
                              " outside [1,5]");
}

inline VideoRecord parse_record(const nlohmann::json& j) {
    VideoRecord rec;
    rec.video_id = j.at("video_id").get<std::string>();
    rec.prompt_text = j.at("prompt_text").get<std::string>();
    rec.generator_id = j.at("generator_id").get<std::string>();
    rec.frame_source = j.at("frame_source").get<std::string>();
    if (j.contains("trajectory_path") && !j["trajectory_path"].is_null())
        rec.trajectory_path = j["trajectory_path"].get<std::string>();
    if (rec.video_id.empty()) throw ValidationError("empty video_id");
    std::set<std::string> raters;
    for (const auto& a : j.value("annotations", nlohmann::json::array())) {
        RaterAnnotation ann;
        ann.rater_id = a.at("rater_id").get<std::string>();
        ann.alignment_score = a.at("alignment_score").get<int>();
        ann.quality_score = a.at("quality_score").get<int>();
        check_score(ann.alignment_score, "alignment_score", rec.video_id);
        check_score(ann.quality_score, "quality_score", rec.video_id);
        if (!raters.insert(ann.rater_id).second)
            throw ValidationError("record '" + rec.video_id + "': duplicate rater_id '" +
                                  ann.rater_id + "'");
        rec.annotations.push_back(std::move(ann));
    }
    return rec;
}

}  // namespace detail

// Line-delimited JSON records; relative paths resolve against the manifest's
// directory.
inline Manifest load_manifest(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    Manifest m;
    m.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("manifest " + path.string() + " line " +
                                  std::to_string(line_no) + ": " + e.what());
        }
        VideoRecord rec;
        try {
            rec = detail::parse_record(j);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("manifest " + path.string() + " line " +
                                  std::to_string(line_no) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("manifest " + path.string() + " line " +
                                  std::to_string(line_no) + ": " + e.what());
        }
        if (!ids.insert(rec.video_id).second)
            throw ValidationError("manifest " + path.string() + " line " +
                                  std::to_string(line_no) + ": duplicate video_id '" +
                                  rec.video_id + "'");
        m.generator_ids.insert(rec.generator_id);
        m.records.push_back(std::move(rec));
    }
    if (m.records.empty())
        throw ValidationError("manifest " + path.string() + ": no records");
    return m;
}

inline nlohmann::json record_to_json(const VideoRecord& rec) {
    nlohmann::json j;
    j["video_id"] = rec.video_id;
    j["prompt_text"] = rec.prompt_text;
    j["generator_id"] = rec.generator_id;
    j["frame_source"] = rec.frame_source;
    if (rec.trajectory_path) j["trajectory_path"] = *rec.trajectory_path;
    nlohmann::json anns = nlohmann::json::array();
    for (const auto& a : rec.annotations) {
        anns.push_back({{"rater_id", a.rater_id},
                        {"alignment_score", a.alignment_score},
                        {"quality_score", a.quality_score}});
    }
    j["annotations"] = std::move(anns);
    return j;
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    std::string out;
    for (const auto& rec : m.records) {
        out += record_to_json(rec).dump();
        out += '\n';
    }
    write_file(path, out);
}

struct MosPair {
    double alignment = 0.0;
    double quality = 0.0;
};

struct MosOptions {
    // Optional per-video z-score screening of raters before averaging.
    // Defaults off; the TVGE protocol pre-screens raters instead.
    bool zscore_screen = false;
    double z_threshold = 2.0;
};

namespace detail {

inline std::vector<int> screened(const std::vector<int>& scores, double z_threshold) {
    const double n = static_cast<double>(scores.size());
    double mu = 0.0;
    for (int s : scores) mu += s;
    mu /= n;
    double var = 0.0;
    for (int s : scores) var += (s - mu) * (s - mu);
    const double sigma = std::sqrt(var / n);
    if (sigma == 0.0) return scores;
    std::vector<int> kept;
    for (int s : scores)
        if (std::abs(s - mu) <= z_threshold * sigma) kept.push_back(s);
    return kept.empty() ? scores : kept;
}

inline double mean_of(const std::vector<int>& v) {
    double s = 0.0;
    for (int x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace detail

// Per-video arithmetic mean of rater scores on each dimension.
inline std::map<std::string, MosPair> mean_opinion_scores(const Manifest& m,
                                                          const MosOptions& opt = {}) {
    std::map<std::string, MosPair> out;
    for (const auto& rec : m.records) {
        if (rec.annotations.empty())
            throw ValidationError("record '" + rec.video_id + "' has no annotations");
        std::vector<int> align, qual;
        for (const auto& a : rec.annotations) {
            align.push_back(a.alignment_score);
            qual.push_back(a.quality_score);
        }
        if (opt.zscore_screen) {
            align = detail::screened(align, opt.z_threshold);
            qual = detail::screened(qual, opt.z_threshold);
        }
        out[rec.video_id] = {detail::mean_of(align), detail::mean_of(qual)};
    }
    return out;
}

struct DistributionSummary {
    double mean_alignment = 0.0;
    double mean_quality = 0.0;
    stats::Corr inter_dim_spearman;
    stats::Corr inter_dim_kendall;
};

// Grand means of per-video MOS plus the correlation between the two MOS
// columns.
inline DistributionSummary summarize_distribution(const Manifest& m) {
    const auto mos = mean_opinion_scores(m);
    if (mos.size() < 2)
        throw ValidationError("distribution summary needs at least 2 videos");
    std::vector<double> align, qual;
    for (const auto& [_, pair] : mos) {
        align.push_back(pair.alignment);
        qual.push_back(pair.quality);
    }
    DistributionSummary s;
    s.mean_alignment = stats::mean(align);
    s.mean_quality = stats::mean(qual);
    s.inter_dim_spearman = stats::spearman(align, qual);
    s.inter_dim_kendall = stats::kendall(align, qual);
    return s;
}

// One split per generator, ordered lexicographically by held_in.
inline std::vector<CrossModelSplit> cross_model_splits(const Manifest& m) {
    if (m.generator_ids.size() < 2)
        throw ValidationError("cross-model splits need at least 2 generators");
    std::vector<CrossModelSplit> out;
    for (const auto& gen : m.generator_ids) {  // std::set iterates in order
        CrossModelSplit split;
        split.held_in = gen;
        for (const auto& other : m.generator_ids)
            if (other != gen) split.held_out.insert(other);
        out.push_back(std::move(split));
    }
    return out;
}

}  // namespace t2v::dataset
