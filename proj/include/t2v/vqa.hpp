#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "t2v/backends.hpp"
#include "t2v/common.hpp"
#include "t2v/dataset.hpp"
#include "t2v/image.hpp"
#include "t2v/parallel.hpp"
#include "t2v/prompts.hpp"
#include "t2v/qagen.hpp"
#include "t2v/trajectory.hpp"

namespace t2v::vqa {

struct VQAVerdict {
    int question_id = 0;
    std::optional<int> predicted_index;  // nullopt = unparseable
    bool correct = false;
    bool errored = false;  // backend failed after its retries
    std::string raw_response;
    qagen::Aspect aspect = qagen::Aspect::spatial;

    bool operator==(const VQAVerdict&) const = default;
};

struct AlignmentResult {
    std::string video_id;
    std::vector<VQAVerdict> verdicts;  // sorted by question_id
    double score = 0.0;                // correct / N
    double accuracy_spatial = 0.0;
    double accuracy_temporal = 0.0;
    int n_total = 0;
    int n_correct = 0;
    int n_spatial = 0;
    int n_temporal = 0;
    int correct_spatial = 0;
    int correct_temporal = 0;

    bool operator==(const AlignmentResult&) const = default;
};

struct VqaConfig {
    int frames_k = 8;
    bool use_trajectory = true;
    bool skip_errored = false;  // default counts errored verdicts as incorrect
    int max_in_flight = 4;
    trajectory::OverlayConfig overlay;
    std::optional<std::filesystem::path> dump_overlay_dir;  // write overlaid frames here
};

// ---- frame sampling ---------------------------------------------------------

// Uniform index spread: round(i * (n-1) / (k-1)) for k >= 2 (first and last
// always included), the middle frame for k == 1. n < k collapses to all
// frames without duplicates.
inline std::vector<std::size_t> sample_indices(std::size_t n, int k) {
    if (n == 0) throw ValidationError("cannot sample from zero frames");
    if (k < 1) throw ValidationError("frame sample count must be >= 1");
    if (k == 1) return {(n - 1) / 2};
    std::vector<std::size_t> out;
    for (int i = 0; i < k; ++i) {
        const double pos = static_cast<double>(i) * static_cast<double>(n - 1) /
                           static_cast<double>(k - 1);
        out.push_back(static_cast<std::size_t>(std::llround(pos)));
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::vector<img::Image> sample_frames(const dataset::Manifest& manifest,
                                             const dataset::VideoRecord& video, int k) {
    const auto files = img::list_frame_files(manifest.resolve(video.frame_source));
    std::vector<img::Image> out;
    for (std::size_t i : sample_indices(files.size(), k)) out.push_back(img::load_pnm(files[i]));
    return out;
}

// ---- answer normalization -----------------------------------------------

namespace detail {

inline std::optional<int> letter_index(char c) {
    if (c >= 'A' && c <= 'E') return c - 'A';
    if (c >= 'a' && c <= 'e') return c - 'a';
    return std::nullopt;
}

// "(c)" / "[B]" anywhere in the raw text
inline std::optional<int> parenthesized_label(const std::string& raw) {
    for (std::size_t i = 0; i + 2 < raw.size(); ++i) {
        const bool open = raw[i] == '(' || raw[i] == '[';
        const bool close = raw[i + 2] == ')' || raw[i + 2] == ']';
        if (open && close)
            if (auto idx = letter_index(raw[i + 1])) return idx;
    }
    return std::nullopt;
}

// a leading label like "B", "c.", "d) ...". A bare lowercase letter counts
// only when it is the entire response, so the article in "a dog" is not a
// label.
inline std::optional<int> leading_label(const std::string& raw) {
    const auto tokens = split_tokens(raw);
    if (tokens.empty()) return std::nullopt;
    std::string tok = tokens.front();
    bool punctuated = false;
    while (!tok.empty() && (tok.back() == '.' || tok.back() == ')' || tok.back() == ':' ||
                            tok.back() == ',' || tok.back() == ';')) {
        tok.pop_back();
        punctuated = true;
    }
    if (tok.size() != 1) return std::nullopt;
    const bool lowercase_bare = tok[0] >= 'a' && tok[0] <= 'e' && !punctuated;
    if (lowercase_bare && tokens.size() > 1) return std::nullopt;
    return letter_index(tok[0]);
}

// "answer is c" / "option: B" on the punctuation-stripped token stream
inline std::optional<int> keyword_label(const std::string& raw) {
    const auto tokens = split_tokens(normalize_text(raw));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] != "answer" && tokens[i] != "option" && tokens[i] != "choice") continue;
        std::size_t j = i + 1;
        while (j < tokens.size() && (tokens[j] == "is" || tokens[j] == "was")) ++j;
        if (j < tokens.size() && tokens[j].size() == 1)
            if (auto idx = letter_index(tokens[j][0])) return idx;
    }
    return std::nullopt;
}

// a standalone uppercase letter token; lowercase is skipped so the article
// "a" cannot masquerade as a label
inline std::optional<int> standalone_upper_label(const std::string& raw) {
    for (const auto& tok : split_tokens(raw)) {
        if (tok.size() == 1 && tok[0] >= 'A' && tok[0] <= 'E') return tok[0] - 'A';
    }
    return std::nullopt;
}

}  // namespace detail

// Ordered pipeline: (1) label forms, (2) exact normalized-text match,
// (3) unique substring match, (4) unparseable.
inline std::optional<int> normalize_answer(const std::string& raw,
                                           const std::vector<std::string>& choices) {
    const int n = static_cast<int>(choices.size());
    for (auto extractor : {detail::parenthesized_label, detail::leading_label,
                           detail::keyword_label, detail::standalone_upper_label}) {
        if (auto idx = extractor(raw); idx && *idx < n) return idx;
    }

    const std::string norm = normalize_text(raw);
    for (int i = 0; i < n; ++i)
        if (norm == normalize_text(choices[i])) return i;

    std::optional<int> unique_hit;
    for (int i = 0; i < n; ++i) {
        const std::string c = normalize_text(choices[i]);
        if (c.empty() || norm.find(c) == std::string::npos) continue;
        if (unique_hit) return std::nullopt;  // ambiguous
        unique_hit = i;
    }
    return unique_hit;
}

// ---- question answering ---------------------------------------------------

inline std::string format_question(const qagen::QATuple& q) {
    std::string text = "Question: " + q.question_text + "\nChoices:\n";
    for (std::size_t i = 0; i < q.choices.size(); ++i) {
        text += "(";
        text += static_cast<char>('A' + i);
        text += ") " + q.choices[i] + "\n";
    }
    text += "Answer with the letter of the best choice.";
    return text;
}

// One request per question; frames ride along for image backends, the motion
// summary for text-only ones.
inline backends::ChatRequest build_question_request(
    const std::vector<img::Image>& sampled_frames,
    const std::optional<std::string>& motion_summary, const qagen::QATuple& q,
    const backends::BackendProfile& profile) {
    backends::ChatRequest req;
    req.model_id = profile.model_id;
    const bool image_capable = profile.capabilities.image;
    req.messages.push_back(
        {backends::Role::system,
         {backends::MessagePart::text_part(image_capable ? prompts::vqa_instruction()
                                                         : prompts::vqa_text_only_instruction())}});
    backends::ChatMessage user;
    user.role = backends::Role::user;
    if (image_capable) {
        for (const auto& frame : sampled_frames)
            user.parts.push_back(backends::MessagePart::image_part(img::encode_ppm(frame)));
    }
    std::string text;
    if (!image_capable && motion_summary)
        text += "Motion summary: " + *motion_summary + "\n";
    text += format_question(q);
    user.parts.push_back(backends::MessagePart::text_part(text));
    req.messages.push_back(std::move(user));
    return req;
}

inline VQAVerdict answer_question(const std::vector<img::Image>& sampled_frames,
                                  const std::optional<std::string>& motion_summary,
                                  const qagen::QATuple& q, backends::ChatBackend& backend) {
    VQAVerdict v;
    v.question_id = q.question_id;
    v.aspect = q.aspect;
    try {
        v.raw_response =
            backend.complete(build_question_request(sampled_frames, motion_summary, q,
                                                    backend.profile()));
    } catch (const BackendError& e) {
        v.errored = true;
        v.raw_response = std::string("<backend error: ") + e.what() + ">";
        return v;
    }
    v.predicted_index = normalize_answer(v.raw_response, q.choices);
    v.correct = v.predicted_index && *v.predicted_index == q.answer_index;
    return v;
}

namespace detail {

inline void finalize(AlignmentResult& r, bool skip_errored) {
    std::sort(r.verdicts.begin(), r.verdicts.end(),
              [](const VQAVerdict& a, const VQAVerdict& b) { return a.question_id < b.question_id; });
    for (const auto& v : r.verdicts) {
        if (v.errored && skip_errored) continue;
        ++r.n_total;
        if (v.aspect == qagen::Aspect::spatial)
            ++r.n_spatial;
        else
            ++r.n_temporal;
        if (v.correct) {
            ++r.n_correct;
            if (v.aspect == qagen::Aspect::spatial)
                ++r.correct_spatial;
            else
                ++r.correct_temporal;
        }
    }
    if (r.n_total == 0)
        throw BackendError("video '" + r.video_id + "': every question errored");
    r.score = static_cast<double>(r.n_correct) / static_cast<double>(r.n_total);
    r.accuracy_spatial =
        r.n_spatial ? static_cast<double>(r.correct_spatial) / r.n_spatial : 0.0;
    r.accuracy_temporal =
        r.n_temporal ? static_cast<double>(r.correct_temporal) / r.n_temporal : 0.0;
}

}  // namespace detail

// Run the full question set for one video. Frames are loaded once, overlaid
// with the trajectory for image backends (the textual summary substitutes on
// text-only backends), then sampled down to cfg.frames_k.
inline AlignmentResult score_alignment(const dataset::Manifest& manifest,
                                       const dataset::VideoRecord& video,
                                       const qagen::QASet& qaset, backends::ChatBackend& backend,
                                       const VqaConfig& cfg = {}) {
    if (qaset.tuples.empty()) throw ValidationError("empty question set");

    std::vector<img::Image> frames = img::load_frames(manifest.resolve(video.frame_source));
    std::optional<std::string> motion_summary;
    if (cfg.use_trajectory && video.trajectory_path) {
        const auto bundle =
            trajectory::load_trajectory(manifest.resolve(*video.trajectory_path));
        if (backend.profile().capabilities.image) {
            frames = trajectory::render_overlay(frames, bundle, cfg.overlay);
            if (cfg.dump_overlay_dir) {
                for (std::size_t f = 0; f < frames.size(); ++f) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "frame_%04zu.ppm", f);
                    img::save_ppm(frames[f], *cfg.dump_overlay_dir / name);
                }
            }
        } else {
            motion_summary = trajectory::summarize_motion(bundle);
        }
    }
    std::vector<img::Image> sampled;
    for (std::size_t i : sample_indices(frames.size(), cfg.frames_k))
        sampled.push_back(std::move(frames[i]));

    AlignmentResult result;
    result.video_id = video.video_id;
    result.verdicts.resize(qaset.tuples.size());
    parallel_for_indexed(qaset.tuples.size(), cfg.max_in_flight, [&](std::size_t i) {
        result.verdicts[i] = answer_question(sampled, motion_summary, qaset.tuples[i], backend);
    });
    detail::finalize(result, cfg.skip_errored);
    return result;
}

inline nlohmann::json alignment_to_json(const AlignmentResult& r) {
    nlohmann::json j;
    j["video_id"] = r.video_id;
    j["score"] = r.score;
    j["accuracy_spatial"] = r.accuracy_spatial;
    j["accuracy_temporal"] = r.accuracy_temporal;
    j["n_total"] = r.n_total;
    j["n_correct"] = r.n_correct;
    j["n_spatial"] = r.n_spatial;
    j["n_temporal"] = r.n_temporal;
    j["correct_spatial"] = r.correct_spatial;
    j["correct_temporal"] = r.correct_temporal;
    j["verdicts"] = nlohmann::json::array();
    for (const auto& v : r.verdicts) {
        nlohmann::json vj;
        vj["question_id"] = v.question_id;
        if (v.predicted_index)
            vj["predicted_index"] = *v.predicted_index;
        else
            vj["predicted_index"] = nullptr;
        vj["correct"] = v.correct;
        vj["errored"] = v.errored;
        vj["unparseable"] = !v.errored && !v.predicted_index.has_value();
        vj["aspect"] = qagen::aspect_name(v.aspect);
        vj["raw_response"] = v.raw_response;
        j["verdicts"].push_back(std::move(vj));
    }
    return j;
}

inline AlignmentResult alignment_from_json(const nlohmann::json& j) {
    AlignmentResult r;
    try {
        r.video_id = j.at("video_id").get<std::string>();
        r.score = j.at("score").get<double>();
        r.accuracy_spatial = j.at("accuracy_spatial").get<double>();
        r.accuracy_temporal = j.at("accuracy_temporal").get<double>();
        r.n_total = j.at("n_total").get<int>();
        r.n_correct = j.at("n_correct").get<int>();
        r.n_spatial = j.at("n_spatial").get<int>();
        r.n_temporal = j.at("n_temporal").get<int>();
        r.correct_spatial = j.at("correct_spatial").get<int>();
        r.correct_temporal = j.at("correct_temporal").get<int>();
        for (const auto& vj : j.at("verdicts")) {
            VQAVerdict v;
            v.question_id = vj.at("question_id").get<int>();
            if (!vj.at("predicted_index").is_null())
                v.predicted_index = vj.at("predicted_index").get<int>();
            v.correct = vj.at("correct").get<bool>();
            v.errored = vj.at("errored").get<bool>();
            auto aspect = qagen::aspect_from_name(vj.at("aspect").get<std::string>());
            if (!aspect) throw ValidationError("unknown aspect in alignment result");
            v.aspect = *aspect;
            v.raw_response = vj.at("raw_response").get<std::string>();
            r.verdicts.push_back(std::move(v));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed alignment result: ") + e.what());
    }
    return r;
}

}  // namespace t2v::vqa
