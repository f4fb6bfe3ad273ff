#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "t2v/backends.hpp"
#include "t2v/canonical_json.hpp"
#include "t2v/common.hpp"
#include "t2v/dataset.hpp"
#include "t2v/decomposition.hpp"
#include "t2v/parallel.hpp"
#include "t2v/prompts.hpp"
#include "t2v/qagen.hpp"
#include "t2v/quality.hpp"
#include "t2v/stats.hpp"
#include "t2v/vqa.hpp"

namespace t2v::report {

// ---- configuration ----------------------------------------------------------

struct ProviderSpec {
    enum class Kind { file, service, semantic_prompt };
    Kind kind = Kind::file;
    std::string source;  // TSV path or service URL; unused for semantic_prompt

    // fingerprints must not capture machine-local directories
    std::string fingerprint_source() const {
        if (kind == Kind::file) return std::filesystem::path(source).filename().string();
        return source;
    }
};

inline const char* provider_kind_name(ProviderSpec::Kind k) {
    switch (k) {
        case ProviderSpec::Kind::file: return "file";
        case ProviderSpec::Kind::service: return "service";
        case ProviderSpec::Kind::semantic_prompt: return "semantic_prompt";
    }
    return "file";
}

struct ScoreConfig {
    vqa::VqaConfig vqa;
    qagen::QAGenConfig qa;
    double lambda = 0.3;  // list-wise loss weight, recorded for provenance
    ProviderSpec tech;
    ProviderSpec sem;
    bool per_generator_remap = false;
    std::filesystem::path qa_cache_dir;  // empty disables the cache
    bool strict = false;
    bool dump_overlays = false;
    int video_parallelism = 4;
    std::string backend_name;
    std::string model_id;
};

inline nlohmann::json config_to_json(const ScoreConfig& cfg) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["prompt_assets"] = prompts::kPromptAssetVersion;
    j["frames_k"] = cfg.vqa.frames_k;
    j["use_trajectory"] = cfg.vqa.use_trajectory;
    j["skip_errored"] = cfg.vqa.skip_errored;
    j["overlay_tail"] = cfg.vqa.overlay.tail_length;
    j["min_questions"] = cfg.qa.min_questions;
    j["max_questions"] = cfg.qa.max_questions;
    j["choices"] = cfg.qa.choices;
    j["lambda"] = cfg.lambda;
    j["tech_provider"] = {{"kind", provider_kind_name(cfg.tech.kind)},
                          {"source", cfg.tech.fingerprint_source()}};
    j["sem_provider"] = {{"kind", provider_kind_name(cfg.sem.kind)},
                         {"source", cfg.sem.fingerprint_source()}};
    j["per_generator_remap"] = cfg.per_generator_remap;
    j["backend"] = cfg.backend_name;
    j["model_id"] = cfg.model_id;
    return j;
}

inline std::string config_fingerprint(const ScoreConfig& cfg) {
    return to_hex16(fnv1a64(canonical_dump(config_to_json(cfg))));
}

// ---- score report -------------------------------------------------------------

struct PerVideoScore {
    std::string video_id;
    std::string generator_id;
    double t2vscore_a = 0.0;
    double t2vscore_q = 0.0;
    vqa::AlignmentResult alignment;
    double raw_tech = 0.0;
    double raw_sem = 0.0;
    double remapped_tech = 0.0;
    double remapped_sem = 0.0;
};

struct SkippedVideo {
    std::string video_id;
    std::string reason;
};

struct ScoreReport {
    std::vector<PerVideoScore> per_video;  // sorted by video_id
    std::vector<SkippedVideo> skipped;     // sorted by video_id
    std::map<std::string, quality::RemapContext> remap_contexts;
    std::string config_fingerprint;
    std::string tool_version = kToolVersion;
};

inline nlohmann::json report_to_json(const ScoreReport& r) {
    nlohmann::json j;
    j["tool_version"] = r.tool_version;
    j["config_fingerprint"] = r.config_fingerprint;
    j["per_video"] = nlohmann::json::array();
    for (const auto& v : r.per_video) {
        nlohmann::json vj;
        vj["video_id"] = v.video_id;
        vj["generator_id"] = v.generator_id;
        vj["t2vscore_a"] = v.t2vscore_a;
        vj["t2vscore_q"] = v.t2vscore_q;
        vj["alignment"] = vqa::alignment_to_json(v.alignment);
        vj["quality"] = {{"raw_tech", v.raw_tech},
                         {"raw_sem", v.raw_sem},
                         {"remapped_tech", v.remapped_tech},
                         {"remapped_sem", v.remapped_sem},
                         {"fused", v.t2vscore_q}};
        j["per_video"].push_back(std::move(vj));
    }
    j["skipped"] = nlohmann::json::array();
    for (const auto& s : r.skipped)
        j["skipped"].push_back({{"video_id", s.video_id}, {"reason", s.reason}});
    j["remap_contexts"] = nlohmann::json::object();
    for (const auto& [key, ctx] : r.remap_contexts)
        j["remap_contexts"][key] = {
            {"mu", ctx.mu}, {"sigma", ctx.sigma}, {"n", ctx.source_batch_size}};
    return j;
}

inline ScoreReport report_from_json(const nlohmann::json& j) {
    ScoreReport r;
    try {
        r.tool_version = j.at("tool_version").get<std::string>();
        r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        for (const auto& vj : j.at("per_video")) {
            PerVideoScore v;
            v.video_id = vj.at("video_id").get<std::string>();
            v.generator_id = vj.at("generator_id").get<std::string>();
            v.t2vscore_a = vj.at("t2vscore_a").get<double>();
            v.t2vscore_q = vj.at("t2vscore_q").get<double>();
            v.alignment = vqa::alignment_from_json(vj.at("alignment"));
            const auto& qj = vj.at("quality");
            v.raw_tech = qj.at("raw_tech").get<double>();
            v.raw_sem = qj.at("raw_sem").get<double>();
            v.remapped_tech = qj.at("remapped_tech").get<double>();
            v.remapped_sem = qj.at("remapped_sem").get<double>();
            r.per_video.push_back(std::move(v));
        }
        for (const auto& sj : j.value("skipped", nlohmann::json::array()))
            r.skipped.push_back(
                {sj.at("video_id").get<std::string>(), sj.at("reason").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed score report: ") + e.what());
    }
    return r;
}

inline ScoreReport load_report(const std::filesystem::path& path) {
    try {
        return report_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("report " + path.string() + ": " + e.what());
    }
}

// ---- quality providers ----------------------------------------------------

namespace detail {

inline double parse_confidence(const std::string& response, const std::string& video_id) {
    const auto tokens = split_tokens(normalize_text(response));
    for (const auto& tok : tokens) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used == tok.size() && v >= 0.0 && v <= 1.0) return v;
        } catch (const std::exception&) {
        }
    }
    throw BackendError("semantic provider gave no confidence in [0,1] for video '" + video_id +
                       "': " + response);
}

}  // namespace detail

inline backends::ChatRequest build_semantic_quality_request(
    const std::vector<img::Image>& sampled_frames, const backends::BackendProfile& profile) {
    backends::ChatRequest req;
    req.model_id = profile.model_id;
    req.messages.push_back(
        {backends::Role::system,
         {backends::MessagePart::text_part("You judge the visual quality of videos.")}});
    backends::ChatMessage user;
    user.role = backends::Role::user;
    for (const auto& frame : sampled_frames)
        user.parts.push_back(backends::MessagePart::image_part(img::encode_ppm(frame)));
    user.parts.push_back(backends::MessagePart::text_part(prompts::semantic_quality_question()));
    req.messages.push_back(std::move(user));
    return req;
}

// Positive-class confidence between the binary quality prompts, one request
// per video.
inline quality::RawScoreBatch semantic_prompt_scores(const dataset::Manifest& manifest,
                                                     const std::vector<std::string>& video_ids,
                                                     backends::ChatBackend& backend,
                                                     int frames_k) {
    quality::RawScoreBatch batch;
    batch.provider_id = "semantic";
    std::map<std::string, const dataset::VideoRecord*> by_id;
    for (const auto& rec : manifest.records) by_id[rec.video_id] = &rec;
    batch.entries.resize(video_ids.size());
    parallel_for_indexed(video_ids.size(), backend.profile().max_in_flight, [&](std::size_t i) {
        auto it = by_id.find(video_ids[i]);
        if (it == by_id.end())
            throw ValidationError("unknown video_id '" + video_ids[i] + "'");
        const auto sampled = vqa::sample_frames(manifest, *it->second, frames_k);
        const std::string response =
            backend.complete(build_semantic_quality_request(sampled, backend.profile()));
        batch.entries[i] = {video_ids[i], detail::parse_confidence(response, video_ids[i])};
    });
    return batch;
}

inline quality::RawScoreBatch provider_batch(const ProviderSpec& spec,
                                             const std::string& provider_id,
                                             const dataset::Manifest& manifest,
                                             const std::vector<std::string>& video_ids,
                                             backends::ChatBackend* backend, int frames_k) {
    if (spec.kind == ProviderSpec::Kind::semantic_prompt) {
        if (!backend)
            throw ValidationError("semantic_prompt provider needs a multimodal backend");
        auto batch = semantic_prompt_scores(manifest, video_ids, *backend, frames_k);
        batch.provider_id = provider_id;
        return batch;
    }
    if (spec.source.empty())
        throw ValidationError(provider_id + " score provider not configured");
    quality::RawScoreBatch batch;
    batch.provider_id = provider_id;
    batch.entries = backends::fetch_scores(video_ids, spec.source);
    return batch;
}

// Remap a provider batch under the configured scope: one context over the
// whole run, or one per generator subset.
inline std::map<std::string, double> remap_scoped(
    const quality::RawScoreBatch& batch, const std::map<std::string, std::string>& generator_of,
    bool per_generator, const std::string& provider_id,
    std::map<std::string, quality::RemapContext>& contexts_out) {
    if (!per_generator) {
        auto [scores, ctx] = quality::remap(batch);
        contexts_out[provider_id] = ctx;
        return scores;
    }
    std::map<std::string, quality::RawScoreBatch> by_gen;
    for (const auto& [id, score] : batch.entries) {
        auto& sub = by_gen[generator_of.at(id)];
        sub.provider_id = batch.provider_id;
        sub.entries.emplace_back(id, score);
    }
    std::map<std::string, double> merged;
    for (const auto& [gen, sub] : by_gen) {
        auto [scores, ctx] = quality::remap(sub);
        contexts_out[provider_id + "/" + gen] = ctx;
        merged.insert(scores.begin(), scores.end());
    }
    return merged;
}

// ---- score command -------------------------------------------------------------

// Full pipeline: per-prompt QA (cache-aware), per-video VQA, provider scores,
// remap and fusion. Per-video failures are skipped with a reason unless
// cfg.strict.
inline ScoreReport cmd_score(const dataset::Manifest& manifest, backends::ChatBackend& backend,
                             const ScoreConfig& cfg) {
    if (manifest.records.empty()) throw ValidationError("no records");

    ScoreConfig effective = cfg;
    effective.backend_name = backend.profile().name;
    effective.model_id = backend.profile().model_id;

    // one QASet per distinct prompt
    std::vector<std::string> prompts_in_order;
    std::map<std::string, std::vector<std::size_t>> videos_by_prompt;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        const auto& prompt = manifest.records[i].prompt_text;
        if (!videos_by_prompt.count(prompt)) prompts_in_order.push_back(prompt);
        videos_by_prompt[prompt].push_back(i);
    }

    std::map<std::string, qagen::QASet> qasets;
    std::map<std::string, std::string> prompt_errors;
    for (const auto& prompt : prompts_in_order) {
        try {
            std::optional<qagen::QASet> cached;
            if (!cfg.qa_cache_dir.empty())
                cached = qagen::load_cached_qaset(cfg.qa_cache_dir, prompt);
            if (cached) {
                qasets[prompt] = std::move(*cached);
                continue;
            }
            auto graph = decomposition::decompose(prompt, backend);
            auto set = qagen::generate_qa(graph, backend, cfg.qa);
            if (!cfg.qa_cache_dir.empty()) qagen::save_cached_qaset(cfg.qa_cache_dir, set);
            qasets[prompt] = std::move(set);
        } catch (const Error& e) {
            if (cfg.strict) throw;
            prompt_errors[prompt] = e.what();
        }
    }

    // per-video alignment
    const std::size_t n = manifest.records.size();
    std::vector<std::optional<vqa::AlignmentResult>> alignments(n);
    std::vector<std::optional<std::string>> failures(n);
    std::exception_ptr strict_failure;
    std::mutex strict_mu;
    parallel_for_indexed(n, cfg.video_parallelism, [&](std::size_t i) {
        const auto& rec = manifest.records[i];
        if (auto it = prompt_errors.find(rec.prompt_text); it != prompt_errors.end()) {
            failures[i] = "question generation failed: " + it->second;
            return;
        }
        try {
            vqa::VqaConfig vcfg = cfg.vqa;
            if (cfg.dump_overlays && rec.trajectory_path) {
                vcfg.dump_overlay_dir =
                    manifest.resolve(rec.frame_source + "_overlays");
            }
            alignments[i] =
                vqa::score_alignment(manifest, rec, qasets.at(rec.prompt_text), backend, vcfg);
        } catch (const Error& e) {
            if (cfg.strict) {
                std::lock_guard lock(strict_mu);
                if (!strict_failure) strict_failure = std::current_exception();
            }
            failures[i] = e.what();
        }
    });
    if (cfg.strict && strict_failure) std::rethrow_exception(strict_failure);

    std::vector<std::string> scored_ids;
    std::map<std::string, std::string> generator_of;
    for (std::size_t i = 0; i < n; ++i) {
        if (!alignments[i]) continue;
        scored_ids.push_back(manifest.records[i].video_id);
        generator_of[manifest.records[i].video_id] = manifest.records[i].generator_id;
    }
    if (scored_ids.empty()) throw ValidationError("every video failed; nothing to score");

    // quality: raw scores -> remap -> fusion
    ScoreReport out;
    auto tech_batch = provider_batch(cfg.tech, "technical", manifest, scored_ids, &backend,
                                     cfg.vqa.frames_k);
    auto sem_batch =
        provider_batch(cfg.sem, "semantic", manifest, scored_ids, &backend, cfg.vqa.frames_k);
    auto tech = remap_scoped(tech_batch, generator_of, cfg.per_generator_remap, "technical",
                             out.remap_contexts);
    auto sem = remap_scoped(sem_batch, generator_of, cfg.per_generator_remap, "semantic",
                            out.remap_contexts);
    auto fused = quality::fuse(tech, sem);
    std::map<std::string, quality::QualityResult> fused_by_id;
    for (auto& f : fused) fused_by_id[f.video_id] = f;
    std::map<std::string, double> raw_tech, raw_sem;
    for (const auto& [id, s] : tech_batch.entries) raw_tech[id] = s;
    for (const auto& [id, s] : sem_batch.entries) raw_sem[id] = s;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = manifest.records[i];
        if (!alignments[i]) {
            out.skipped.push_back({rec.video_id, *failures[i]});
            continue;
        }
        PerVideoScore v;
        v.video_id = rec.video_id;
        v.generator_id = rec.generator_id;
        v.alignment = std::move(*alignments[i]);
        v.t2vscore_a = v.alignment.score;
        const auto& q = fused_by_id.at(rec.video_id);
        v.remapped_tech = q.remapped_tech;
        v.remapped_sem = q.remapped_sem;
        v.t2vscore_q = q.fused;
        v.raw_tech = raw_tech.at(rec.video_id);
        v.raw_sem = raw_sem.at(rec.video_id);
        out.per_video.push_back(std::move(v));
    }
    std::sort(out.per_video.begin(), out.per_video.end(),
              [](const PerVideoScore& a, const PerVideoScore& b) {
                  return a.video_id < b.video_id;
              });
    std::sort(out.skipped.begin(), out.skipped.end(),
              [](const SkippedVideo& a, const SkippedVideo& b) {
                  return a.video_id < b.video_id;
              });
    out.config_fingerprint = config_fingerprint(effective);
    return out;
}

// ---- correlation tables ------------------------------------------------------

struct EvalRow {
    std::string metric_name;
    stats::Corr spearman;
    stats::Corr kendall;
    stats::Corr pearson;
    std::vector<std::string> flags;
    std::map<std::string, double> extra;
};

struct EvalGroup {
    std::string label;
    std::optional<std::string> held_in;
    std::vector<std::string> held_out;
    std::vector<std::string> video_ids;
    std::vector<EvalRow> rows;
};

struct EvalTable {
    std::string grouping;  // overall | cross_model | ablation
    std::vector<EvalGroup> groups;
    std::string config_fingerprint;
    std::string tool_version = kToolVersion;
};

inline nlohmann::json table_to_json(const EvalTable& t) {
    nlohmann::json j;
    j["grouping"] = t.grouping;
    j["config_fingerprint"] = t.config_fingerprint;
    j["tool_version"] = t.tool_version;
    j["groups"] = nlohmann::json::array();
    for (const auto& g : t.groups) {
        nlohmann::json gj;
        gj["label"] = g.label;
        if (g.held_in)
            gj["held_in"] = *g.held_in;
        else
            gj["held_in"] = nullptr;
        gj["held_out"] = g.held_out;
        gj["n_videos"] = g.video_ids.size();
        gj["video_ids"] = g.video_ids;
        gj["rows"] = nlohmann::json::array();
        for (const auto& row : g.rows) {
            nlohmann::json rj;
            rj["metric_name"] = row.metric_name;
            auto put = [&rj](const char* key, const stats::Corr& c) {
                if (c.defined)
                    rj[key] = c.value;
                else
                    rj[key] = nullptr;
            };
            put("spearman", row.spearman);
            put("kendall", row.kendall);
            put("pearson", row.pearson);
            rj["flags"] = row.flags;
            rj["extra"] = row.extra;
            gj["rows"].push_back(std::move(rj));
        }
        j["groups"].push_back(std::move(gj));
    }
    return j;
}

namespace detail {

inline EvalRow correlation_row(const std::string& name, const std::vector<double>& metric,
                               const std::vector<double>& mos) {
    EvalRow row;
    row.metric_name = name;
    if (metric.size() < 2) {
        row.flags.push_back("insufficient_videos");
        return row;
    }
    row.spearman = stats::spearman(metric, mos);
    row.kendall = stats::kendall(metric, mos);
    row.pearson = stats::pearson(metric, mos);
    if (!row.spearman.defined) row.flags.push_back("spearman_undefined");
    if (!row.kendall.defined) row.flags.push_back("kendall_undefined");
    if (!row.pearson.defined) row.flags.push_back("pearson_undefined");
    return row;
}

struct JoinedScores {
    std::vector<std::string> video_ids;
    std::vector<double> a_score, q_score, mos_alignment, mos_quality;
};

// join report entries to MOS, restricted to an optional generator subset
inline JoinedScores join(const ScoreReport& report, const dataset::Manifest& manifest,
                         const std::set<std::string>* generators = nullptr) {
    const auto mos = dataset::mean_opinion_scores(manifest);
    std::set<std::string> skipped;
    for (const auto& s : report.skipped) skipped.insert(s.video_id);
    std::map<std::string, const PerVideoScore*> by_id;
    for (const auto& v : report.per_video) by_id[v.video_id] = &v;

    JoinedScores out;
    std::vector<std::string> missing;
    for (const auto& rec : manifest.records) {
        if (generators && !generators->contains(rec.generator_id)) continue;
        if (skipped.contains(rec.video_id)) continue;
        auto it = by_id.find(rec.video_id);
        if (it == by_id.end()) {
            missing.push_back(rec.video_id);
            continue;
        }
        out.video_ids.push_back(rec.video_id);
        out.a_score.push_back(it->second->t2vscore_a);
        out.q_score.push_back(it->second->t2vscore_q);
        out.mos_alignment.push_back(mos.at(rec.video_id).alignment);
        out.mos_quality.push_back(mos.at(rec.video_id).quality);
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 8; ++i)
            list += (i ? ", " : "") + missing[i];
        throw ValidationError("coverage mismatch: report lacks " +
                              std::to_string(missing.size()) + " manifest videos (" + list +
                              (missing.size() > 8 ? ", ..." : "") + ")");
    }
    return out;
}

}  // namespace detail

// Extra metric column correlated against one human dimension.
struct ExtraMetric {
    std::string name;
    std::map<std::string, double> values;  // video_id -> metric
    std::string dimension;                 // "alignment" | "quality"
};

// Correlations of T2VScore-A vs alignment MOS and T2VScore-Q vs quality MOS,
// plus any externally computed metric columns.
inline EvalTable cmd_correlate(const ScoreReport& report, const dataset::Manifest& manifest,
                               const std::vector<ExtraMetric>& extras = {}) {
    auto joined = detail::join(report, manifest);
    EvalTable table;
    table.grouping = "overall";
    table.config_fingerprint = report.config_fingerprint;
    EvalGroup group;
    group.label = "overall";
    group.video_ids = joined.video_ids;
    group.rows.push_back(detail::correlation_row("t2vscore_a vs mos_alignment", joined.a_score,
                                                 joined.mos_alignment));
    group.rows.push_back(detail::correlation_row("t2vscore_q vs mos_quality", joined.q_score,
                                                 joined.mos_quality));
    for (const auto& extra : extras) {
        if (extra.dimension != "alignment" && extra.dimension != "quality")
            throw ValidationError("extra metric '" + extra.name +
                                  "': dimension must be alignment or quality");
        std::vector<double> metric;
        std::vector<std::string> missing;
        for (const auto& id : joined.video_ids) {
            auto it = extra.values.find(id);
            if (it == extra.values.end())
                missing.push_back(id);
            else
                metric.push_back(it->second);
        }
        if (!missing.empty())
            throw ValidationError("extra metric '" + extra.name + "' missing " +
                                  std::to_string(missing.size()) + " videos (first: " +
                                  missing.front() + ")");
        const auto& mos = extra.dimension == "alignment" ? joined.mos_alignment
                                                         : joined.mos_quality;
        group.rows.push_back(
            detail::correlation_row(extra.name + " vs mos_" + extra.dimension, metric, mos));
    }
    table.groups.push_back(std::move(group));
    return table;
}

// Table-4-shaped protocol: one row group per cross-model split, correlations
// over the held-out videos only.
inline EvalTable cmd_crossmodel(const ScoreReport& report, const dataset::Manifest& manifest) {
    const auto splits = dataset::cross_model_splits(manifest);
    EvalTable table;
    table.grouping = "cross_model";
    table.config_fingerprint = report.config_fingerprint;
    for (const auto& split : splits) {
        auto joined = detail::join(report, manifest, &split.held_out);
        EvalGroup group;
        group.label = "except " + split.held_in;
        group.held_in = split.held_in;
        group.held_out.assign(split.held_out.begin(), split.held_out.end());
        group.video_ids = joined.video_ids;
        group.rows.push_back(detail::correlation_row("t2vscore_a vs mos_alignment",
                                                     joined.a_score, joined.mos_alignment));
        group.rows.push_back(detail::correlation_row("t2vscore_q vs mos_quality", joined.q_score,
                                                     joined.mos_quality));
        table.groups.push_back(std::move(group));
    }
    return table;
}

// ---- ablation ---------------------------------------------------------------

// Named variants: experts {sem, tech, both} over the trajectory-on run, plus
// trajectory {traj-on, traj-off} for the alignment side.
inline const std::vector<std::string>& default_ablation_variants() {
    static const std::vector<std::string> v{"sem", "tech", "both", "traj-on", "traj-off"};
    return v;
}

inline EvalTable cmd_ablate(const dataset::Manifest& manifest, backends::ChatBackend& backend,
                            const ScoreConfig& cfg,
                            const std::vector<std::string>& variants =
                                default_ablation_variants()) {
    if (variants.empty()) throw ValidationError("no ablation variants requested");
    for (const auto& v : variants)
        if (v != "sem" && v != "tech" && v != "both" && v != "traj-on" && v != "traj-off")
            throw ValidationError("unknown ablation variant '" + v +
                                  "' (want sem|tech|both|traj-on|traj-off)");

    bool need_on = false;  // expert variants all read the trajectory-on run
    bool need_off = false;
    for (const auto& v : variants) (v == "traj-off" ? need_off : need_on) = true;

    ScoreConfig on_cfg = cfg;
    on_cfg.vqa.use_trajectory = true;
    std::optional<ScoreReport> report_on, report_off;
    if (need_on) report_on = cmd_score(manifest, backend, on_cfg);
    if (need_off) {
        ScoreConfig off_cfg = cfg;
        off_cfg.vqa.use_trajectory = false;
        report_off = cmd_score(manifest, backend, off_cfg);
    }

    auto alignment_row = [&](const ScoreReport& rep, const std::string& name) {
        auto joined = detail::join(rep, manifest);
        EvalRow row = detail::correlation_row(name, joined.a_score, joined.mos_alignment);
        double temporal = 0.0, spatial = 0.0;
        int n = 0;
        for (const auto& v : rep.per_video) {
            temporal += v.alignment.accuracy_temporal;
            spatial += v.alignment.accuracy_spatial;
            ++n;
        }
        if (n) {
            row.extra["mean_temporal_accuracy"] = temporal / n;
            row.extra["mean_spatial_accuracy"] = spatial / n;
        }
        return row;
    };
    auto expert_row = [&](const std::string& which, const std::string& name) {
        auto joined = detail::join(*report_on, manifest);
        std::map<std::string, const PerVideoScore*> by_id;
        for (const auto& v : report_on->per_video) by_id[v.video_id] = &v;
        std::vector<double> metric;
        for (const auto& id : joined.video_ids) {
            const auto* v = by_id.at(id);
            metric.push_back(which == "sem" ? v->remapped_sem
                             : which == "tech" ? v->remapped_tech
                                               : v->t2vscore_q);
        }
        return detail::correlation_row(name, metric, joined.mos_quality);
    };

    EvalTable table;
    table.grouping = "ablation";
    table.config_fingerprint = report_on ? report_on->config_fingerprint
                                         : report_off->config_fingerprint;
    EvalGroup group;
    group.label = "ablation";
    for (const auto& v : variants) {
        if (v == "sem") group.rows.push_back(expert_row("sem", "t2vscore_q[sem only]"));
        if (v == "tech") group.rows.push_back(expert_row("tech", "t2vscore_q[tech only]"));
        if (v == "both") group.rows.push_back(expert_row("both", "t2vscore_q[sem+tech]"));
        if (v == "traj-on")
            group.rows.push_back(alignment_row(*report_on, "t2vscore_a[trajectory on]"));
        if (v == "traj-off")
            group.rows.push_back(alignment_row(*report_off, "t2vscore_a[trajectory off]"));
    }
    {
        auto joined = detail::join(report_on ? *report_on : *report_off, manifest);
        group.video_ids = joined.video_ids;
    }
    table.groups.push_back(std::move(group));
    return table;
}

}  // namespace t2v::report
