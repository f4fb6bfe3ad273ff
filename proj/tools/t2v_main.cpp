// t2v: text-to-video evaluation harness CLI.
//
// Subcommands: score, correlate, crossmodel, ablate, replay.
// Exit codes: 0 success, 2 validation failure, 3 backend failure,
// 4 partial success (some videos skipped in a non-strict run).

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "t2v/backends.hpp"
#include "t2v/canonical_json.hpp"
#include "t2v/common.hpp"
#include "t2v/dataset.hpp"
#include "t2v/report.hpp"

namespace {

struct BackendOptions {
    std::string mock_dir;
    std::string profile_path;
    std::string replay_dir;
    std::string audit_dir;
};

struct ScoreOptions {
    std::string manifest_path;
    std::string out_path;
    std::string tech_scores;
    std::string sem_scores;
    bool sem_prompt = false;
    int frames_k = 8;
    int choices = 4;
    int min_questions = 5;
    int max_questions = 12;
    double lambda = 0.3;
    bool strict = false;
    bool dump_overlays = false;
    bool no_trajectory = false;
    bool skip_errored = false;
    bool per_generator_remap = false;
    std::string qa_cache;
    int parallel = 4;
    int in_flight = 4;
};

void add_backend_flags(CLI::App* cmd, BackendOptions& opts, bool with_replay = true) {
    auto* mock = cmd->add_option("--mock", opts.mock_dir,
                                 "Directory of mock fixtures (offline, deterministic)");
    auto* profile = cmd->add_option("--backend-profile", opts.profile_path,
                                    "Backend profile JSON (endpoint, capabilities, limits)");
    mock->excludes(profile);
    if (with_replay) {
        auto* replay = cmd->add_option(
            "--replay", opts.replay_dir,
            "Replay a prior audit directory instead of calling any backend");
        replay->excludes(mock);
        replay->excludes(profile);
    }
    cmd->add_option("--audit-dir", opts.audit_dir,
                    "Write one JSON audit file per backend request");
}

void add_score_flags(CLI::App* cmd, ScoreOptions& opts) {
    cmd->add_option("--manifest", opts.manifest_path, "Manifest (line-delimited JSON records)")
        ->required();
    cmd->add_option("--out", opts.out_path, "Output path (default: stdout)");
    cmd->add_option("--tech-scores", opts.tech_scores,
                    "Technical expert scores: TSV path or service URL");
    auto* sem = cmd->add_option("--sem-scores", opts.sem_scores,
                                "Semantic expert scores: TSV path or service URL");
    cmd->add_flag("--sem-prompt", opts.sem_prompt,
                  "Query the multimodal backend with the binary quality prompts instead of "
                  "--sem-scores")
        ->excludes(sem);
    cmd->add_option("--frames-k", opts.frames_k, "Frames sampled per video")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--choices", opts.choices, "Answer choices per generated question")
        ->check(CLI::Range(2, 5));
    cmd->add_option("--min-questions", opts.min_questions, "Minimum questions per prompt");
    cmd->add_option("--max-questions", opts.max_questions, "Maximum questions per prompt");
    cmd->add_option("--lambda", opts.lambda, "Rank-loss weight recorded in the config")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--strict", opts.strict, "Fail the run on the first video error");
    cmd->add_flag("--dump-overlays", opts.dump_overlays,
                  "Write trajectory-overlaid frames beside each video's frames");
    cmd->add_flag("--no-trajectory", opts.no_trajectory, "Ignore trajectory files");
    cmd->add_flag("--skip-errored", opts.skip_errored,
                  "Exclude backend-errored questions from N instead of counting them wrong");
    cmd->add_flag("--per-generator-remap", opts.per_generator_remap,
                  "Remap expert scores within each generator subset instead of the whole run");
    cmd->add_option("--qa-cache", opts.qa_cache, "Directory for cached question sets");
    cmd->add_option("--parallel", opts.parallel, "Videos processed concurrently")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--in-flight", opts.in_flight, "Concurrent requests per video")
        ->check(CLI::PositiveNumber);
}

std::shared_ptr<t2v::backends::ChatBackend> make_backend(const BackendOptions& opts) {
    std::shared_ptr<t2v::backends::ChatBackend> inner;
    if (!opts.mock_dir.empty()) {
        inner = std::make_shared<t2v::backends::MockChatBackend>(
            t2v::backends::TranscriptStore::load_dir(opts.mock_dir));
    } else if (!opts.replay_dir.empty()) {
        auto profile = t2v::backends::MockChatBackend::mock_profile();
        profile.name = "replay";
        inner = std::make_shared<t2v::backends::MockChatBackend>(
            t2v::backends::TranscriptStore::load_dir(opts.replay_dir), profile);
    } else if (!opts.profile_path.empty()) {
        inner = std::make_shared<t2v::backends::HttpChatBackend>(
            t2v::backends::load_profile(opts.profile_path));
    } else {
        throw t2v::ValidationError("choose a backend: --mock, --backend-profile or --replay");
    }
    if (!opts.audit_dir.empty() && opts.replay_dir.empty()) {
        inner = std::make_shared<t2v::backends::AuditingBackend>(
            inner, std::make_shared<t2v::backends::AuditWriter>(opts.audit_dir));
    }
    return std::make_shared<t2v::backends::ThrottledBackend>(inner);
}

t2v::report::ScoreConfig make_config(const ScoreOptions& opts) {
    t2v::report::ScoreConfig cfg;
    cfg.vqa.frames_k = opts.frames_k;
    cfg.vqa.use_trajectory = !opts.no_trajectory;
    cfg.vqa.skip_errored = opts.skip_errored;
    cfg.vqa.max_in_flight = opts.in_flight;
    cfg.qa.min_questions = opts.min_questions;
    cfg.qa.max_questions = opts.max_questions;
    cfg.qa.choices = opts.choices;
    cfg.lambda = opts.lambda;
    if (!opts.tech_scores.empty()) {
        const bool service = t2v::starts_with(opts.tech_scores, "http");
        cfg.tech = {service ? t2v::report::ProviderSpec::Kind::service
                            : t2v::report::ProviderSpec::Kind::file,
                    opts.tech_scores};
    }
    if (opts.sem_prompt) {
        cfg.sem = {t2v::report::ProviderSpec::Kind::semantic_prompt, ""};
    } else if (!opts.sem_scores.empty()) {
        const bool service = t2v::starts_with(opts.sem_scores, "http");
        cfg.sem = {service ? t2v::report::ProviderSpec::Kind::service
                           : t2v::report::ProviderSpec::Kind::file,
                   opts.sem_scores};
    }
    cfg.per_generator_remap = opts.per_generator_remap;
    cfg.qa_cache_dir = opts.qa_cache;
    cfg.strict = opts.strict;
    cfg.dump_overlays = opts.dump_overlays;
    cfg.video_parallelism = opts.parallel;
    return cfg;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    const std::string text = t2v::canonical_dump(j);
    if (out_path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
    } else {
        t2v::write_file(out_path, text);
    }
}

std::vector<t2v::report::ExtraMetric> parse_extras(const std::vector<std::string>& specs) {
    std::vector<t2v::report::ExtraMetric> out;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        const auto at = spec.rfind('@');
        if (eq == std::string::npos || at == std::string::npos || at <= eq)
            throw t2v::ValidationError("--extra wants name=path@dimension, got '" + spec + "'");
        t2v::report::ExtraMetric extra;
        extra.name = spec.substr(0, eq);
        extra.dimension = spec.substr(at + 1);
        const std::string path = spec.substr(eq + 1, at - eq - 1);
        extra.values = t2v::backends::read_score_file(path);
        out.push_back(std::move(extra));
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"t2v: text-to-video generation evaluation harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("t2v ") + t2v::kToolVersion);

    ScoreOptions score_opts;
    BackendOptions score_backend;
    auto* score = app.add_subcommand("score", "Score a manifest: alignment + quality per video");
    add_score_flags(score, score_opts);
    add_backend_flags(score, score_backend);

    struct {
        std::string report, manifest, out;
        std::vector<std::string> extras;
    } corr_opts;
    auto* correlate =
        app.add_subcommand("correlate", "Correlate report scores with human MOS columns");
    correlate->add_option("--report", corr_opts.report, "ScoreReport JSON")->required();
    correlate->add_option("--manifest", corr_opts.manifest, "Manifest with annotations")
        ->required();
    correlate->add_option("--out", corr_opts.out, "Output path (default: stdout)");
    correlate->add_option("--extra", corr_opts.extras,
                          "Extra metric column: name=scores.tsv@alignment|quality");

    struct {
        std::string report, manifest, out;
    } cross_opts;
    auto* crossmodel = app.add_subcommand(
        "crossmodel", "Held-one-generator-in correlation table over the other generators");
    crossmodel->add_option("--report", cross_opts.report, "ScoreReport JSON")->required();
    crossmodel->add_option("--manifest", cross_opts.manifest, "Manifest with annotations")
        ->required();
    crossmodel->add_option("--out", cross_opts.out, "Output path (default: stdout)");

    ScoreOptions ablate_opts;
    BackendOptions ablate_backend;
    std::vector<std::string> variants;
    auto* ablate = app.add_subcommand("ablate", "Run expert/trajectory ablation variants");
    add_score_flags(ablate, ablate_opts);
    add_backend_flags(ablate, ablate_backend);
    ablate->add_option("--variants", variants,
                       "Variants to run: sem, tech, both, traj-on, traj-off");

    ScoreOptions replay_opts;
    std::string replay_audit_dir;
    auto* replay = app.add_subcommand(
        "replay", "Re-score from a prior audit directory with zero backend calls");
    add_score_flags(replay, replay_opts);
    replay->add_option("--audit-dir", replay_audit_dir, "Audit directory from a previous run")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (score->parsed()) {
        auto backend = make_backend(score_backend);
        auto manifest = t2v::dataset::load_manifest(score_opts.manifest_path);
        auto rep = t2v::report::cmd_score(manifest, *backend, make_config(score_opts));
        emit(t2v::report::report_to_json(rep), score_opts.out_path);
        return rep.skipped.empty() ? 0 : 4;
    }
    if (correlate->parsed()) {
        auto rep = t2v::report::load_report(corr_opts.report);
        auto manifest = t2v::dataset::load_manifest(corr_opts.manifest);
        auto table =
            t2v::report::cmd_correlate(rep, manifest, parse_extras(corr_opts.extras));
        emit(t2v::report::table_to_json(table), corr_opts.out);
        return 0;
    }
    if (crossmodel->parsed()) {
        auto rep = t2v::report::load_report(cross_opts.report);
        auto manifest = t2v::dataset::load_manifest(cross_opts.manifest);
        emit(t2v::report::table_to_json(t2v::report::cmd_crossmodel(rep, manifest)),
             cross_opts.out);
        return 0;
    }
    if (ablate->parsed()) {
        auto backend = make_backend(ablate_backend);
        auto manifest = t2v::dataset::load_manifest(ablate_opts.manifest_path);
        auto table = variants.empty()
                         ? t2v::report::cmd_ablate(manifest, *backend, make_config(ablate_opts))
                         : t2v::report::cmd_ablate(manifest, *backend,
                                                   make_config(ablate_opts), variants);
        emit(t2v::report::table_to_json(table), ablate_opts.out_path);
        return 0;
    }
    if (replay->parsed()) {
        BackendOptions opts;
        opts.replay_dir = replay_audit_dir;
        auto backend = make_backend(opts);
        auto manifest = t2v::dataset::load_manifest(replay_opts.manifest_path);
        auto rep = t2v::report::cmd_score(manifest, *backend, make_config(replay_opts));
        emit(t2v::report::report_to_json(rep), replay_opts.out_path);
        return rep.skipped.empty() ? 0 : 4;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const t2v::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const t2v::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
