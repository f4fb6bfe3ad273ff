#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "support/scripted_backend.hpp"
#include "support/test_util.hpp"
#include "t2v/report.hpp"

using namespace t2v;
using backends::MockChatBackend;
using backends::TranscriptStore;
using dataset::Manifest;
using report::ScoreConfig;
using report::ScoreReport;

namespace {

void write_frames(const std::filesystem::path& dir, int n, int w = 24, int h = 16) {
    std::filesystem::create_directories(dir);
    for (int f = 0; f < n; ++f) {
        auto im = img::Image::blank(w, h, {40, 40, 40});
        im.set((3 * f) % w, (2 * f) % h, {250, 120, 30});
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04d.ppm", f);
        img::save_ppm(im, dir / name);
    }
}

std::string q_json(const std::string& text, const std::vector<std::string>& choices, int answer,
                   const std::vector<int>& covers, const std::string& aspect) {
    nlohmann::json q;
    q["question"] = text;
    q["choices"] = choices;
    q["answer_index"] = answer;
    q["covered_elements"] = covers;
    q["aspect"] = aspect;
    return q.dump();
}

// Two prompts, three videos; every backend exchange staged by request hash.
struct Scenario {
    testutil::TempDir tmp;
    std::filesystem::path data;
    TranscriptStore store;
    ScoreConfig cfg;

    static constexpr const char* kPromptCar = "a red car driving at night";
    static constexpr const char* kPromptApple = "a green apple on a table";

    Scenario() : data(tmp.path()) {
        write_frames(data / "frames_car_a", 8);
        write_frames(data / "frames_car_b", 8);
        write_frames(data / "frames_apple", 8);

        trajectory::TrajectoryBundle bundle;
        bundle.frame_count = 8;
        bundle.width = 24;
        bundle.height = 16;
        trajectory::Track track{0, {}};
        for (int f = 0; f < 8; ++f) track.points.push_back({f, 2.0 + 2.0 * f, 8.0, true});
        bundle.tracks.push_back(track);
        trajectory::save_trajectory(bundle, data / "car_a_track.json");

        std::string manifest_lines =
            R"({"video_id":"car_a","prompt_text":")" + std::string(kPromptCar) +
            R"(","generator_id":"gen1","frame_source":"frames_car_a","trajectory_path":"car_a_track.json","annotations":[{"rater_id":"r1","alignment_score":5,"quality_score":2}]})"
            "\n" +
            R"({"video_id":"car_b","prompt_text":")" + std::string(kPromptCar) +
            R"(","generator_id":"gen2","frame_source":"frames_car_b","annotations":[{"rater_id":"r1","alignment_score":3,"quality_score":4}]})"
            "\n" +
            R"({"video_id":"apple_1","prompt_text":")" + std::string(kPromptApple) +
            R"(","generator_id":"gen1","frame_source":"frames_apple","annotations":[{"rater_id":"r1","alignment_score":1,"quality_score":3}]})"
            "\n";
        write_file(data / "manifest.jsonl", manifest_lines);

        write_file(data / "tech.tsv", "car_a\t-1.0\ncar_b\t0.0\napple_1\t1.0\n");
        write_file(data / "sem.tsv", "car_a\t1.0\ncar_b\t1.0\napple_1\t1.0\n");

        cfg.qa.min_questions = 2;
        cfg.qa.choices = 4;
        cfg.tech = {report::ProviderSpec::Kind::file, (data / "tech.tsv").string()};
        cfg.sem = {report::ProviderSpec::Kind::file, (data / "sem.tsv").string()};

        stage_prompts();
        stage_vqa(store);
    }

    // a store lacking the decomposition/QA fixtures: only a warm cache makes
    // it usable
    TranscriptStore vqa_only_store() const {
        TranscriptStore vqa_store;
        stage_vqa(vqa_store);
        return vqa_store;
    }

    Manifest manifest() const { return dataset::load_manifest(data / "manifest.jsonl"); }

    qagen::QASet qaset(const std::string& prompt) const {
        auto graph = decomposition::graph_from_json(
            decomposition::extract_json_block(decomp_response(prompt)), prompt);
        auto tuples = prompt == kPromptCar ? car_questions() : apple_questions();
        qagen::QASet set;
        set.graph = graph;
        set.tuples = tuples;
        int id = 1;
        for (auto& q : set.tuples) q.question_id = id++;
        return set;
    }

    static std::string decomp_response(const std::string& prompt) {
        if (prompt == kPromptCar)
            return R"({"elements": [{"id": 1, "text": "car", "kind": "object"},
                                     {"id": 2, "text": "red", "kind": "attribute"},
                                     {"id": 3, "text": "driving at night", "kind": "action"}],
                       "tuples": [[1, 2], [1, 3]]})";
        return R"({"elements": [{"id": 1, "text": "apple", "kind": "object"},
                                 {"id": 2, "text": "green", "kind": "attribute"},
                                 {"id": 3, "text": "on a table", "kind": "spatial_relation"}],
                   "tuples": [[1, 2], [1, 3]]})";
    }

    static std::vector<qagen::QATuple> car_questions() {
        qagen::QATuple q1, q2;
        q1.question_text = "What color is the car?";
        q1.choices = {"red", "blue", "white", "black"};
        q1.answer_index = 0;
        q1.covered_elements = {1, 2};
        q1.aspect = qagen::Aspect::spatial;
        q2.question_text = "What is the car doing?";
        q2.choices = {"driving at night", "parked", "being washed", "on fire"};
        q2.answer_index = 0;
        q2.covered_elements = {3};
        q2.aspect = qagen::Aspect::temporal;
        return {q1, q2};
    }

    static std::vector<qagen::QATuple> apple_questions() {
        qagen::QATuple q1, q2;
        q1.question_text = "What fruit is shown?";
        q1.choices = {"an apple", "a pear", "a peach", "a plum"};
        q1.answer_index = 0;
        q1.covered_elements = {1};
        q1.aspect = qagen::Aspect::spatial;
        q2.question_text = "Where is the apple?";
        q2.choices = {"on a table", "in a tree", "on the floor", "in a bowl"};
        q2.answer_index = 0;
        q2.covered_elements = {2, 3};
        q2.aspect = qagen::Aspect::spatial;
        return {q1, q2};
    }

    static std::string qa_response(const std::string& prompt) {
        const auto tuples = prompt == kPromptCar ? car_questions() : apple_questions();
        std::string body = "{\"questions\": [";
        for (std::size_t i = 0; i < tuples.size(); ++i) {
            const auto& q = tuples[i];
            std::vector<int> covers(q.covered_elements.begin(), q.covered_elements.end());
            body += (i ? "," : "") +
                    q_json(q.question_text, q.choices, q.answer_index, covers,
                           qagen::aspect_name(q.aspect));
        }
        return body + "]}";
    }

    void stage_prompts() {
        const auto profile = MockChatBackend::mock_profile();
        for (const std::string prompt : {kPromptCar, kPromptApple}) {
            auto dreq = decomposition::build_decompose_request(prompt, profile.model_id);
            store.put(backends::request_key(dreq), decomp_response(prompt));
            auto graph = decomposition::graph_from_json(
                decomposition::extract_json_block(decomp_response(prompt)), prompt);
            auto qreq = qagen::build_qa_request(graph, cfg.qa, profile.model_id);
            store.put(backends::request_key(qreq), qa_response(prompt));
        }
    }

    // verdict plan: car_a 2/2, car_b 1/2, apple_1 0/2
    void stage_vqa(TranscriptStore& target) const {
        const auto profile = MockChatBackend::mock_profile();
        auto stage_video = [&](const std::string& frames_dir,
                               const std::optional<std::string>& track,
                               const std::string& prompt, std::vector<bool> correct) {
            auto frames = img::load_frames(data / frames_dir);
            if (track) {
                auto bundle = trajectory::load_trajectory(data / *track);
                frames = trajectory::render_overlay(frames, bundle, {});
            }
            std::vector<img::Image> sampled;
            for (std::size_t i : vqa::sample_indices(frames.size(), 8))
                sampled.push_back(frames[i]);
            auto set = qaset(prompt);
            for (std::size_t i = 0; i < set.tuples.size(); ++i) {
                const auto& q = set.tuples[i];
                auto req = vqa::build_question_request(sampled, std::nullopt, q, profile);
                const int idx = correct[i]
                                    ? q.answer_index
                                    : (q.answer_index + 1) % static_cast<int>(q.choices.size());
                target.put(backends::request_key(req),
                           std::string(1, static_cast<char>('A' + idx)));
            }
        };
        stage_video("frames_car_a", "car_a_track.json", kPromptCar, {true, true});
        stage_video("frames_car_b", std::nullopt, kPromptCar, {true, false});
        stage_video("frames_apple", std::nullopt, kPromptApple, {false, false});
    }
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("cmd_score runs the staged pipeline end to end", "[report]") {
    Scenario s;
    MockChatBackend backend{s.store};
    auto manifest = s.manifest();
    auto rep = report::cmd_score(manifest, backend, s.cfg);

    REQUIRE(rep.per_video.size() == 3);
    CHECK(rep.skipped.empty());
    CHECK(rep.per_video[0].video_id == "apple_1");  // sorted by id
    CHECK(rep.per_video[1].video_id == "car_a");
    CHECK(rep.per_video[2].video_id == "car_b");
    CHECK(rep.per_video[0].t2vscore_a == 0.0);
    CHECK(rep.per_video[1].t2vscore_a == 1.0);
    CHECK(rep.per_video[2].t2vscore_a == 0.5);

    // tech raw [-1, 0, 1]: mu 0, sigma sqrt(2/3); sem constant -> all 0.5
    const double sigma = std::sqrt(2.0 / 3.0);
    CHECK(rep.per_video[1].remapped_tech == Catch::Approx(sigmoid(-1.0 / sigma)).margin(1e-12));
    CHECK(rep.per_video[2].remapped_tech == Catch::Approx(0.5).margin(1e-12));
    CHECK(rep.per_video[0].remapped_tech == Catch::Approx(sigmoid(1.0 / sigma)).margin(1e-12));
    for (const auto& v : rep.per_video) {
        CHECK(v.remapped_sem == 0.5);
        CHECK(v.t2vscore_q == Catch::Approx((v.remapped_tech + 0.5) / 2.0).margin(1e-15));
        CHECK(v.t2vscore_q > 0.0);
        CHECK(v.t2vscore_q < 1.0);
    }
    CHECK(rep.remap_contexts.at("technical").mu == Catch::Approx(0.0));
    CHECK(rep.remap_contexts.at("semantic").sigma == 0.0);

    // temporal accuracy only exists for the car prompt
    CHECK(rep.per_video[1].alignment.accuracy_temporal == 1.0);
    CHECK(rep.per_video[2].alignment.accuracy_temporal == 0.0);
    CHECK(rep.per_video[0].alignment.n_temporal == 0);
}

TEST_CASE("reports are byte-identical across runs and parallelism", "[report]") {
    Scenario s;
    auto manifest = s.manifest();
    std::string first;
    for (int run = 0; run < 3; ++run) {
        MockChatBackend backend{s.store};
        auto cfg = s.cfg;
        cfg.video_parallelism = run == 2 ? 1 : 4;
        auto rep = report::cmd_score(manifest, backend, cfg);
        const std::string dump = canonical_dump(report::report_to_json(rep));
        if (run == 0)
            first = dump;
        else
            CHECK(dump == first);
    }
    // round-trip through JSON keeps the numbers
    MockChatBackend backend{s.store};
    auto rep = report::cmd_score(manifest, backend, s.cfg);
    auto loaded = report::report_from_json(report::report_to_json(rep));
    CHECK(loaded.per_video.size() == rep.per_video.size());
    CHECK(loaded.per_video[1].t2vscore_a == rep.per_video[1].t2vscore_a);
    CHECK(loaded.per_video[1].alignment.verdicts == rep.per_video[1].alignment.verdicts);
}

TEST_CASE("a video with missing frames is skipped with a reason", "[report]") {
    Scenario s;
    auto manifest = s.manifest();
    dataset::VideoRecord broken;
    broken.video_id = "broken_1";
    broken.prompt_text = Scenario::kPromptApple;
    broken.generator_id = "gen2";
    broken.frame_source = "frames_nowhere";
    broken.annotations = {{"r1", 2, 2}};
    manifest.records.push_back(broken);

    MockChatBackend backend{s.store};
    auto rep = report::cmd_score(manifest, backend, s.cfg);
    REQUIRE(rep.skipped.size() == 1);
    CHECK(rep.skipped[0].video_id == "broken_1");
    CHECK_THAT(rep.skipped[0].reason, Catch::Matchers::ContainsSubstring("does not exist"));
    CHECK(rep.per_video.size() == 3);

    auto strict_cfg = s.cfg;
    strict_cfg.strict = true;
    MockChatBackend backend2{s.store};
    CHECK_THROWS_AS(report::cmd_score(manifest, backend2, strict_cfg), IoError);
}

TEST_CASE("the qa cache short-circuits prompt decomposition", "[report]") {
    Scenario s;
    auto manifest = s.manifest();
    testutil::TempDir cache;
    auto cfg = s.cfg;
    cfg.qa_cache_dir = cache.path();

    std::string first_dump;
    {
        MockChatBackend backend{s.store};
        auto rep = report::cmd_score(manifest, backend, cfg);
        first_dump = canonical_dump(report::report_to_json(rep));
    }
    CHECK(std::filesystem::exists(qagen::cache_path(cache.path(), Scenario::kPromptCar)));

    // second run: a store holding only VQA fixtures works because the prompt
    // work comes from the cache, and the report stays byte-identical
    MockChatBackend backend{s.vqa_only_store()};
    auto rep = report::cmd_score(manifest, backend, cfg);
    CHECK(rep.per_video.size() == 3);
    CHECK(canonical_dump(report::report_to_json(rep)) == first_dump);

    // without the cache the same store fails on the first decomposition
    auto no_cache = cfg;
    no_cache.qa_cache_dir.clear();
    no_cache.strict = true;
    MockChatBackend backend2{s.vqa_only_store()};
    CHECK_THROWS_AS(report::cmd_score(manifest, backend2, no_cache), BackendError);
}

TEST_CASE("cmd_correlate reproduces trivial and oracle correlations", "[report]") {
    Scenario s;
    MockChatBackend backend{s.store};
    auto manifest = s.manifest();
    auto rep = report::cmd_score(manifest, backend, s.cfg);
    auto table = report::cmd_correlate(rep, manifest);

    REQUIRE(table.groups.size() == 1);
    REQUIRE(table.groups[0].rows.size() == 2);
    // a-scores [0, 1, 0.5] track alignment MOS [1, 5, 3] perfectly
    const auto& row_a = table.groups[0].rows[0];
    CHECK(row_a.metric_name == "t2vscore_a vs mos_alignment");
    CHECK(row_a.spearman.value == Catch::Approx(1.0).margin(1e-15));
    CHECK(row_a.kendall.value == Catch::Approx(1.0).margin(1e-15));
    CHECK(row_a.pearson.value == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("extra metric columns join against the chosen dimension", "[report]") {
    Scenario s;
    MockChatBackend backend{s.store};
    auto manifest = s.manifest();
    auto rep = report::cmd_score(manifest, backend, s.cfg);

    report::ExtraMetric reversed;
    reversed.name = "anti_metric";
    reversed.dimension = "alignment";
    reversed.values = {{"car_a", 0.0}, {"car_b", 0.5}, {"apple_1", 1.0}};
    auto table = report::cmd_correlate(rep, manifest, {reversed});
    REQUIRE(table.groups[0].rows.size() == 3);
    CHECK(table.groups[0].rows[2].metric_name == "anti_metric vs mos_alignment");
    CHECK(table.groups[0].rows[2].spearman.value == Catch::Approx(-1.0).margin(1e-15));

    report::ExtraMetric incomplete;
    incomplete.name = "partial";
    incomplete.dimension = "quality";
    incomplete.values = {{"car_a", 0.1}};
    CHECK_THROWS_WITH(report::cmd_correlate(rep, manifest, {incomplete}),
                      Catch::Matchers::ContainsSubstring("partial"));

    report::ExtraMetric bad_dim;
    bad_dim.name = "x";
    bad_dim.dimension = "weird";
    bad_dim.values = reversed.values;
    CHECK_THROWS_AS(report::cmd_correlate(rep, manifest, {bad_dim}), ValidationError);
}

TEST_CASE("correlate matches the pair-enumeration oracle on an 8-video set", "[report]") {
    // synthetic report + manifest with interleaved ranks and a tie
    Manifest manifest;
    ScoreReport rep;
    rep.config_fingerprint = "0000000000000000";
    const std::vector<double> metric_a{0.2, 0.9, 0.4, 0.4, 0.7, 0.1, 0.55, 0.8};
    const std::vector<int> mos_a{1, 5, 2, 3, 4, 1, 3, 5};
    const std::vector<double> metric_q{0.3, 0.6, 0.2, 0.8, 0.5, 0.9, 0.1, 0.4};
    const std::vector<int> mos_q{2, 3, 1, 5, 3, 4, 2, 2};
    for (int i = 0; i < 8; ++i) {
        dataset::VideoRecord rec;
        rec.video_id = "v" + std::to_string(i);
        rec.prompt_text = "p";
        rec.generator_id = "g";
        rec.frame_source = "frames";
        rec.annotations = {{"r1", mos_a[i], mos_q[i]}};
        manifest.records.push_back(rec);
        manifest.generator_ids.insert("g");

        report::PerVideoScore v;
        v.video_id = rec.video_id;
        v.generator_id = "g";
        v.t2vscore_a = metric_a[i];
        v.t2vscore_q = metric_q[i];
        rep.per_video.push_back(v);
    }
    auto table = report::cmd_correlate(rep, manifest);
    std::vector<double> mos_a_d(mos_a.begin(), mos_a.end());
    std::vector<double> mos_q_d(mos_q.begin(), mos_q.end());
    CHECK(table.groups[0].rows[0].spearman.value ==
          Catch::Approx(*oracle::spearman(metric_a, mos_a_d)).margin(1e-12));
    CHECK(table.groups[0].rows[0].kendall.value ==
          Catch::Approx(*oracle::kendall_tau_b(metric_a, mos_a_d)).margin(1e-12));
    CHECK(table.groups[0].rows[0].pearson.value ==
          Catch::Approx(*oracle::pearson(metric_a, mos_a_d)).margin(1e-12));
    CHECK(table.groups[0].rows[1].spearman.value ==
          Catch::Approx(*oracle::spearman(metric_q, mos_q_d)).margin(1e-12));
    CHECK(table.groups[0].rows[1].kendall.value ==
          Catch::Approx(*oracle::kendall_tau_b(metric_q, mos_q_d)).margin(1e-12));
}

namespace {

// identical per-generator blocks: metric [1,3,2,4], alignment mos [1,2,3,4]
std::pair<Manifest, ScoreReport> block_fixture(int n_generators) {
    Manifest manifest;
    ScoreReport rep;
    rep.config_fingerprint = "0000000000000000";
    const std::vector<double> metric{1, 3, 2, 4};
    const std::vector<int> mos{1, 2, 3, 4};
    for (int g = 0; g < n_generators; ++g) {
        const std::string gen = "gen" + std::to_string(g);
        manifest.generator_ids.insert(gen);
        for (int i = 0; i < 4; ++i) {
            dataset::VideoRecord rec;
            rec.video_id = gen + "_v" + std::to_string(i);
            rec.prompt_text = "p";
            rec.generator_id = gen;
            rec.frame_source = "frames";
            rec.annotations = {{"r1", mos[i], mos[i]}};
            manifest.records.push_back(rec);

            report::PerVideoScore v;
            v.video_id = rec.video_id;
            v.generator_id = gen;
            v.t2vscore_a = metric[i];
            v.t2vscore_q = metric[i];
            rep.per_video.push_back(v);
        }
    }
    return {manifest, rep};
}

}  // namespace

TEST_CASE("cmd_crossmodel emits one held-out group per generator", "[report]") {
    auto [manifest, rep] = block_fixture(5);
    auto table = report::cmd_crossmodel(rep, manifest);
    REQUIRE(table.groups.size() == 5);

    // independent verification of the partition
    std::set<std::string> all = manifest.generator_ids;
    for (const auto& group : table.groups) {
        REQUIRE(group.held_in.has_value());
        std::set<std::string> held_out(group.held_out.begin(), group.held_out.end());
        CHECK(held_out.size() == 4);
        CHECK_FALSE(held_out.contains(*group.held_in));
        std::set<std::string> unioned = held_out;
        unioned.insert(*group.held_in);
        CHECK(unioned == all);
        CHECK(group.label == "except " + *group.held_in);
        CHECK(group.video_ids.size() == 16);  // 4 generators x 4 videos
        for (const auto& id : group.video_ids)
            CHECK_FALSE(id.starts_with(*group.held_in + "_"));
    }
}

TEST_CASE("identical generator blocks give held-out == whole-set correlations", "[report]") {
    auto [manifest, rep] = block_fixture(5);
    auto whole = report::cmd_correlate(rep, manifest);
    auto cross = report::cmd_crossmodel(rep, manifest);
    for (const auto& group : cross.groups) {
        for (std::size_t r = 0; r < 2; ++r) {
            CHECK(group.rows[r].spearman.value ==
                  Catch::Approx(whole.groups[0].rows[r].spearman.value).margin(1e-12));
            CHECK(group.rows[r].kendall.value ==
                  Catch::Approx(whole.groups[0].rows[r].kendall.value).margin(1e-12));
            CHECK(group.rows[r].pearson.value ==
                  Catch::Approx(whole.groups[0].rows[r].pearson.value).margin(1e-12));
        }
    }
}

TEST_CASE("cmd_crossmodel needs at least two generators", "[report]") {
    auto [manifest, rep] = block_fixture(1);
    CHECK_THROWS_AS(report::cmd_crossmodel(rep, manifest), ValidationError);
    auto [manifest2, rep2] = block_fixture(2);
    CHECK(report::cmd_crossmodel(rep2, manifest2).groups.size() == 2);
}

TEST_CASE("cmd_ablate emits the requested variant rows", "[report]") {
    Scenario s;
    // stage traj-off fixtures too: temporal questions answered wrong
    {
        const auto profile = MockChatBackend::mock_profile();
        auto stage_off = [&](const std::string& frames_dir, const std::string& prompt,
                             std::vector<bool> correct_spatial) {
            auto frames = img::load_frames(s.data / frames_dir);
            std::vector<img::Image> sampled;
            for (std::size_t i : vqa::sample_indices(frames.size(), 8))
                sampled.push_back(frames[i]);
            auto set = s.qaset(prompt);
            for (std::size_t i = 0; i < set.tuples.size(); ++i) {
                const auto& q = set.tuples[i];
                const bool right =
                    q.aspect == qagen::Aspect::spatial && correct_spatial[i];
                auto req = vqa::build_question_request(sampled, std::nullopt, q, profile);
                const int idx = right ? q.answer_index
                                      : (q.answer_index + 1) %
                                            static_cast<int>(q.choices.size());
                s.store.put(backends::request_key(req),
                            std::string(1, static_cast<char>('A' + idx)));
            }
        };
        stage_off("frames_car_a", Scenario::kPromptCar, {true, true});
        // car_b and apple_1 have no trajectory: traj-off requests are identical
        // to the already-staged ones
    }

    MockChatBackend backend{s.store};
    auto manifest = s.manifest();
    auto table = report::cmd_ablate(manifest, backend, s.cfg);
    REQUIRE(table.groups.size() == 1);
    const auto& rows = table.groups[0].rows;
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].metric_name == "t2vscore_q[sem only]");
    CHECK(rows[1].metric_name == "t2vscore_q[tech only]");
    CHECK(rows[2].metric_name == "t2vscore_q[sem+tech]");
    CHECK(rows[3].metric_name == "t2vscore_a[trajectory on]");
    CHECK(rows[4].metric_name == "t2vscore_a[trajectory off]");

    // trajectory ablation kills car_a's temporal answer
    CHECK(rows[3].extra.at("mean_temporal_accuracy") >
          rows[4].extra.at("mean_temporal_accuracy"));

    // constant semantic scores leave sem correlations undefined, flagged
    CHECK_FALSE(rows[0].spearman.defined);
    CHECK(std::find(rows[0].flags.begin(), rows[0].flags.end(), "spearman_undefined") !=
          rows[0].flags.end());

    // single variant, single row
    MockChatBackend backend2{s.store};
    auto single = report::cmd_ablate(manifest, backend2, s.cfg, {"tech"});
    REQUIRE(single.groups[0].rows.size() == 1);
    CHECK(single.groups[0].rows[0].metric_name == "t2vscore_q[tech only]");

    MockChatBackend backend3{s.store};
    CHECK_THROWS_AS(report::cmd_ablate(manifest, backend3, s.cfg, {"bogus"}), ValidationError);
}

TEST_CASE("config fingerprints pin the effective configuration", "[report]") {
    ScoreConfig a, b;
    a.tech = b.tech = {report::ProviderSpec::Kind::file, "/data/tech.tsv"};
    a.sem = b.sem = {report::ProviderSpec::Kind::file, "/data/sem.tsv"};
    CHECK(report::config_fingerprint(a) == report::config_fingerprint(b));
    b.vqa.frames_k = 16;
    CHECK(report::config_fingerprint(a) != report::config_fingerprint(b));
    // fingerprint ignores the provider's directory, not its filename
    ScoreConfig c = a;
    c.tech.source = "/elsewhere/tech.tsv";
    CHECK(report::config_fingerprint(a) == report::config_fingerprint(c));
}

TEST_CASE("canonical json emits sorted keys and fixed decimals", "[report]") {
    nlohmann::json j;
    j["b"] = 1.0 / 3.0;
    j["a"] = 2;
    j["c"] = {{"nested", true}, {"arr", {1.5, -0.0}}};
    const std::string out = canonical_dump(j);
    CHECK(out.find("\"a\"") < out.find("\"b\""));
    CHECK_THAT(out, Catch::Matchers::ContainsSubstring("0.333333"));
    CHECK_THAT(out, Catch::Matchers::ContainsSubstring("1.500000"));
    CHECK_THAT(out, !Catch::Matchers::ContainsSubstring("-0.000000"));
    CHECK(out.back() == '\n');
}
