#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "t2v/backends.hpp"
#include "t2v/common.hpp"
#include "t2v/decomposition.hpp"
#include "t2v/prompts.hpp"

namespace t2v::qagen {

enum class Aspect { spatial, temporal };

inline const char* aspect_name(Aspect a) {
    return a == Aspect::spatial ? "spatial" : "temporal";
}

inline std::optional<Aspect> aspect_from_name(const std::string& s) {
    if (s == "spatial") return Aspect::spatial;
    if (s == "temporal") return Aspect::temporal;
    return std::nullopt;
}

struct QATuple {
    int question_id = 0;
    std::string question_text;
    std::vector<std::string> choices;  // 2..5, pairwise distinct after normalization
    int answer_index = 0;
    std::set<int> covered_elements;
    Aspect aspect = Aspect::spatial;

    bool operator==(const QATuple&) const = default;
};

// Video-agnostic: one QASet per prompt, shared by every video generated from
// it.
struct QASet {
    decomposition::EntityGraph graph;
    std::vector<QATuple> tuples;

    bool operator==(const QASet&) const = default;
};

struct QAGenConfig {
    int min_questions = 5;
    int max_questions = 12;
    int choices = 4;          // 2..5
    int max_repair_rounds = 2;
};

inline void validate_config(const QAGenConfig& cfg) {
    if (cfg.min_questions < 1 || cfg.max_questions < cfg.min_questions)
        throw ValidationError("bad question count bounds");
    if (cfg.choices < 2 || cfg.choices > 5)
        throw ValidationError("choices per question must be in [2,5]");
}

inline std::vector<Violation> validate_tuple(const QATuple& q,
                                             const decomposition::EntityGraph& graph) {
    std::vector<Violation> out;
    const std::string tag = "question " + std::to_string(q.question_id);
    if (trim(q.question_text).empty())
        out.push_back({"empty_question", tag + " has empty text"});
    if (q.choices.size() < 2 || q.choices.size() > 5)
        out.push_back({"choice_count", tag + " has " + std::to_string(q.choices.size()) +
                                           " choices, want 2..5"});
    if (q.answer_index < 0 || q.answer_index >= static_cast<int>(q.choices.size()))
        out.push_back({"answer_bounds", tag + " answer_index " + std::to_string(q.answer_index) +
                                            " outside its choices"});
    std::set<std::string> normalized;
    for (const auto& c : q.choices) {
        if (!normalized.insert(normalize_ws(c)).second) {
            out.push_back({"duplicate_choice", tag + " has duplicate choice '" + c + "'"});
            break;
        }
    }
    if (q.covered_elements.empty()) {
        out.push_back({"no_coverage", tag + " covers no elements"});
    } else {
        for (int id : q.covered_elements)
            if (!graph.find(id))
                out.push_back({"unknown_element",
                               tag + " covers missing element id " + std::to_string(id)});
    }
    return out;
}

// Empty result iff all QASet and QATuple invariants hold.
inline std::vector<Violation> validate_qaset(const QASet& s) {
    std::vector<Violation> out;
    std::set<int> covered;
    bool has_temporal_question = false;
    for (const auto& q : s.tuples) {
        auto tuple_violations = validate_tuple(q, s.graph);
        out.insert(out.end(), tuple_violations.begin(), tuple_violations.end());
        covered.insert(q.covered_elements.begin(), q.covered_elements.end());
        has_temporal_question = has_temporal_question || q.aspect == Aspect::temporal;
    }
    for (const auto& e : s.graph.elements) {
        if (e.kind == decomposition::ElementKind::global) continue;
        if (!covered.contains(e.element_id))
            out.push_back({"coverage", "element " + std::to_string(e.element_id) + " ('" +
                                           e.surface_text + "') is covered by no question"});
    }
    if (s.graph.has_temporal_element() && !has_temporal_question && !s.tuples.empty())
        out.push_back({"temporal_coverage",
                       "prompt has temporal elements but no temporal question"});
    return out;
}

// ---- backend conversation ---------------------------------------------------

inline backends::ChatRequest build_qa_request(const decomposition::EntityGraph& graph,
                                              const QAGenConfig& cfg,
                                              const std::string& model_id) {
    backends::ChatRequest req;
    req.model_id = model_id;
    req.messages.push_back({backends::Role::system,
                            {backends::MessagePart::text_part(prompts::qa_instruction(
                                cfg.min_questions, cfg.max_questions, cfg.choices))}});
    req.messages.push_back(
        {backends::Role::user,
         {backends::MessagePart::text_part(
             prompts::qa_user(decomposition::graph_to_json(graph).dump()))}});
    return req;
}

namespace detail {

inline std::vector<QATuple> parse_questions(const std::string& response) {
    const auto j = decomposition::extract_json_block(response);
    std::vector<QATuple> out;
    try {
        for (const auto& qj : j.at("questions")) {
            QATuple q;
            q.question_text = qj.at("question").get<std::string>();
            for (const auto& c : qj.at("choices")) q.choices.push_back(c.get<std::string>());
            q.answer_index = qj.at("answer_index").get<int>();
            for (const auto& id : qj.at("covered_elements"))
                q.covered_elements.insert(id.get<int>());
            const std::string aspect = qj.at("aspect").get<std::string>();
            auto parsed = aspect_from_name(aspect);
            if (!parsed) throw ValidationError("unknown aspect '" + aspect + "'");
            q.aspect = *parsed;
            out.push_back(std::move(q));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed question set: ") + e.what());
    }
    return out;
}

inline void renumber(std::vector<QATuple>& tuples) {
    int id = 1;
    for (auto& q : tuples) q.question_id = id++;
}

}  // namespace detail

// Single-pass in-context generation followed by targeted repair: only the
// violating tuples are regenerated, up to cfg.max_repair_rounds times.
inline QASet generate_qa(const decomposition::EntityGraph& graph, backends::ChatBackend& backend,
                         const QAGenConfig& cfg = {}) {
    validate_config(cfg);
    {
        const auto graph_violations = decomposition::validate_graph(graph);
        if (!graph_violations.empty())
            throw ValidationError("refusing to generate questions for an invalid graph: " +
                                  format_violations(graph_violations));
    }

    backends::ChatRequest req = build_qa_request(graph, cfg, backend.profile().model_id);
    QASet set;
    set.graph = graph;
    std::string problems;

    for (int round = 0; round <= cfg.max_repair_rounds; ++round) {
        const std::string response = backend.complete(req);
        std::vector<QATuple> incoming;
        try {
            incoming = detail::parse_questions(response);
        } catch (const ValidationError& e) {
            problems = e.what();
            req.messages.push_back(
                {backends::Role::assistant, {backends::MessagePart::text_part(response)}});
            req.messages.push_back({backends::Role::user,
                                    {backends::MessagePart::text_part(
                                        "Your output was rejected: " + problems +
                                        ". Emit the corrected JSON object only.")}});
            continue;
        }

        // merge: keep prior valid tuples, append incoming valid ones; drop
        // per-tuple violators
        std::vector<QATuple> merged = std::move(set.tuples);
        std::vector<std::string> tuple_problems;
        for (auto& q : incoming) {
            q.question_id = static_cast<int>(merged.size()) + 1;
            const auto violations = validate_tuple(q, graph);
            if (violations.empty() && static_cast<int>(merged.size()) < cfg.max_questions)
                merged.push_back(std::move(q));
            else if (!violations.empty())
                tuple_problems.push_back(format_violations(violations));
        }
        detail::renumber(merged);
        set.tuples = std::move(merged);

        auto remaining = validate_qaset(set);
        if (remaining.empty() && static_cast<int>(set.tuples.size()) >= cfg.min_questions)
            return set;

        std::string ask = "The question set is not acceptable yet. ";
        if (!tuple_problems.empty()) {
            ask += "Rejected questions: ";
            for (std::size_t i = 0; i < tuple_problems.size(); ++i)
                ask += (i ? "; " : "") + tuple_problems[i];
            ask += ". ";
        }
        if (!remaining.empty()) ask += "Outstanding problems: " + format_violations(remaining) + ". ";
        if (static_cast<int>(set.tuples.size()) < cfg.min_questions)
            ask += "Only " + std::to_string(set.tuples.size()) + " of the required " +
                   std::to_string(cfg.min_questions) + " questions are valid. ";
        ask += "Emit additional corrected questions as the same JSON shape.";
        problems = ask;

        req.messages.push_back(
            {backends::Role::assistant, {backends::MessagePart::text_part(response)}});
        req.messages.push_back({backends::Role::user, {backends::MessagePart::text_part(ask)}});
    }
    throw ValidationError("question generation failed after " +
                          std::to_string(cfg.max_repair_rounds + 1) + " rounds: " + problems);
}

// ---- on-disk cache keyed by prompt hash -------------------------------------

inline nlohmann::json qaset_to_json(const QASet& s) {
    nlohmann::json j;
    j["version"] = prompts::kPromptAssetVersion;
    j["prompt_text"] = s.graph.prompt_text;
    j["graph"] = decomposition::graph_to_json(s.graph);
    j["questions"] = nlohmann::json::array();
    for (const auto& q : s.tuples) {
        nlohmann::json qj;
        qj["question_id"] = q.question_id;
        qj["question"] = q.question_text;
        qj["choices"] = q.choices;
        qj["answer_index"] = q.answer_index;
        qj["covered_elements"] = q.covered_elements;
        qj["aspect"] = aspect_name(q.aspect);
        j["questions"].push_back(std::move(qj));
    }
    return j;
}

inline QASet qaset_from_json(const nlohmann::json& j) {
    QASet s;
    try {
        s.graph = decomposition::graph_from_json(j.at("graph"),
                                                 j.at("prompt_text").get<std::string>());
        for (const auto& qj : j.at("questions")) {
            QATuple q;
            q.question_id = qj.at("question_id").get<int>();
            q.question_text = qj.at("question").get<std::string>();
            for (const auto& c : qj.at("choices")) q.choices.push_back(c.get<std::string>());
            q.answer_index = qj.at("answer_index").get<int>();
            for (const auto& id : qj.at("covered_elements"))
                q.covered_elements.insert(id.get<int>());
            auto aspect = aspect_from_name(qj.at("aspect").get<std::string>());
            if (!aspect) throw ValidationError("unknown aspect in cached QA set");
            q.aspect = *aspect;
            s.tuples.push_back(std::move(q));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed cached QA set: ") + e.what());
    }
    return s;
}

inline std::filesystem::path cache_path(const std::filesystem::path& dir,
                                        const std::string& prompt) {
    return dir / (to_hex16(fnv1a64(prompt)) + ".json");
}

inline void save_cached_qaset(const std::filesystem::path& dir, const QASet& s) {
    write_file(cache_path(dir, s.graph.prompt_text), qaset_to_json(s).dump(2) + "\n");
}

// Returns the cached set when present, same prompt, and same prompt-asset
// version; anything else misses.
inline std::optional<QASet> load_cached_qaset(const std::filesystem::path& dir,
                                              const std::string& prompt) {
    const auto path = cache_path(dir, prompt);
    if (!std::filesystem::exists(path)) return std::nullopt;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (j.value("version", "") != prompts::kPromptAssetVersion) return std::nullopt;
    if (j.value("prompt_text", "") != prompt) return std::nullopt;
    return qaset_from_json(j);
}

}  // namespace t2v::qagen
