#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "t2v/backends.hpp"
#include "t2v/common.hpp"
#include "t2v/prompts.hpp"

namespace t2v::decomposition {

enum class ElementKind {
    object,
    attribute,
    action,
    count,
    spatial_relation,
    temporal_relation,
    camera,
    style,
    global,
};

inline const char* kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::object: return "object";
        case ElementKind::attribute: return "attribute";
        case ElementKind::action: return "action";
        case ElementKind::count: return "count";
        case ElementKind::spatial_relation: return "spatial_relation";
        case ElementKind::temporal_relation: return "temporal_relation";
        case ElementKind::camera: return "camera";
        case ElementKind::style: return "style";
        case ElementKind::global: return "global";
    }
    return "object";
}

inline std::optional<ElementKind> kind_from_name(const std::string& s) {
    for (auto k : {ElementKind::object, ElementKind::attribute, ElementKind::action,
                   ElementKind::count, ElementKind::spatial_relation,
                   ElementKind::temporal_relation, ElementKind::camera, ElementKind::style,
                   ElementKind::global}) {
        if (s == kind_name(k)) return k;
    }
    return std::nullopt;
}

// Temporal-flavored kinds trigger the temporal-question coverage requirement.
inline bool is_temporal_kind(ElementKind k) {
    return k == ElementKind::action || k == ElementKind::temporal_relation ||
           k == ElementKind::camera;
}

struct SemanticElement {
    int element_id = 0;
    std::string surface_text;
    ElementKind kind = ElementKind::object;

    bool operator==(const SemanticElement&) const = default;
};

// Directed dependency: dependent hangs off head ((dog, a): the article
// attaches to the noun).
struct EntityTuple {
    int head = 0;
    int dependent = 0;

    bool operator==(const EntityTuple&) const = default;
};

struct EntityGraph {
    std::string prompt_text;
    std::vector<SemanticElement> elements;
    std::vector<EntityTuple> tuples;

    const SemanticElement* find(int element_id) const {
        for (const auto& e : elements)
            if (e.element_id == element_id) return &e;
        return nullptr;
    }

    bool has_temporal_element() const {
        for (const auto& e : elements)
            if (is_temporal_kind(e.kind)) return true;
        return false;
    }

    bool operator==(const EntityGraph&) const = default;
};

// Empty result iff all graph invariants hold.
inline std::vector<Violation> validate_graph(const EntityGraph& g) {
    std::vector<Violation> out;
    if (g.elements.empty()) out.push_back({"empty_graph", "no semantic elements"});

    std::set<int> ids;
    for (const auto& e : g.elements) {
        if (!ids.insert(e.element_id).second)
            out.push_back({"duplicate_element",
                           "element id " + std::to_string(e.element_id) + " appears twice"});
        if (trim(e.surface_text).empty())
            out.push_back({"empty_text",
                           "element " + std::to_string(e.element_id) + " has empty surface text"});
    }

    std::map<int, std::vector<int>> edges;  // head -> dependents
    for (const auto& t : g.tuples) {
        if (t.head == t.dependent) {
            out.push_back({"self_loop", "tuple (" + std::to_string(t.head) + ", " +
                                            std::to_string(t.dependent) + ") relates an element to itself"});
            continue;
        }
        bool ok = true;
        for (int id : {t.head, t.dependent}) {
            if (!ids.contains(id)) {
                out.push_back({"unknown_element", "tuple references missing element id " +
                                                      std::to_string(id)});
                ok = false;
            }
        }
        if (ok) edges[t.head].push_back(t.dependent);
    }

    // cycle check: iterative DFS with colors
    std::map<int, int> color;  // 0 white, 1 grey, 2 black
    bool cycle = false;
    for (int start : ids) {
        if (color[start]) continue;
        std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
        color[start] = 1;
        while (!stack.empty() && !cycle) {
            auto& [node, next] = stack.back();
            const auto& outs = edges[node];
            if (next < outs.size()) {
                const int child = outs[next++];
                if (color[child] == 1) {
                    cycle = true;
                } else if (color[child] == 0) {
                    color[child] = 1;
                    stack.emplace_back(child, 0);
                }
            } else {
                color[node] = 2;
                stack.pop_back();
            }
        }
        if (cycle) break;
    }
    if (cycle) out.push_back({"cycle", "dependency tuples form a cycle"});
    return out;
}

// Dependency rank: roots sit at depth 0, a dependent one below its deepest
// head. Recorded as metadata only; the alignment score stays plain accuracy.
inline std::map<int, int> compute_depths(const EntityGraph& g) {
    std::map<int, int> depth;
    for (const auto& e : g.elements) depth[e.element_id] = 0;
    for (std::size_t pass = 0; pass < g.elements.size(); ++pass) {
        bool changed = false;
        for (const auto& t : g.tuples) {
            if (!depth.contains(t.head) || !depth.contains(t.dependent)) continue;
            if (depth[t.dependent] < depth[t.head] + 1) {
                depth[t.dependent] = depth[t.head] + 1;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return depth;
}

inline nlohmann::json graph_to_json(const EntityGraph& g) {
    nlohmann::json j;
    j["prompt_text"] = g.prompt_text;
    j["elements"] = nlohmann::json::array();
    for (const auto& e : g.elements)
        j["elements"].push_back(
            {{"id", e.element_id}, {"text", e.surface_text}, {"kind", kind_name(e.kind)}});
    j["tuples"] = nlohmann::json::array();
    for (const auto& t : g.tuples) j["tuples"].push_back({t.head, t.dependent});
    return j;
}

inline EntityGraph graph_from_json(const nlohmann::json& j, const std::string& prompt_text) {
    EntityGraph g;
    g.prompt_text = prompt_text;
    try {
        for (const auto& ej : j.at("elements")) {
            SemanticElement e;
            e.element_id = ej.at("id").get<int>();
            e.surface_text = ej.at("text").get<std::string>();
            const std::string kind = ej.at("kind").get<std::string>();
            auto parsed = kind_from_name(kind);
            if (!parsed) throw ValidationError("unknown element kind '" + kind + "'");
            e.kind = *parsed;
            g.elements.push_back(std::move(e));
        }
        for (const auto& tj : j.value("tuples", nlohmann::json::array())) {
            if (!tj.is_array() || tj.size() != 2)
                throw ValidationError("tuple must be [head_id, dependent_id]");
            g.tuples.push_back({tj[0].get<int>(), tj[1].get<int>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed entity graph: ") + e.what());
    }
    return g;
}

// First JSON object embedded in a model response (tolerates prose and fences
// around it).
inline nlohmann::json extract_json_block(const std::string& response) {
    const std::size_t start = response.find('{');
    if (start == std::string::npos)
        throw ValidationError("no JSON object found in backend response");
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < response.size(); ++i) {
        const char c = response[i];
        if (in_string) {
            if (c == '\\')
                ++i;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        if (c == '{') ++depth;
        if (c == '}' && --depth == 0) {
            try {
                return nlohmann::json::parse(response.substr(start, i - start + 1));
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(std::string("invalid JSON in backend response: ") +
                                      e.what());
            }
        }
    }
    throw ValidationError("unbalanced JSON object in backend response");
}

struct DecomposeConfig {
    int max_attempts = 3;  // initial call plus up to 2 re-prompts
};

inline backends::ChatRequest build_decompose_request(const std::string& prompt,
                                                     const std::string& model_id) {
    backends::ChatRequest req;
    req.model_id = model_id;
    req.messages.push_back(
        {backends::Role::system,
         {backends::MessagePart::text_part(prompts::decomposition_instruction())}});
    req.messages.push_back(
        {backends::Role::user,
         {backends::MessagePart::text_part(prompts::decomposition_user(prompt))}});
    return req;
}

// Parse a prompt into a validated EntityGraph via the chat backend,
// re-prompting with the concrete violations up to cfg.max_attempts.
inline EntityGraph decompose(const std::string& prompt, backends::ChatBackend& backend,
                             const DecomposeConfig& cfg = {}) {
    if (trim(prompt).empty()) throw ValidationError("empty prompt");
    backends::ChatRequest req = build_decompose_request(prompt, backend.profile().model_id);

    std::string problems;
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        const std::string response = backend.complete(req);
        std::optional<EntityGraph> graph;
        try {
            graph = graph_from_json(extract_json_block(response), prompt);
            const auto violations = validate_graph(*graph);
            if (violations.empty()) return *graph;
            problems = format_violations(violations);
        } catch (const ValidationError& e) {
            problems = e.what();
        }
        req.messages.push_back(
            {backends::Role::assistant, {backends::MessagePart::text_part(response)}});
        req.messages.push_back({backends::Role::user,
                                {backends::MessagePart::text_part(
                                    "Your output was rejected: " + problems +
                                    ". Emit the corrected JSON object only.")}});
    }
    throw ValidationError("entity decomposition failed after " +
                          std::to_string(cfg.max_attempts) + " attempts: " + problems);
}

}  // namespace t2v::decomposition
