#pragma once

#include <string>

// Versioned prompt assets. The version string participates in the QA cache
// key, so editing any template here invalidates cached question sets.

namespace t2v::prompts {

inline constexpr const char* kPromptAssetVersion = "prompts-v1";

inline std::string decomposition_instruction() {
    return R"(You analyze prompts written for text-to-video generation.
Split the prompt into semantic elements and dependency tuples.

Output exactly one JSON object, nothing else:
{"elements": [{"id": 1, "text": "<phrase from the prompt>", "kind": "<kind>"}, ...],
 "tuples": [[head_id, dependent_id], ...]}

Kinds: object, attribute, action, count, spatial_relation, temporal_relation,
camera, style, global.

Rules:
- ids are consecutive integers starting at 1.
- a tuple [h, d] means element d depends on element h (an attribute depends on
  its noun, an action on its actor, a count on the counted object).
- head and dependent must differ, both must exist, and dependencies must not
  form a cycle.
- elements that scope the whole prompt (overall style, camera motion) use kind
  camera/style/global and may stay outside any tuple.

Example: "a red balloon floating over a city"
{"elements": [{"id": 1, "text": "balloon", "kind": "object"},
              {"id": 2, "text": "a", "kind": "count"},
              {"id": 3, "text": "red", "kind": "attribute"},
              {"id": 4, "text": "floating over a city", "kind": "action"},
              {"id": 5, "text": "city", "kind": "object"}],
 "tuples": [[1, 2], [1, 3], [1, 4], [4, 5]]}
)";
}

inline std::string decomposition_user(const std::string& prompt) {
    return "Prompt: " + prompt;
}

// Instruction block plus 3 curated in-context exemplars for single-pass
// question generation.
inline std::string qa_instruction(int min_questions, int max_questions, int choices) {
    std::string head = R"(You write multiple-choice questions that verify whether a generated video
matches its text prompt. You are given the prompt and its semantic elements
with dependency tuples.

Write between )" + std::to_string(min_questions) + " and " + std::to_string(max_questions) +
                       R"( questions. Each question has exactly )" + std::to_string(choices) +
                       R"( answer choices, one of which is correct for a faithful video.

Cover every non-global element at least once, spread questions evenly, and
include at least one temporal question (object trajectory, action order,
camera motion) whenever the prompt has actions, temporal relations or camera
directions. Mark each question with the element ids it covers and its aspect:
"spatial" for appearance/layout, "temporal" for anything about change over
time.

Output exactly one JSON object:
{"questions": [{"question": "...", "choices": ["...", ...], "answer_index": 0,
                "covered_elements": [1, 2], "aspect": "spatial"}, ...]}

)";
    head += R"(Example 1
Prompt: "a red balloon floating over a city"
Elements: 1 balloon (object), 2 a (count), 3 red (attribute), 4 floating over a city (action), 5 city (object)
Tuples: [1,2] [1,3] [1,4] [4,5]
{"questions": [
 {"question": "What color is the balloon?", "choices": ["red", "blue", "yellow", "green"], "answer_index": 0, "covered_elements": [3], "aspect": "spatial"},
 {"question": "How many balloons are there?", "choices": ["one", "two", "three", "none"], "answer_index": 0, "covered_elements": [1, 2], "aspect": "spatial"},
 {"question": "What is the balloon doing over the city?", "choices": ["floating", "popping", "deflating", "falling"], "answer_index": 0, "covered_elements": [4, 5], "aspect": "temporal"},
 {"question": "What is visible below the balloon?", "choices": ["a city", "a desert", "an ocean", "a forest"], "answer_index": 0, "covered_elements": [5], "aspect": "spatial"},
 {"question": "How does the balloon's position change over time?", "choices": ["it drifts above the city", "it stays pinned to the ground", "it sinks underwater", "it explodes immediately"], "answer_index": 0, "covered_elements": [1, 4], "aspect": "temporal"}
]}

Example 2
Prompt: "two dogs chasing a ball in a park, camera zooms in"
Elements: 1 dogs (object), 2 two (count), 3 chasing a ball (action), 4 ball (object), 5 park (object), 6 camera zooms in (camera)
Tuples: [1,2] [1,3] [3,4] [1,5]
{"questions": [
 {"question": "How many dogs appear?", "choices": ["two", "one", "three", "four"], "answer_index": 0, "covered_elements": [1, 2], "aspect": "spatial"},
 {"question": "What are the dogs doing?", "choices": ["chasing a ball", "sleeping", "eating", "swimming"], "answer_index": 0, "covered_elements": [3, 4], "aspect": "temporal"},
 {"question": "Where does the scene take place?", "choices": ["in a park", "in a kitchen", "on a beach", "in a stadium"], "answer_index": 0, "covered_elements": [5], "aspect": "spatial"},
 {"question": "How does the camera move?", "choices": ["it zooms in", "it pans left", "it stays static", "it tilts down"], "answer_index": 0, "covered_elements": [6], "aspect": "temporal"},
 {"question": "What object are the dogs after?", "choices": ["a ball", "a stick", "a frisbee", "a bone"], "answer_index": 0, "covered_elements": [4], "aspect": "spatial"}
]}

Example 3
Prompt: "an astronaut riding a horse on the moon, oil painting style"
Elements: 1 astronaut (object), 2 an (count), 3 riding a horse (action), 4 horse (object), 5 on the moon (spatial_relation), 6 moon (object), 7 oil painting style (style)
Tuples: [1,2] [1,3] [3,4] [1,5] [5,6]
{"questions": [
 {"question": "Who is riding the horse?", "choices": ["an astronaut", "a cowboy", "a knight", "a robot"], "answer_index": 0, "covered_elements": [1, 2, 3], "aspect": "spatial"},
 {"question": "What animal appears?", "choices": ["a horse", "a camel", "a dog", "an elephant"], "answer_index": 0, "covered_elements": [4], "aspect": "spatial"},
 {"question": "Where does the ride happen?", "choices": ["on the moon", "in a desert", "on a beach", "in a city"], "answer_index": 0, "covered_elements": [5, 6], "aspect": "spatial"},
 {"question": "What visual style does the video have?", "choices": ["oil painting", "photorealistic", "pixel art", "pencil sketch"], "answer_index": 0, "covered_elements": [7], "aspect": "spatial"},
 {"question": "What motion occurs during the video?", "choices": ["the astronaut rides the horse", "the astronaut stands still", "the horse sleeps", "the moon explodes"], "answer_index": 0, "covered_elements": [3], "aspect": "temporal"}
]}
)";
    return head;
}

inline std::string qa_user(const std::string& graph_json) {
    return "Generate the questions for this decomposition:\n" + graph_json;
}

inline std::string vqa_instruction() {
    return R"(You answer multiple-choice questions about a video. You are shown frames
sampled from the video in temporal order. Colored polylines, when present,
trace how tracked points moved over recent frames. Answer with the letter of
the best choice.)";
}

inline std::string vqa_text_only_instruction() {
    return R"(You answer multiple-choice questions about a video. You cannot see the
frames; instead you get a textual summary of the tracked motion. Answer with
the letter of the best choice.)";
}

// Binary quality classification used by the prompt-based semantic provider.
inline std::string semantic_quality_question() {
    return R"(Rate the visual quality of this video. Reply with only a number between 0
and 1: the probability that "good, high quality" describes it better than
"poor, low quality".)";
}

}  // namespace t2v::prompts
