#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "lineage/param_scale.hpp"

namespace lineage::testing {

struct ScaleCase {
    std::string_view model_id;
    std::optional<double> parameters;
    analytics::ScaleBucket bucket;
    std::size_t matches;
};

// Handwritten expectations for the size-token rule.
inline constexpr std::array<ScaleCase, 20> kScaleCases{{
    {"Qwen/Qwen2.5-14B-Instruct", 14e9, analytics::ScaleBucket::large, 1},
    {"meta-llama/Llama-3.1-8B", 8e9, analytics::ScaleBucket::medium, 1},
    {"TinyLlama/TinyLlama-1.1B-Chat-v1.0", 1.1e9, analytics::ScaleBucket::medium, 1},
    {"Qwen/Qwen2.5-0.5B", 0.5e9, analytics::ScaleBucket::small, 1},
    {"HuggingFaceTB/SmolLM2-135M", 135e6, analytics::ScaleBucket::small, 1},
    {"openai-community/gpt2", std::nullopt, analytics::ScaleBucket::unknown, 0},
    {"google-bert/bert-base-uncased", std::nullopt, analytics::ScaleBucket::unknown, 0},
    {"mistralai/Mistral-7B-v0.1", 7e9, analytics::ScaleBucket::medium, 1},
    {"org/model-10B", 10e9, analytics::ScaleBucket::medium, 1},
    {"org/model-10.5b", 10.5e9, analytics::ScaleBucket::large, 1},
    {"org/model-1B", 1e9, analytics::ScaleBucket::medium, 1},
    {"org/model-999M", 999e6, analytics::ScaleBucket::small, 1},
    {"org/merge-7B-x-13B", 13e9, analytics::ScaleBucket::large, 2},
    {"org/model_7B", 7e9, analytics::ScaleBucket::medium, 1},
    {"org/7Bmodel", std::nullopt, analytics::ScaleBucket::unknown, 0},
    {"unsloth/Llama-3.3-70B-Instruct-GGUF", 70e9, analytics::ScaleBucket::large, 1},
    {"org/encoder-1.5M", 1.5e6, analytics::ScaleBucket::small, 1},
    {"org/tiny-3m", 3e6, analytics::ScaleBucket::small, 1},
    {"mistralai/Mixtral-8x7B-v0.1", std::nullopt, analytics::ScaleBucket::unknown, 0},
    {"org/model-3B.gguf", std::nullopt, analytics::ScaleBucket::unknown, 0},
}};

}  // namespace lineage::testing
