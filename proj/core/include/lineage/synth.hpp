#pragma once

#include <cstddef>
#include <cstdint>

#include "lineage/ingest.hpp"
#include "lineage/timestamp.hpp"

namespace lineage::synth {

enum class Attachment { preferential, uniform };

/// Lineage growth model: models arrive one at a time at increasing
/// timestamps; each is a fresh base or derives from earlier models chosen
/// with weight in_degree + attractiveness (preferential) or uniformly.
struct SynthOptions {
    std::size_t nodes = 1000;
    std::uint64_t seed = 1;
    Attachment attachment = Attachment::preferential;
    double attractiveness = 1.0;
    double base_fraction = 0.05;
    double adapter_fraction = 0.30;
    double quantized_fraction = 0.20;
    double merge_fraction = 0.08;
    /// For merges: chance the second parent is a parent of the first one.
    double lineage_merge_fraction = 0.5;
    /// Adapters recorded through the peft config field instead of a tag.
    double peft_config_fraction = 0.1;
    /// Base models that also carry an (untyped) card base_model entry.
    double card_noise_fraction = 0.02;
    Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2022} / 6 / 1}};
    int span_days = 720;
};

ingest::Snapshot generate(const SynthOptions& options);

}  // namespace lineage::synth
