#include "lineage/synth.hpp"

#include <array>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace lineage::synth {

namespace {

// Portable draws: std::uniform_*_distribution output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::size_t below(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t draw = engine_();
        while (draw >= limit) {
            draw = engine_();
        }
        return static_cast<std::size_t>(draw % bound);
    }

private:
    std::mt19937_64 engine_;
};

constexpr std::array<const char*, 10> kScaleTokens{"", "-350M", "-0.5B", "-1.5B", "-3B", "-7B", "-8B", "-14B", "-32B", "-70B"};

}  // namespace

ingest::Snapshot generate(const SynthOptions& options) {
    if (options.span_days <= 0) {
        throw std::invalid_argument{"span_days must be positive"};
    }
    ingest::Snapshot snapshot;
    snapshot.source = ingest::Source::offline_dump;
    snapshot.retrieved_at = options.start + std::chrono::days{options.span_days};
    if (options.nodes == 0) {
        return snapshot;
    }

    Rng rng{options.seed};
    const std::int64_t span = static_cast<std::int64_t>(options.span_days) * kSecondsPerDay;
    const std::int64_t step = std::max<std::int64_t>(1, span / static_cast<std::int64_t>(options.nodes));

    std::vector<std::string> ids;
    std::vector<std::vector<std::size_t>> parents_of;
    // One entry per received child edge; sampling it is proportional to in-degree.
    std::vector<std::size_t> endpoints;
    ids.reserve(options.nodes);

    const auto pick = [&](std::size_t existing) -> std::size_t {
        if (options.attachment == Attachment::uniform || endpoints.empty()) {
            return rng.below(existing);
        }
        const double mass_base = options.attractiveness * static_cast<double>(existing);
        const double total = mass_base + static_cast<double>(endpoints.size());
        if (rng.uniform() * total < mass_base) {
            return rng.below(existing);
        }
        return endpoints[rng.below(endpoints.size())];
    };

    for (std::size_t i = 0; i < options.nodes; ++i) {
        ingest::ModelRecord record;
        record.model_id = fmt::format("org{:02}/model-{:06}{}", rng.below(40), i, kScaleTokens[rng.below(kScaleTokens.size())]);
        const auto jitter = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(step - 1 > 0 ? step - 1 : 0));
        record.created_at = options.start + std::chrono::seconds{static_cast<std::int64_t>(i) * step + jitter};
        record.tags = {"transformers", "safetensors"};

        std::vector<std::size_t> parents;
        const bool base = i == 0 || rng.uniform() < options.base_fraction;
        if (base) {
            if (i > 0 && rng.uniform() < options.card_noise_fraction) {
                record.card_base_model = std::vector<std::string>{ids[rng.below(i)]};
            }
        } else {
            const double u = rng.uniform();
            const char* relation = "finetune";
            if (u < options.merge_fraction) {
                relation = "merge";
            } else if (u < options.merge_fraction + options.quantized_fraction) {
                relation = "quantized";
            } else if (u < options.merge_fraction + options.quantized_fraction + options.adapter_fraction) {
                relation = "adapter";
            }

            parents.push_back(pick(i));
            if (std::string_view{relation} == "merge" && i > 1) {
                const auto& grand = parents_of[parents[0]];
                std::size_t second = parents[0];
                if (!grand.empty() && rng.uniform() < options.lineage_merge_fraction) {
                    second = grand[rng.below(grand.size())];
                } else {
                    for (int attempt = 0; attempt < 8 && second == parents[0]; ++attempt) {
                        second = pick(i);
                    }
                }
                if (second != parents[0]) {
                    parents.push_back(second);
                }
            }

            if (std::string_view{relation} == "adapter" && rng.uniform() < options.peft_config_fraction) {
                record.peft_base = ids[parents[0]];
            } else {
                for (const std::size_t p : parents) {
                    record.tags.push_back(fmt::format("base_model:{}:{}", relation, ids[p]));
                }
            }
            for (const std::size_t p : parents) {
                endpoints.push_back(p);
            }
        }
        record.raw_field_count = 28;
        ids.push_back(record.model_id);
        parents_of.push_back(std::move(parents));
        snapshot.merge(std::move(record));
    }
    return snapshot;
}

}  // namespace lineage::synth
