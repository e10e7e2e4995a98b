#include "lineage/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace lineage::ingest {

namespace {

using nlohmann::json;

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string{text.substr(first, last - first + 1)};
}

const json* find_first(const json& obj, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        const auto it = obj.find(key);
        if (it != obj.end() && !it->is_null()) {
            return &*it;
        }
    }
    return nullptr;
}

// Scalars become one-element lists; non-string array members are dropped.
// Empty strings are kept so that graph cleaning can count them.
std::optional<std::vector<std::string>> string_list(const json* value) {
    if (value == nullptr) {
        return std::nullopt;
    }
    if (value->is_string()) {
        return std::vector<std::string>{trim(value->get_ref<const std::string&>())};
    }
    if (value->is_array()) {
        std::vector<std::string> out;
        for (const auto& item : *value) {
            if (item.is_string()) {
                out.push_back(trim(item.get_ref<const std::string&>()));
            }
        }
        return out;
    }
    return std::nullopt;
}

const json* nested(const json& obj, std::initializer_list<const char*> path) {
    const json* cur = &obj;
    for (const char* key : path) {
        if (!cur->is_object()) {
            return nullptr;
        }
        const auto it = cur->find(key);
        if (it == cur->end() || it->is_null()) {
            return nullptr;
        }
        cur = &*it;
    }
    return cur;
}

}  // namespace

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::not_an_object: return "not_an_object";
        case RejectReason::missing_model_id: return "missing_model_id";
        case RejectReason::missing_created_at: return "missing_created_at";
        case RejectReason::bad_timestamp: return "bad_timestamp";
    }
    return "unknown";
}

RecordRejected::RecordRejected(RejectReason reason)
    : DataError(to_string(reason)), reason_(reason) {}

const char* to_string(Source source) {
    return source == Source::live_api ? "live_api" : "offline_dump";
}

std::optional<std::vector<std::string>> ModelRecord::card_base() const {
    if (!card_base_model && !card_data_base_model) {
        return std::nullopt;
    }
    std::vector<std::string> out;
    for (const auto* list : {&card_base_model, &card_data_base_model}) {
        if (!*list) {
            continue;
        }
        for (const auto& value : **list) {
            if (std::find(out.begin(), out.end(), value) == out.end()) {
                out.push_back(value);
            }
        }
    }
    return out;
}

ModelRecord normalize(const json& raw) {
    if (!raw.is_object()) {
        throw RecordRejected{RejectReason::not_an_object};
    }

    ModelRecord record;
    const json* id = find_first(raw, {"model_id", "id", "modelId"});
    if (id == nullptr || !id->is_string()) {
        throw RecordRejected{RejectReason::missing_model_id};
    }
    record.model_id = trim(id->get_ref<const std::string&>());
    if (record.model_id.empty()) {
        throw RecordRejected{RejectReason::missing_model_id};
    }

    const json* created = find_first(raw, {"created_at", "createdAt", "created"});
    if (created == nullptr) {
        throw RecordRejected{RejectReason::missing_created_at};
    }
    if (!created->is_string()) {
        throw RecordRejected{RejectReason::bad_timestamp};
    }
    const auto ts = parse_timestamp(created->get_ref<const std::string&>());
    if (!ts) {
        throw RecordRejected{RejectReason::bad_timestamp};
    }
    record.created_at = *ts;

    if (const json* tags = find_first(raw, {"tags"}); tags != nullptr && tags->is_array()) {
        std::unordered_set<std::string> seen;
        for (const auto& tag : *tags) {
            if (!tag.is_string()) {
                continue;
            }
            auto value = trim(tag.get_ref<const std::string&>());
            if (!value.empty() && seen.insert(value).second) {
                record.tags.push_back(std::move(value));
            }
        }
    }

    const json* peft = find_first(raw, {"config_peft_base_model_name_or_path"});
    if (peft == nullptr) {
        peft = nested(raw, {"config", "peft", "base_model_name_or_path"});
    }
    if (peft != nullptr && peft->is_string()) {
        record.peft_base = trim(peft->get_ref<const std::string&>());
    }

    record.card_base_model = string_list(find_first(raw, {"card_base_model"}));

    const json* card_data = find_first(raw, {"card_data.base_model"});
    if (card_data == nullptr) {
        card_data = nested(raw, {"card_data", "base_model"});
    }
    if (card_data == nullptr) {
        card_data = nested(raw, {"cardData", "base_model"});
    }
    record.card_data_base_model = string_list(card_data);

    if (const auto it = raw.find("raw_field_count"); it != raw.end() && it->is_number_integer()) {
        record.raw_field_count = it->get<int>();
    } else {
        record.raw_field_count = static_cast<int>(raw.size());
    }
    return record;
}

json to_json(const ModelRecord& record) {
    json out = json::object();
    out["model_id"] = record.model_id;
    out["created_at"] = format_timestamp(record.created_at);
    out["tags"] = record.tags;
    if (record.peft_base) {
        out["config_peft_base_model_name_or_path"] = *record.peft_base;
    }
    if (record.card_base_model) {
        out["card_base_model"] = *record.card_base_model;
    }
    if (record.card_data_base_model) {
        out["card_data"] = json{{"base_model", *record.card_data_base_model}};
    }
    out["raw_field_count"] = record.raw_field_count;
    return out;
}

void Snapshot::merge(ModelRecord record) {
    if (record.before_platform_floor()) {
        ++stats.before_platform_floor;
    }
    auto [it, inserted] = records.try_emplace(record.model_id);
    if (!inserted) {
        ++stats.duplicates;
    }
    it->second = std::move(record);
}

Snapshot read_dump(const std::filesystem::path& path, Strictness strictness) {
    std::ifstream in{path};
    if (!in) {
        throw DataError{fmt::format("cannot read dump '{}'", path.string())};
    }

    Snapshot snapshot;
    snapshot.source = Source::offline_dump;
    snapshot.retrieved_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());

    auto skip = [&](std::size_t line_no, const std::string& reason) {
        if (strictness == Strictness::strict) {
            throw DataError{fmt::format("{}:{}: rejected ({})", path.string(), line_no, reason)};
        }
        ++snapshot.stats.skipped;
        ++snapshot.stats.skipped_by_reason[reason];
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
            continue;
        }
        ++snapshot.stats.rows_read;
        json raw = json::parse(line, nullptr, false);
        if (raw.is_discarded()) {
            skip(line_no, "malformed_json");
            continue;
        }
        try {
            snapshot.merge(normalize(raw));
        } catch (const RecordRejected& e) {
            skip(line_no, to_string(e.reason()));
        }
    }
    if (in.bad()) {
        throw DataError{fmt::format("error while reading dump '{}'", path.string())};
    }

    if (snapshot.stats.duplicates > 0) {
        spdlog::warn("{}: {} duplicate model ids collapsed (last row wins)", path.string(),
                     snapshot.stats.duplicates);
    }
    if (snapshot.stats.skipped > 0) {
        spdlog::warn("{}: skipped {} rows", path.string(), snapshot.stats.skipped);
    }
    if (snapshot.stats.before_platform_floor > 0) {
        spdlog::warn("{}: {} records created before the platform floor {}", path.string(),
                     snapshot.stats.before_platform_floor, format_timestamp(platform_floor()));
    }
    return snapshot;
}

void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw DataError{fmt::format("cannot write snapshot '{}'", path.string())};
    }
    for (const auto& [id, record] : snapshot.records) {
        out << to_json(record).dump() << '\n';
    }
    if (!out) {
        throw DataError{fmt::format("error while writing snapshot '{}'", path.string())};
    }
}

}  // namespace lineage::ingest
