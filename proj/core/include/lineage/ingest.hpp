#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lineage/errors.hpp"
#include "lineage/timestamp.hpp"

namespace lineage::ingest {

/// One hub model's metadata row, reduced to the fields lineage extraction needs.
struct ModelRecord {
    std::string model_id;
    Timestamp created_at{};
    std::vector<std::string> tags;
    /// config_peft_base_model_name_or_path
    std::optional<std::string> peft_base;
    /// Values under card_base_model, scalars lifted to one-element lists.
    std::optional<std::vector<std::string>> card_base_model;
    /// Values under card_data.base_model, scalars lifted to one-element lists.
    std::optional<std::vector<std::string>> card_data_base_model;
    int raw_field_count = 0;

    /// Union of both card fields in first-seen order, or nullopt when neither is present.
    std::optional<std::vector<std::string>> card_base() const;

    bool before_platform_floor() const { return created_at < platform_floor(); }

    bool operator==(const ModelRecord&) const = default;
};

/// Reason codes reported when a raw row cannot become a ModelRecord.
enum class RejectReason { not_an_object, missing_model_id, missing_created_at, bad_timestamp };

const char* to_string(RejectReason reason);

class RecordRejected : public DataError {
public:
    explicit RecordRejected(RejectReason reason);
    RejectReason reason() const noexcept { return reason_; }

private:
    RejectReason reason_;
};

/// Turns one raw metadata object into a ModelRecord. Throws RecordRejected.
ModelRecord normalize(const nlohmann::json& raw);

/// Canonical JSON form of a record; normalize(to_json(r)) == r.
nlohmann::json to_json(const ModelRecord& record);

enum class Source { live_api, offline_dump };

const char* to_string(Source source);

struct IngestStats {
    std::size_t rows_read = 0;
    std::size_t duplicates = 0;
    std::size_t skipped = 0;
    std::map<std::string, std::size_t> skipped_by_reason;
    std::size_t before_platform_floor = 0;
    std::size_t malformed_pages = 0;
    std::size_t pages_fetched = 0;
};

struct Snapshot {
    /// Keyed and therefore iterated by model_id.
    std::map<std::string, ModelRecord> records;
    Timestamp retrieved_at{};
    Source source = Source::offline_dump;
    IngestStats stats;

    /// Adds a record, replacing any earlier row with the same id (last-seen wins).
    void merge(ModelRecord record);
};

enum class Strictness { strict, lenient };

/// Reads a newline-delimited JSON dump. Blank lines are ignored.
/// Strict mode throws DataError naming the first bad line; lenient mode skips and counts.
Snapshot read_dump(const std::filesystem::path& path, Strictness strictness);

/// Writes records as NDJSON sorted by model_id; identical input gives identical bytes.
void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Live hub client

struct FetchOptions {
    /// Full URL of the model listing, e.g. https://huggingface.co/api/models
    std::string endpoint_url;
    std::size_t page_size = 1000;
    /// Requests per second; <= 0 disables throttling.
    double rate_limit = 5.0;
    /// URL of the next page to fetch; overrides any checkpoint cursor.
    std::optional<std::string> resume_cursor;
    std::optional<std::size_t> max_records;
    /// Attempts per page beyond the first.
    int max_retries = 3;
    /// Delay before retry k is k * retry_backoff_ms.
    int retry_backoff_ms = 500;
    /// When set, completed pages and the next cursor are persisted here and
    /// picked up again on the next call.
    std::optional<std::filesystem::path> checkpoint_dir;
    int timeout_seconds = 30;
};

class FetchError : public DataError {
public:
    using DataError::DataError;
};

/// Pages through the hub model listing until exhausted or max_records distinct
/// ids are collected. Throws FetchError when a page keeps failing; completed
/// pages remain in the checkpoint.
Snapshot fetch_live(const FetchOptions& options);

/// Checkpoint layout inside FetchOptions::checkpoint_dir.
struct Checkpoint {
    std::optional<std::string> next_cursor;
    std::size_t pages_done = 0;
    bool complete = false;
    std::vector<ModelRecord> records;
};

std::optional<Checkpoint> load_checkpoint(const std::filesystem::path& dir);

/// Default endpoint, taken from LINEAGE_HUB_ENDPOINT when set.
std::string default_endpoint();

}  // namespace lineage::ingest
