#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "lineage/ingest.hpp"

namespace lineage::ingest {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string target;  // /path?query
};

Url split_url(const std::string& url) {
    static const std::regex pattern{R"(^(https?://[^/?#]+)([^#]*)$)", std::regex::icase};
    std::smatch m;
    if (!std::regex_match(url, m, pattern)) {
        throw FetchError{fmt::format("unsupported endpoint url '{}'", url)};
    }
    Url out{m[1].str(), m[2].str()};
    if (out.target.empty()) {
        out.target = "/";
    }
    return out;
}

std::string first_page_url(const FetchOptions& options) {
    const char sep = options.endpoint_url.find('?') == std::string::npos ? '?' : '&';
    return fmt::format("{}{}limit={}&full=true&config=true&cardData=true", options.endpoint_url, sep,
                       options.page_size);
}

// Extracts the rel="next" target from an RFC 8288 Link header.
std::optional<std::string> next_link(const std::string& header, const std::string& origin) {
    static const std::regex entry{R"re(<([^>]*)>\s*;[^,]*rel\s*=\s*"?next"?)re", std::regex::icase};
    std::smatch m;
    if (!std::regex_search(header, m, entry)) {
        return std::nullopt;
    }
    std::string target = m[1].str();
    if (!target.empty() && target.front() == '/') {
        target = origin + target;
    }
    return target;
}

void write_file_atomically(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        out << contents;
        if (!out) {
            throw FetchError{fmt::format("cannot write checkpoint '{}'", tmp.string())};
        }
    }
    fs::rename(tmp, path);
}

class Checkpointer {
public:
    explicit Checkpointer(std::optional<fs::path> dir) : dir_(std::move(dir)) {
        if (dir_) {
            fs::create_directories(*dir_);
        }
    }

    void page_done(const std::vector<ModelRecord>& page, const std::optional<std::string>& next,
                   std::size_t pages_done) {
        if (!dir_) {
            return;
        }
        {
            std::ofstream out{*dir_ / "records.jsonl", std::ios::binary | std::ios::app};
            for (const auto& record : page) {
                out << to_json(record).dump() << '\n';
            }
            if (!out) {
                throw FetchError{"cannot append checkpoint records"};
            }
        }
        json cursor{{"pages_done", pages_done}, {"complete", !next.has_value()}};
        cursor["next"] = next ? json(*next) : json(nullptr);
        write_file_atomically(*dir_ / "cursor.json", cursor.dump(2) + "\n");
    }

private:
    std::optional<fs::path> dir_;
};

class PageGetter {
public:
    explicit PageGetter(const FetchOptions& options) : options_(options) {
        if (options.rate_limit > 0) {
            interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(1.0 / options.rate_limit));
        }
    }

    // Returns the response, or nullopt when all attempts failed.
    std::optional<httplib::Result> get(const std::string& url) {
        const Url parts = split_url(url);
        for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
            if (attempt > 0 && options_.retry_backoff_ms > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(attempt * options_.retry_backoff_ms));
            }
            throttle();
            httplib::Client client{parts.origin};
            client.set_connection_timeout(options_.timeout_seconds, 0);
            client.set_read_timeout(options_.timeout_seconds, 0);
            client.set_follow_location(true);
            auto result = client.Get(parts.target, {{"Accept", "application/json"}});
            if (result && result->status == 200) {
                return result;
            }
            if (result) {
                spdlog::warn("GET {} -> HTTP {} (attempt {}/{})", url, result->status, attempt + 1,
                             options_.max_retries + 1);
            } else {
                spdlog::warn("GET {} failed: {} (attempt {}/{})", url, httplib::to_string(result.error()),
                             attempt + 1, options_.max_retries + 1);
            }
        }
        return std::nullopt;
    }

private:
    void throttle() {
        if (interval_.count() == 0) {
            return;
        }
        const auto now = std::chrono::steady_clock::now();
        if (last_request_ && now < *last_request_ + interval_) {
            std::this_thread::sleep_until(*last_request_ + interval_);
        }
        last_request_ = std::chrono::steady_clock::now();
    }

    const FetchOptions& options_;
    std::chrono::steady_clock::duration interval_{0};
    std::optional<std::chrono::steady_clock::time_point> last_request_;
};

}  // namespace

std::string default_endpoint() {
    if (const char* env = std::getenv("LINEAGE_HUB_ENDPOINT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "https://huggingface.co/api/models";
}

std::optional<Checkpoint> load_checkpoint(const fs::path& dir) {
    const fs::path cursor_path = dir / "cursor.json";
    std::ifstream cursor_in{cursor_path};
    if (!cursor_in) {
        return std::nullopt;
    }
    const json cursor = json::parse(cursor_in, nullptr, false);
    if (cursor.is_discarded() || !cursor.is_object()) {
        throw FetchError{fmt::format("corrupt checkpoint '{}'", cursor_path.string())};
    }
    Checkpoint cp;
    cp.pages_done = cursor.value("pages_done", std::size_t{0});
    cp.complete = cursor.value("complete", false);
    if (const auto it = cursor.find("next"); it != cursor.end() && it->is_string()) {
        cp.next_cursor = it->get<std::string>();
    }
    std::ifstream records_in{dir / "records.jsonl"};
    std::string line;
    while (std::getline(records_in, line)) {
        if (line.empty()) {
            continue;
        }
        const json raw = json::parse(line, nullptr, false);
        if (raw.is_discarded()) {
            continue;  // torn append from an interrupted write
        }
        cp.records.push_back(normalize(raw));
    }
    return cp;
}

Snapshot fetch_live(const FetchOptions& options) {
    if (options.page_size == 0) {
        throw FetchError{"page size must be positive"};
    }

    Snapshot snapshot;
    snapshot.source = Source::live_api;
    snapshot.retrieved_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());

    const auto cap_reached = [&] {
        return options.max_records && snapshot.records.size() >= *options.max_records;
    };

    std::optional<std::string> cursor = first_page_url(options);
    std::size_t pages_done = 0;
    if (options.checkpoint_dir) {
        if (auto cp = load_checkpoint(*options.checkpoint_dir)) {
            for (auto& record : cp->records) {
                if (cap_reached() && !snapshot.records.contains(record.model_id)) {
                    break;
                }
                snapshot.merge(std::move(record));
            }
            pages_done = cp->pages_done;
            cursor = cp->complete ? std::nullopt : cp->next_cursor;
            spdlog::info("resuming from checkpoint: {} pages, {} records", pages_done, snapshot.records.size());
        }
    }
    if (options.resume_cursor) {
        cursor = options.resume_cursor;
    }

    Checkpointer checkpointer{options.checkpoint_dir};
    PageGetter getter{options};

    while (cursor && !cap_reached()) {
        const auto response = getter.get(*cursor);
        if (!response) {
            throw FetchError{fmt::format("giving up on page {} after {} attempts ({} records kept in checkpoint)",
                                         *cursor, options.max_retries + 1, snapshot.records.size())};
        }
        const auto& res = **response;
        std::optional<std::string> next;
        if (res.has_header("Link")) {
            next = next_link(res.get_header_value("Link"), split_url(*cursor).origin);
        }

        std::vector<ModelRecord> page;
        const json body = json::parse(res.body, nullptr, false);
        if (body.is_discarded() || !body.is_array()) {
            ++snapshot.stats.malformed_pages;
            spdlog::warn("malformed page at {} skipped", *cursor);
        } else {
            for (const auto& raw : body) {
                ++snapshot.stats.rows_read;
                try {
                    ModelRecord record = normalize(raw);
                    if (cap_reached() && !snapshot.records.contains(record.model_id)) {
                        break;
                    }
                    page.push_back(record);
                    snapshot.merge(std::move(record));
                } catch (const RecordRejected& e) {
                    ++snapshot.stats.skipped;
                    ++snapshot.stats.skipped_by_reason[to_string(e.reason())];
                }
            }
        }
        ++pages_done;
        ++snapshot.stats.pages_fetched;
        checkpointer.page_done(page, next, pages_done);
        cursor = next;
    }
    return snapshot;
}

}  // namespace lineage::ingest
