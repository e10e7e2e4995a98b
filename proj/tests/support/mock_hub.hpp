#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace lineage::testing {

/// In-process stand-in for the hub listing endpoint. Serves `records` in
/// pages of the requested limit, linking pages with a rel="next" header.
class MockHub {
public:
    explicit MockHub(std::vector<nlohmann::json> records);
    ~MockHub();
    MockHub(const MockHub&) = delete;
    MockHub& operator=(const MockHub&) = delete;

    std::string endpoint() const;

    /// The next `times` requests for page `page` answer with `status`.
    void fail_page(std::size_t page, int times, int status = 503);
    /// Page `page` answers 200 with a body that is not a JSON array.
    void malform_page(std::size_t page);
    /// Emit next links as paths without scheme and host.
    void use_relative_links(bool on) { relative_links_ = on; }

    std::size_t requests() const { return requests_.load(); }
    std::vector<std::string> request_log() const;

private:
    std::vector<nlohmann::json> records_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::size_t> requests_{0};
    std::atomic<bool> relative_links_{false};
    mutable std::mutex mutex_;
    std::map<std::size_t, std::pair<int, int>> failures_;
    std::map<std::size_t, bool> malformed_;
    std::vector<std::string> log_;
};

}  // namespace lineage::testing
