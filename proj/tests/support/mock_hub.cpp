#include "mock_hub.hpp"

#include <chrono>

#include <fmt/format.h>
#include <httplib.h>

namespace lineage::testing {

MockHub::MockHub(std::vector<nlohmann::json> records)
    : records_(std::move(records)), server_{std::make_unique<httplib::Server>()} {
    server_->Get("/api/models", [this](const httplib::Request& req, httplib::Response& res) {
        ++requests_;
        const std::size_t limit = req.has_param("limit") ? std::stoul(req.get_param_value("limit")) : 100;
        const std::size_t page = req.has_param("cursor") ? std::stoul(req.get_param_value("cursor")) : 0;
        {
            std::lock_guard lock{mutex_};
            log_.push_back(req.target);
            if (auto it = failures_.find(page); it != failures_.end() && it->second.first > 0) {
                --it->second.first;
                res.status = it->second.second;
                res.set_content("unavailable", "text/plain");
                return;
            }
        }
        const std::size_t begin = page * limit;
        const std::size_t end = std::min(records_.size(), begin + limit);
        if (end < records_.size()) {
            const std::string path = fmt::format("/api/models?limit={}&cursor={}", limit, page + 1);
            const std::string target = relative_links_ ? path : fmt::format("http://127.0.0.1:{}{}", port_, path);
            res.set_header("Link", fmt::format("<{}>; rel=\"next\"", target));
        }
        bool malformed = false;
        {
            std::lock_guard lock{mutex_};
            malformed = malformed_.contains(page);
        }
        if (malformed) {
            res.set_content("{\"truncated\": [", "application/json");
            return;
        }
        nlohmann::json body = nlohmann::json::array();
        for (std::size_t i = begin; i < end; ++i) {
            body.push_back(records_[i]);
        }
        res.set_content(body.dump(), "application/json");
    });
    port_ = server_->bind_to_any_port("127.0.0.1");
    thread_ = std::thread{[this] { server_->listen_after_bind(); }};
    while (!server_->is_running()) {
        std::this_thread::sleep_for(std::chrono::milliseconds{1});
    }
}

MockHub::~MockHub() {
    server_->stop();
    thread_.join();
}

std::string MockHub::endpoint() const {
    return fmt::format("http://127.0.0.1:{}/api/models", port_);
}

void MockHub::fail_page(std::size_t page, int times, int status) {
    std::lock_guard lock{mutex_};
    failures_[page] = {times, status};
}

void MockHub::malform_page(std::size_t page) {
    std::lock_guard lock{mutex_};
    malformed_[page] = true;
}

std::vector<std::string> MockHub::request_log() const {
    std::lock_guard lock{mutex_};
    return log_;
}

}  // namespace lineage::testing
