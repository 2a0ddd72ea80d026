#include "userl/gyms/web_search.hpp"

#include <httplib.h>

#include <cstdlib>

#include "userl/core/errors.hpp"
#include "userl/net/chat_http.hpp"

namespace userl::gyms {

SerperSearchBackend::SerperSearchBackend(std::string api_key, std::string url, int max_results,
                                         std::chrono::milliseconds timeout)
    : api_key_(std::move(api_key)), url_(std::move(url)), max_results_(max_results), timeout_(timeout) {
    net::split_url(url_);
}

std::unique_ptr<SerperSearchBackend> SerperSearchBackend::from_environment() {
    const char* key = std::getenv("SERPER_API_KEY");
    if (key == nullptr || *key == '\0') return nullptr;
    return std::make_unique<SerperSearchBackend>(key);
}

std::vector<SearchHit> SerperSearchBackend::search(std::string_view query) {
    const auto url = net::split_url(url_);
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    const httplib::Headers headers{{"X-API-KEY", api_key_}};
    const Json body{{"q", std::string(query)}, {"num", max_results_}};
    auto res = client.Post(url.path.empty() ? "/" : url.path, headers, body.dump(), "application/json");
    if (!res) throw BackendUnavailable("search backend unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw BackendUnavailable("search backend answered HTTP " + std::to_string(res->status));
    const auto parsed = Json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw BackendUnavailable("search backend returned invalid JSON");
    std::vector<SearchHit> hits;
    for (const auto& item : parsed.value("organic", Json::array())) {
        if (static_cast<int>(hits.size()) >= max_results_) break;
        hits.push_back({item.value("title", std::string{}), item.value("snippet", std::string{})});
    }
    return hits;
}

}  // namespace userl::gyms
