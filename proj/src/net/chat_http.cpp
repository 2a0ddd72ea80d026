#include "userl/net/chat_http.hpp"

#include <httplib.h>

#include <thread>

#include "userl/core/errors.hpp"

namespace userl::net {

namespace {

std::unique_ptr<httplib::Client> make_client(const ChatEndpoint& endpoint, const SplitUrl& url) {
    auto client = std::make_unique<httplib::Client>(url.origin);
    client->set_connection_timeout(endpoint.timeout);
    client->set_read_timeout(endpoint.timeout);
    client->set_write_timeout(endpoint.timeout);
    if (!endpoint.api_key.empty()) client->set_bearer_token_auth(endpoint.api_key);
    return client;
}

}  // namespace

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || (url.compare(0, scheme_end, "http") != 0 &&
                                            url.compare(0, scheme_end, "https") != 0)) {
        throw std::invalid_argument("endpoint URL must start with http:// or https://: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

Json post_chat_completion(const ChatEndpoint& endpoint, const Json& body, const RetryPolicy& retry) {
    const auto url = split_url(endpoint.url);
    const std::string route = url.path + "/chat/completions";
    const std::string payload = body.dump();
    auto backoff = retry.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= retry.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto client = make_client(endpoint, url);
        auto res = client->Post(route, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw EndpointTimeout(endpoint.url + " answered HTTP " + std::to_string(res->status) + ": " +
                                  res->body.substr(0, 200));
        }
        auto parsed = Json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            last_error = "response is not a JSON object";
            continue;
        }
        return parsed;
    }
    throw EndpointTimeout(endpoint.url + " failed after " + std::to_string(retry.retries + 1) +
                          " attempts: " + last_error);
}

bool endpoint_reachable(const ChatEndpoint& endpoint) {
    const auto url = split_url(endpoint.url);
    auto client = make_client(endpoint, url);
    auto res = client->Get(url.path.empty() ? "/" : url.path + "/models");
    return static_cast<bool>(res);
}

std::string message_content(const Json& completion) {
    const auto& choices = completion.value("choices", Json::array());
    if (!choices.is_array() || choices.empty()) return {};
    const auto& message = choices[0].value("message", Json::object());
    const auto it = message.find("content");
    if (it == message.end() || !it->is_string()) return {};
    return it->get<std::string>();
}

}  // namespace userl::net
