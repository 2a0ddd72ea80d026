#pragma once

#include <chrono>
#include <string>

#include "userl/env/types.hpp"

namespace userl::net {

/// A chat-completions endpoint. `url` is the API base (".../v1"); requests
/// go to `url + "/chat/completions"`.
struct ChatEndpoint {
    std::string url;
    std::string model = "default";
    std::string api_key;
    std::chrono::milliseconds timeout{60000};
};

struct RetryPolicy {
    int retries = 2;
    std::chrono::milliseconds initial_backoff{500};
};

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // never ends with '/'
};

/// Throws std::invalid_argument for URLs without an http(s) scheme.
SplitUrl split_url(const std::string& url);

/// POSTs `body` to the endpoint's chat/completions route. Transport
/// failures and 5xx responses are retried with exponential backoff;
/// after the last retry EndpointTimeout is thrown. Other non-2xx statuses
/// throw EndpointTimeout immediately with the status in the message.
Json post_chat_completion(const ChatEndpoint& endpoint, const Json& body, const RetryPolicy& retry);

/// True when anything answers HTTP at the endpoint's base URL.
bool endpoint_reachable(const ChatEndpoint& endpoint);

/// Text of choices[0].message.content, or "" when null/absent.
std::string message_content(const Json& completion);

}  // namespace userl::net
