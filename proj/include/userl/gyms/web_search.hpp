#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "userl/gyms/search_backend.hpp"

namespace userl::gyms {

/// Live web search through the Serper API (google.serper.dev).
class SerperSearchBackend final : public SearchBackend {
public:
    SerperSearchBackend(std::string api_key, std::string url = "https://google.serper.dev/search",
                        int max_results = 5, std::chrono::milliseconds timeout = std::chrono::seconds(20));

    /// Reads SERPER_API_KEY; returns nullptr when it is unset.
    static std::unique_ptr<SerperSearchBackend> from_environment();

    std::vector<SearchHit> search(std::string_view query) override;

private:
    std::string api_key_;
    std::string url_;
    int max_results_;
    std::chrono::milliseconds timeout_;
};

}  // namespace userl::gyms
