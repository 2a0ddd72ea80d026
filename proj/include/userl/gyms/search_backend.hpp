#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "userl/env/types.hpp"

namespace userl::gyms {

struct SearchHit {
    std::string title;
    std::string snippet;
};

/// Query string in, ranked title/snippet list out. Throws BackendUnavailable
/// when the backend cannot be reached; the failure is retryable.
class SearchBackend {
public:
    virtual ~SearchBackend() = default;
    virtual std::vector<SearchHit> search(std::string_view query) = 0;
};

/// Offline backend answering from a fixture map keyed by canonicalized
/// query. Unknown queries return the fallback list (empty by default).
///
///     {"results": {"<query>": [{"title": "...", "snippet": "..."}]},
///      "fallback": [...]}
class CannedSearchBackend final : public SearchBackend {
public:
    CannedSearchBackend() = default;
    explicit CannedSearchBackend(const Json& fixture);

    void add(std::string_view query, std::vector<SearchHit> hits);
    std::vector<SearchHit> search(std::string_view query) override;

private:
    std::map<std::string, std::vector<SearchHit>, std::less<>> results_;
    std::vector<SearchHit> fallback_;
};

std::string format_hits(const std::vector<SearchHit>& hits);

}  // namespace userl::gyms
