#include "userl/gyms/search_backend.hpp"

#include "userl/core/errors.hpp"
#include "userl/core/text.hpp"

namespace userl::gyms {

namespace {

std::vector<SearchHit> hits_from_json(const Json& arr) {
    std::vector<SearchHit> hits;
    if (!arr.is_array()) throw SchemaError("search results must be a list");
    for (const auto& h : arr) {
        hits.push_back({h.value("title", std::string{}), h.value("snippet", std::string{})});
    }
    return hits;
}

}  // namespace

CannedSearchBackend::CannedSearchBackend(const Json& fixture) {
    if (!fixture.is_object()) throw SchemaError("canned search fixture must be an object");
    const Json results = fixture.value("results", Json::object());
    for (const auto& [query, hits] : results.items()) {
        add(query, hits_from_json(hits));
    }
    if (fixture.contains("fallback")) fallback_ = hits_from_json(fixture["fallback"]);
}

void CannedSearchBackend::add(std::string_view query, std::vector<SearchHit> hits) {
    results_[text::canonicalize(query)] = std::move(hits);
}

std::vector<SearchHit> CannedSearchBackend::search(std::string_view query) {
    if (auto it = results_.find(text::canonicalize(query)); it != results_.end()) return it->second;
    return fallback_;
}

std::string format_hits(const std::vector<SearchHit>& hits) {
    if (hits.empty()) return "No results found.";
    std::string out;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (i) out += "\n\n";
        out += std::to_string(i + 1) + ". " + hits[i].title + "\n" + hits[i].snippet;
    }
    return out;
}

}  // namespace userl::gyms
