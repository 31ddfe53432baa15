#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "issuemask/corpus.hpp"
#include "issuemask/http_transport.hpp"

namespace issuemask {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
  // Upper bound on a single server-requested wait (rate-limit reset, Retry-After).
  std::chrono::milliseconds max_server_wait{std::chrono::minutes(15)};
};

/// Client-side token bucket shared by every request of one source.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, double requests_per_second, double burst);
  void acquire();

 private:
  Clock& clock_;
  double rate_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

struct FetchRequest {
  std::string repo_query;  // search qualifiers, e.g. `label:security language:go`
  IssueFilter issue_filter;
  SecurityTagSet tag_set = SecurityTagSet::defaults();
  std::size_t quota = 100;
  ProjectFilter project_filter;
  std::string reference_date;  // YYYY-MM-DD for activity checks; empty means the clock's today
  int per_page = 100;
  int max_pages = 10;  // the search API stops serving after 1000 results
};

struct FetchStats {
  std::size_t pages = 0;
  std::size_t seen = 0;
  std::size_t rejected_by_issue_filter = 0;
  std::size_t rejected_by_project_filter = 0;
  std::size_t duplicates = 0;
  std::size_t retries = 0;
  std::size_t rate_limit_waits = 0;
};

/// Token from GITHUB_TOKEN, falling back to ISSUE_TRACKER_TOKEN. Throws CredentialError when neither is set.
/// `getenv` is injectable for tests.
std::string resolve_credential(const std::function<const char*(const char*)>& getenv = nullptr);

/// Parses one item of a search response. Returns nullopt for items missing required fields.
std::optional<IssueReport> parse_search_item(const nlohmann::json& item);

/// Whole days from `from` to `to` (both YYYY-MM-DD prefixes).
long days_between(std::string_view from, std::string_view to);

/// GitHub-dialect issue search over an injectable transport.
class GithubIssueSource {
 public:
  GithubIssueSource(HttpTransport& transport, Clock& clock, std::string token = {}, RetryPolicy retry = {},
                    double requests_per_second = 0.5, double burst = 10);

  std::vector<IssueReport> fetch_issues(const FetchRequest& request);

  /// Decision for one owner/repo under the project filter; cached per repository.
  bool project_admitted(const std::string& repo, const ProjectFilter& filter, const std::string& reference_date);

  const FetchStats& stats() const { return stats_; }
  std::vector<std::string> warnings;

 private:
  HttpResponse request(const std::string& target);
  nlohmann::json request_json(const std::string& target);
  std::int64_t count_via_link(const std::string& target);
  std::string today() const;

  HttpTransport& transport_;
  Clock& clock_;
  std::string token_;
  RetryPolicy retry_;
  RateLimiter limiter_;
  FetchStats stats_;
  std::map<std::string, bool> project_cache_;
};

}  // namespace issuemask
