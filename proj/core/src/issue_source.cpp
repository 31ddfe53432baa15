#include "issuemask/issue_source.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace issuemask {
namespace {

using std::chrono::milliseconds;

bool is_success(int status) { return status >= 200 && status < 300; }

std::chrono::sys_days parse_day(std::string_view text) {
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
    throw ValidationError(std::string(text), "expected a YYYY-MM-DD date");
  }
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  std::from_chars(text.data(), text.data() + 4, y);
  std::from_chars(text.data() + 5, text.data() + 7, m);
  std::from_chars(text.data() + 8, text.data() + 10, d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw ValidationError(std::string(text), "not a calendar date");
  return std::chrono::sys_days{ymd};
}

std::string error_message(const HttpResponse& response) {
  if (response.status == 0) return response.error.empty() ? "connection failed" : response.error;
  std::string message = "HTTP " + std::to_string(response.status);
  try {
    const auto body = nlohmann::json::parse(response.body);
    if (body.is_object() && body.contains("message")) message += ": " + body["message"].get<std::string>();
  } catch (const nlohmann::json::exception&) {
  }
  return message;
}

// Extracts the page number of the rel="last" link, if any.
std::optional<std::int64_t> last_page(const std::string& link) {
  std::string_view rest(link);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto part = rest.substr(0, comma);
    if (part.find("rel=\"last\"") != std::string_view::npos) {
      const auto open = part.find('<');
      const auto close = part.find('>');
      if (open == std::string_view::npos || close == std::string_view::npos) return std::nullopt;
      const auto url = part.substr(open + 1, close - open - 1);
      for (std::size_t pos = url.find("page="); pos != std::string_view::npos; pos = url.find("page=", pos + 1)) {
        if (pos == 0 || (url[pos - 1] != '?' && url[pos - 1] != '&')) continue;
        std::int64_t page = 0;
        const auto begin = url.data() + pos + 5;
        const auto [ptr, ec] = std::from_chars(begin, url.data() + url.size(), page);
        if (ec == std::errc{} && ptr != begin) return page;
      }
      return std::nullopt;
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return std::nullopt;
}

}  // namespace

RateLimiter::RateLimiter(Clock& clock, double requests_per_second, double burst)
    : clock_(clock), rate_(requests_per_second), capacity_(std::max(1.0, burst)), tokens_(capacity_),
      last_(clock.now()) {}

void RateLimiter::acquire() {
  if (rate_ <= 0) return;
  auto refill = [this] {
    const auto now = clock_.now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
    last_ = now;
  };
  refill();
  if (tokens_ < 1.0) {
    clock_.sleep_for(milliseconds(static_cast<std::int64_t>(std::ceil((1.0 - tokens_) / rate_ * 1000.0))));
    refill();
  }
  tokens_ = std::max(0.0, tokens_ - 1.0);
}

std::string resolve_credential(const std::function<const char*(const char*)>& getenv) {
  const auto lookup = getenv ? getenv : [](const char* name) -> const char* { return std::getenv(name); };
  for (const char* name : {"GITHUB_TOKEN", "ISSUE_TRACKER_TOKEN"}) {
    const char* value = lookup(name);
    if (value != nullptr && *value != '\0') return value;
  }
  throw CredentialError("no API credential: set GITHUB_TOKEN or ISSUE_TRACKER_TOKEN");
}

std::optional<IssueReport> parse_search_item(const nlohmann::json& item) {
  if (!item.is_object() || !item.contains("number") || !item.contains("repository_url")) return std::nullopt;
  const auto repo_url = item["repository_url"].get<std::string>();
  const auto marker = repo_url.find("/repos/");
  if (marker == std::string::npos) return std::nullopt;
  IssueReport issue;
  issue.repo = repo_url.substr(marker + 7);
  issue.id = issue.repo + "#" + std::to_string(item["number"].get<std::int64_t>());
  auto text_field = [&](const char* key) {
    return item.contains(key) && item[key].is_string() ? item[key].get<std::string>() : std::string{};
  };
  issue.title = text_field("title");
  issue.body = text_field("body");
  issue.created_at = text_field("created_at");
  issue.is_pull_request = item.contains("pull_request") && !item["pull_request"].is_null();
  if (item.contains("labels") && item["labels"].is_array()) {
    for (const auto& label : item["labels"]) {
      if (label.is_string()) {
        issue.tags.push_back(lowercase(label.get<std::string>()));
      } else if (label.is_object() && label.contains("name") && label["name"].is_string()) {
        issue.tags.push_back(lowercase(label["name"].get<std::string>()));
      }
    }
  }
  return issue;
}

long days_between(std::string_view from, std::string_view to) {
  return static_cast<long>((parse_day(to) - parse_day(from)).count());
}

GithubIssueSource::GithubIssueSource(HttpTransport& transport, Clock& clock, std::string token, RetryPolicy retry,
                                     double requests_per_second, double burst)
    : transport_(transport), clock_(clock), token_(std::move(token)), retry_(retry),
      limiter_(clock, requests_per_second, burst) {
  if (retry_.max_attempts < 1) throw ValidationError("retry/max_attempts", "must be >= 1");
}

HttpResponse GithubIssueSource::request(const std::string& target) {
  HeaderMap headers{{"accept", "application/vnd.github+json"},
                    {"user-agent", "issuemask"},
                    {"x-github-api-version", "2022-11-28"}};
  if (!token_.empty()) headers["authorization"] = "Bearer " + token_;

  milliseconds backoff = retry_.initial_backoff;
  int attempt = 0;
  int rate_waits = 0;
  while (true) {
    limiter_.acquire();
    const HttpResponse response = transport_.get(target, headers);
    if (response.status == 401) throw CredentialError("authentication rejected: " + error_message(response));

    const std::string remaining = response.header("x-ratelimit-remaining");
    const std::string reset = response.header("x-ratelimit-reset");
    const std::string retry_after = response.header("retry-after");
    const bool rate_limited =
        response.status == 429 || (response.status == 403 && (remaining == "0" || !retry_after.empty()));

    auto server_wait = [&]() -> milliseconds {
      if (!retry_after.empty()) return std::chrono::seconds(std::strtoll(retry_after.c_str(), nullptr, 10));
      if (!reset.empty()) {
        const auto reset_at = Clock::time_point(std::chrono::seconds(std::strtoll(reset.c_str(), nullptr, 10)));
        const auto wait = std::chrono::duration_cast<milliseconds>(reset_at - clock_.now());
        return std::max(wait, milliseconds(0)) + milliseconds(1000);
      }
      return backoff;
    };

    if (is_success(response.status)) {
      // Spend the quota, then wait out the window before the next call.
      if (remaining == "0" && !reset.empty()) {
        ++stats_.rate_limit_waits;
        clock_.sleep_for(std::min(server_wait(), retry_.max_server_wait));
      }
      return response;
    }
    if (rate_limited) {
      if (++rate_waits > retry_.max_attempts) {
        throw TransportError("rate limit persisted after " + std::to_string(rate_waits - 1) + " waits: " + target);
      }
      ++stats_.rate_limit_waits;
      clock_.sleep_for(std::min(server_wait(), retry_.max_server_wait));
      continue;
    }
    const bool transient = response.status == 0 || response.status >= 500;
    if (!transient) return response;
    if (++attempt >= retry_.max_attempts) {
      throw TransportError("giving up after " + std::to_string(attempt) + " attempts on " + target + ": " +
                           error_message(response));
    }
    ++stats_.retries;
    clock_.sleep_for(backoff);
    backoff = milliseconds(static_cast<std::int64_t>(static_cast<double>(backoff.count()) * retry_.multiplier));
  }
}

nlohmann::json GithubIssueSource::request_json(const std::string& target) {
  const auto response = request(target);
  if (!is_success(response.status)) throw TransportError(target + ": " + error_message(response));
  try {
    return nlohmann::json::parse(response.body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(target + ": malformed JSON: " + e.what());
  }
}

std::int64_t GithubIssueSource::count_via_link(const std::string& target) {
  const auto response = request(target);
  if (response.status == 409) return 0;  // empty repository
  if (!is_success(response.status)) throw TransportError(target + ": " + error_message(response));
  if (const auto last = last_page(response.header("link"))) return *last;
  try {
    const auto body = nlohmann::json::parse(response.body);
    return body.is_array() ? static_cast<std::int64_t>(body.size()) : 0;
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(target + ": malformed JSON: " + e.what());
  }
}

std::string GithubIssueSource::today() const {
  const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(clock_.now())};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

bool GithubIssueSource::project_admitted(const std::string& repo, const ProjectFilter& filter,
                                         const std::string& reference_date) {
  if (!filter.enabled) return true;
  if (const auto it = project_cache_.find(repo); it != project_cache_.end()) return it->second;

  const auto meta = request_json("/repos/" + repo);
  bool ok = meta.value("stargazers_count", std::int64_t{0}) >= filter.min_stars;
  ok = ok && !(filter.exclude_forks && meta.value("fork", false));
  if (ok) {
    const std::string pushed = meta.value("pushed_at", std::string{});
    ok = !pushed.empty() && days_between(pushed, reference_date.empty() ? today() : reference_date) <=
                                filter.active_within_days;
  }
  ok = ok && count_via_link("/repos/" + repo + "/commits?per_page=1") >= filter.min_commits;
  ok = ok && count_via_link("/repos/" + repo + "/contributors?per_page=1&anon=true") >= filter.min_contributors;
  if (ok) {
    const auto merged =
        request_json("/search/issues?q=" + url_encode("repo:" + repo + " is:pr is:merged") + "&per_page=1");
    ok = merged.value("total_count", std::int64_t{0}) >= filter.min_merged_prs;
  }
  project_cache_[repo] = ok;
  return ok;
}

std::vector<IssueReport> GithubIssueSource::fetch_issues(const FetchRequest& req) {
  if (req.quota == 0) throw ValidationError("quota", "must be > 0");
  if (req.per_page < 1 || req.per_page > 100) throw ValidationError("per_page", "must be in [1, 100]");
  req.issue_filter.window.validate();
  req.project_filter.validate();

  std::string query = req.repo_query;
  if (req.issue_filter.exclude_prs) query += " is:issue";
  query += " created:" + req.issue_filter.window.first + ".." + req.issue_filter.window.last;
  query.erase(0, query.find_first_not_of(' '));

  std::vector<IssueReport> out;
  std::set<std::string> ids;
  for (int page = 1; page <= req.max_pages; ++page) {
    const std::string target = "/search/issues?q=" + url_encode(query) +
                               "&per_page=" + std::to_string(req.per_page) + "&page=" + std::to_string(page);
    const auto response = request(target);
    // The search API answers 422 past its result window; treat as exhaustion.
    if (response.status == 422 && page > 1) break;
    if (!is_success(response.status)) throw TransportError(target + ": " + error_message(response));
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(target + ": malformed JSON: " + e.what());
    }
    ++stats_.pages;
    if (body.value("incomplete_results", false)) warnings.push_back("search results incomplete on page " + std::to_string(page));
    const auto& items = body.contains("items") ? body["items"] : nlohmann::json::array();
    for (const auto& item : items) {
      ++stats_.seen;
      auto issue = parse_search_item(item);
      if (!issue) {
        warnings.push_back("skipped malformed search item on page " + std::to_string(page));
        continue;
      }
      if (!ids.insert(issue->id).second) {
        ++stats_.duplicates;
        continue;
      }
      if (!admits(req.issue_filter, *issue)) {
        ++stats_.rejected_by_issue_filter;
        continue;
      }
      if (!project_admitted(issue->repo, req.project_filter, req.reference_date)) {
        ++stats_.rejected_by_project_filter;
        continue;
      }
      issue->label = adjudicate_label(*issue, req.tag_set);
      out.push_back(std::move(*issue));
      if (out.size() == req.quota) return out;
    }
    const auto total = body.value("total_count", std::int64_t{0});
    if (items.size() < static_cast<std::size_t>(req.per_page) ||
        static_cast<std::int64_t>(page) * req.per_page >= total) {
      break;
    }
  }
  return out;
}

}  // namespace issuemask
