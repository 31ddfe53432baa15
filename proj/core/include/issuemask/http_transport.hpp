#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace issuemask {

using HeaderMap = std::map<std::string, std::string>;  // keys lowercased

struct HttpResponse {
  int status = 0;  // 0 means the request never reached a server
  HeaderMap headers;
  std::string body;
  std::string error;  // transport-level failure text when status == 0

  std::string header(const std::string& name) const;
};

/// GET-only transport. `target` is an origin-form path plus query, e.g. "/search/issues?q=...".
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& target, const HeaderMap& headers) = 0;
};

/// cpp-httplib client against a live REST endpoint (https supported).
class LiveTransport final : public HttpTransport {
 public:
  LiveTransport(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(30));
  ~LiveTransport() override;
  HttpResponse get(const std::string& target, const HeaderMap& headers) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Replays canned responses recorded in `<dir>/index.json`:
///   {"responses": [{"target": "/search/issues?...", "status": 200,
///                   "headers": {...}, "body_file": "page1.json"}, ...]}
/// Targets are matched after sorting and percent-decoding query parameters.
/// Repeated entries for one target are served in order; the last one repeats.
class FixtureTransport final : public HttpTransport {
 public:
  explicit FixtureTransport(std::filesystem::path dir);
  HttpResponse get(const std::string& target, const HeaderMap& headers) override;
  const std::vector<std::string>& requests() const { return requests_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::vector<HttpResponse>> responses_;
  std::map<std::string, std::size_t> cursor_;
  std::vector<std::string> requests_;
};

/// Canonical form of a request target used for fixture matching.
std::string canonical_target(const std::string& target);
std::string url_encode(const std::string& text);
std::string url_decode(const std::string& text);

/// Time source plus sleeping, so retry and rate-limit behaviour is testable.
class Clock {
 public:
  using time_point = std::chrono::system_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() const = 0;
  virtual void sleep_for(std::chrono::milliseconds duration) = 0;
};

class SystemClock final : public Clock {
 public:
  time_point now() const override { return std::chrono::system_clock::now(); }
  void sleep_for(std::chrono::milliseconds duration) override;
};

/// Clock whose sleeps advance virtual time instantly and are recorded.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(time_point start = time_point{}) : now_(start) {}
  time_point now() const override { return now_; }
  void sleep_for(std::chrono::milliseconds duration) override {
    sleeps_.push_back(duration);
    now_ += duration;
  }
  const std::vector<std::chrono::milliseconds>& sleeps() const { return sleeps_; }

 private:
  time_point now_;
  std::vector<std::chrono::milliseconds> sleeps_;
};

}  // namespace issuemask
