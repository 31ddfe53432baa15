#include "issuemask/http_transport.hpp"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "issuemask/common.hpp"
#include "issuemask/corpus.hpp"

namespace fs = std::filesystem;

namespace issuemask {

std::string HttpResponse::header(const std::string& name) const {
  const auto it = headers.find(lowercase(name));
  return it == headers.end() ? std::string{} : it->second;
}

struct LiveTransport::Impl {
  httplib::Client client;
  explicit Impl(const std::string& base) : client(base) {}
};

LiveTransport::LiveTransport(std::string base_url, std::chrono::seconds timeout)
    : impl_(std::make_unique<Impl>(base_url)) {
  impl_->client.set_connection_timeout(timeout);
  impl_->client.set_read_timeout(timeout);
  impl_->client.set_follow_location(true);
}

LiveTransport::~LiveTransport() = default;

HttpResponse LiveTransport::get(const std::string& target, const HeaderMap& headers) {
  httplib::Headers request_headers;
  for (const auto& [k, v] : headers) request_headers.emplace(k, v);
  auto result = impl_->client.Get(target, request_headers);
  HttpResponse response;
  if (!result) {
    response.error = httplib::to_string(result.error());
    return response;
  }
  response.status = result->status;
  response.body = result->body;
  for (const auto& [k, v] : result->headers) response.headers[lowercase(k)] = v;
  return response;
}

std::string url_encode(const std::string& text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0f]);
    }
  }
  return out;
}

std::string url_decode(const std::string& text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size() && std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(text.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else if (text[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::string canonical_target(const std::string& target) {
  const auto qmark = target.find('?');
  std::string path = target.substr(0, qmark);
  if (qmark == std::string::npos) return path;
  std::vector<std::string> params;
  std::string_view query(target);
  query.remove_prefix(qmark + 1);
  while (!query.empty()) {
    const auto amp = query.find('&');
    auto param = std::string(query.substr(0, amp));
    const auto eq = param.find('=');
    if (eq == std::string::npos) {
      params.push_back(url_decode(param));
    } else {
      params.push_back(url_decode(param.substr(0, eq)) + "=" + url_decode(param.substr(eq + 1)));
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  std::sort(params.begin(), params.end());
  std::string out = path + "?";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += '&';
    out += params[i];
  }
  return out;
}

FixtureTransport::FixtureTransport(fs::path dir) : dir_(std::move(dir)) {
  const auto index_path = dir_ / "index.json";
  std::ifstream in(index_path);
  if (!in) throw DependencyError("fixture index not found: " + index_path.string());
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(index_path.string(), e.what());
  }
  for (const auto& entry : index.at("responses")) {
    HttpResponse response;
    response.status = entry.value("status", 200);
    const auto headers = entry.value("headers", nlohmann::json::object());
    for (const auto& [k, v] : headers.items()) {
      response.headers[lowercase(k)] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (entry.contains("body_file")) {
      std::ifstream body(dir_ / entry.at("body_file").get<std::string>(), std::ios::binary);
      if (!body) throw DependencyError("fixture body missing: " + entry.at("body_file").get<std::string>());
      std::ostringstream ss;
      ss << body.rdbuf();
      response.body = ss.str();
    } else if (entry.contains("body")) {
      response.body = entry.at("body").dump();
    }
    responses_[canonical_target(entry.at("target").get<std::string>())].push_back(std::move(response));
  }
}

HttpResponse FixtureTransport::get(const std::string& target, const HeaderMap&) {
  const auto key = canonical_target(target);
  requests_.push_back(key);
  const auto it = responses_.find(key);
  if (it == responses_.end()) {
    HttpResponse missing;
    missing.status = 404;
    missing.body = R"({"message":"no recorded fixture"})";
    missing.headers["x-fixture-missing"] = key;
    return missing;
  }
  auto& cursor = cursor_[key];
  const auto& response = it->second[std::min(cursor, it->second.size() - 1)];
  ++cursor;
  return response;
}

void SystemClock::sleep_for(std::chrono::milliseconds duration) { std::this_thread::sleep_for(duration); }

}  // namespace issuemask
