// Copyright 2026 The atomlm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "atomlm/kg_client.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <thread>
#include <tuple>

#include "httplib.h"
#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

void FetchSpec::Validate() const {
  if (page_size < 1) throw Error("page_size must be at least 1");
  if (!(rate_limit > 0.0)) throw Error("rate_limit must be positive");
  if (max_attempts < 1) throw Error("max_attempts must be at least 1");
  if (initial_backoff_seconds < 0.0) throw Error("backoff must be non-negative");
}

FetchSpec FetchSpec::FromJson(std::string_view json_text) {
  auto j = nlohmann::json::parse(json_text);
  FetchSpec spec;
  spec.endpoint = j.value("endpoint", spec.endpoint);
  spec.search_endpoint = j.value("search_endpoint", spec.search_endpoint);
  if (j.contains("relation_properties")) {
    spec.relation_properties =
        j["relation_properties"].get<std::map<std::string, std::string>>();
  }
  spec.page_size = j.value("page_size", spec.page_size);
  spec.rate_limit = j.value("rate_limit", spec.rate_limit);
  if (j.contains("fixture_dir") && j["fixture_dir"].is_string()) {
    spec.fixture_dir = j["fixture_dir"].get<std::string>();
  }
  if (j.contains("cache_dir") && j["cache_dir"].is_string()) {
    spec.cache_dir = j["cache_dir"].get<std::string>();
  }
  spec.max_attempts = j.value("max_attempts", spec.max_attempts);
  spec.initial_backoff_seconds =
      j.value("initial_backoff_seconds", spec.initial_backoff_seconds);
  spec.language = j.value("language", spec.language);
  spec.Validate();
  return spec;
}

HttpResponse HttplibTransport::Get(const std::string &url) {
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("bad url: " + url);
  const size_t path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(std::ceil(timeout_seconds_));
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_follow_location(true);
  httplib::Headers headers{{"User-Agent", "atomlm/0.1"},
                           {"Accept", "application/json"}};
  auto res = client.Get(path, headers);
  if (!res) {
    throw TransportError("request to " + origin + " failed: " +
                         httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

std::filesystem::path FixturePath(const std::filesystem::path &fixture_dir,
                                  std::string_view url) {
  return fixture_dir / (Sha1Hex(url) + ".json");
}

std::filesystem::path CachePath(const std::filesystem::path &cache_dir,
                                std::string_view surface) {
  return cache_dir / (Sha1Hex(surface) + ".json");
}

std::string BuildUrl(
    std::string_view base,
    const std::vector<std::pair<std::string, std::string>> &params) {
  std::string url(base);
  char sep = url.find('?') == std::string::npos ? '?' : '&';
  for (const auto &[key, value] : params) {
    url += sep;
    url += httplib::detail::encode_query_param(key);
    url += '=';
    url += httplib::detail::encode_query_param(value);
    sep = '&';
  }
  return url;
}

namespace {

// Trailing path component of an entity URI: .../entity/Q42 -> Q42.
std::string EntityIdFromUri(std::string_view uri) {
  size_t slash = uri.rfind('/');
  return std::string(slash == std::string_view::npos ? uri : uri.substr(slash + 1));
}

bool IsBareId(std::string_view label) {
  if (label.size() < 2 || label[0] != 'Q') return false;
  return std::all_of(label.begin() + 1, label.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

// Reads the binding named `var` (id) and `var`Label (surface).
std::optional<EntityRecord> Binding(const nlohmann::json &row,
                                    const std::string &var,
                                    const std::string &type) {
  const std::string label_var = var + "Label";
  if (!row.contains(var) || !row.contains(label_var)) return std::nullopt;
  std::string surface(Trim(row[label_var].value("value", std::string())));
  if (surface.empty() || IsBareId(surface)) return std::nullopt;
  EntityRecord r;
  r.surface = std::move(surface);
  r.entity_type = type;
  r.entity_id = EntityIdFromUri(row[var].value("value", std::string()));
  r.source = EntitySource::kKgDump;
  return r;
}

}  // namespace

KgClient::KgClient(FetchSpec spec, std::shared_ptr<HttpTransport> transport)
    : spec_(std::move(spec)), transport_(std::move(transport)) {
  spec_.Validate();
  if (!transport_ && !spec_.fixture_dir) {
    transport_ = std::make_shared<HttplibTransport>();
  }
}

std::vector<std::chrono::steady_clock::time_point> KgClient::request_log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

void KgClient::WaitForSlot() {
  using Clock = std::chrono::steady_clock;
  const auto interval = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(1.0 / spec_.rate_limit));
  std::lock_guard<std::mutex> lock(mu_);
  if (last_request_) {
    const auto ready = *last_request_ + interval;
    if (Clock::now() < ready) std::this_thread::sleep_until(ready);
  }
  last_request_ = Clock::now();
  log_.push_back(*last_request_);
}

std::string KgClient::Replay(const std::string &url) const {
  const auto path = FixturePath(*spec_.fixture_dir, url);
  if (!std::filesystem::exists(path)) {
    throw Error("no fixture for request " + url + " (expected " +
                path.string() + ")");
  }
  return ReadFile(path);
}

std::string KgClient::Request(const std::string &url) {
  if (spec_.fixture_dir) return Replay(url);
  std::string last_error;
  double backoff = spec_.initial_backoff_seconds;
  for (int attempt = 1; attempt <= spec_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    WaitForSlot();
    ++network_requests_;
    try {
      HttpResponse res = transport_->Get(url);
      if (res.status >= 200 && res.status < 300) return std::move(res.body);
      last_error = "HTTP " + std::to_string(res.status);
      // Client errors other than throttling will not improve on retry.
      if (res.status >= 400 && res.status < 500 && res.status != 429) break;
    } catch (const TransportError &e) {
      last_error = e.what();
    }
    spdlog::warn("attempt {}/{} for {} failed: {}", attempt, spec_.max_attempts,
                 url, last_error);
  }
  throw TransportError("giving up on " + url + ": " + last_error);
}

std::string KgClient::SparqlQuery(const std::string &property,
                                  size_t offset) const {
  return "SELECT ?s ?sLabel ?o ?oLabel WHERE { ?s wdt:" + property +
         " ?o . SERVICE wikibase:label { bd:serviceParam wikibase:language \"" +
         spec_.language + "\". } } ORDER BY ?s ?o LIMIT " +
         std::to_string(spec_.page_size) + " OFFSET " + std::to_string(offset);
}

FetchReport KgClient::FetchEntities(const RelationSchema &schema) {
  FetchReport report;
  for (const auto &[relation, property] : spec_.relation_properties) {
    if (!schema.Contains(relation)) {
      report.failures.push_back({relation, "relation not in schema"});
      continue;
    }
    const RelationInfo &info = schema.Get(relation);
    try {
      for (size_t offset = 0;; offset += spec_.page_size) {
        const std::string url = BuildUrl(
            spec_.endpoint,
            {{"query", SparqlQuery(property, offset)}, {"format", "json"}});
        auto j = nlohmann::json::parse(Request(url));
        const auto &rows = j.at("results").at("bindings");
        ++report.pages;
        for (const auto &row : rows) {
          if (auto s = Binding(row, "s", info.subject_type)) {
            report.records.push_back(std::move(*s));
          }
          if (info.numeric) continue;
          if (auto o = Binding(row, "o", info.object_type)) {
            report.records.push_back(std::move(*o));
          }
        }
        if (rows.size() < spec_.page_size) break;
      }
    } catch (const std::exception &e) {
      spdlog::warn("fetch for {} failed: {}", relation, e.what());
      report.failures.push_back({relation, e.what()});
    }
  }
  auto &recs = report.records;
  std::sort(recs.begin(), recs.end(),
            [](const EntityRecord &a, const EntityRecord &b) {
              return std::tie(a.surface, a.entity_type, a.entity_id) <
                     std::tie(b.surface, b.entity_type, b.entity_id);
            });
  recs.erase(std::unique(recs.begin(), recs.end(),
                         [](const EntityRecord &a, const EntityRecord &b) {
                           return a.surface == b.surface &&
                                  a.entity_type == b.entity_type;
                         }),
             recs.end());
  return report;
}

FetchReport KgClient::FetchEntitiesTo(const RelationSchema &schema,
                                      const std::filesystem::path &out) {
  FetchReport report = FetchEntities(schema);
  WriteFile(out, SerializeEntityDump(report.records));
  if (!report.failures.empty()) {
    std::string summary;
    for (const RelationFailure &f : report.failures) {
      summary += "\n  " + f.relation + ": " + f.message;
    }
    spdlog::warn("{} of {} relations failed:{}", report.failures.size(),
                 spec_.relation_properties.size(), summary);
    if (report.failures.size() == spec_.relation_properties.size()) {
      throw Error("entity fetch failed for every relation:" + summary);
    }
  }
  return report;
}

std::optional<std::string> KgClient::ResolveSurface(std::string_view surface) {
  std::string key(Trim(surface));
  if (key.empty()) throw Error("empty surface");

  std::optional<std::string> body;
  if (spec_.cache_dir) {
    const auto path = CachePath(*spec_.cache_dir, key);
    if (std::filesystem::exists(path)) body = ReadFile(path);
  }
  if (!body && spec_.fixture_dir) {
    const auto path = CachePath(*spec_.fixture_dir, key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    body = ReadFile(path);
  }
  if (!body) {
    const std::string url = BuildUrl(spec_.search_endpoint,
                                     {{"action", "wbsearchentities"},
                                      {"search", key},
                                      {"language", spec_.language},
                                      {"type", "item"},
                                      {"format", "json"}});
    try {
      body = Request(url);
    } catch (const TransportError &e) {
      throw ResolverTransportError(e.what());
    }
    if (spec_.cache_dir) WriteFile(CachePath(*spec_.cache_dir, key), *body);
  }

  auto j = nlohmann::json::parse(*body, nullptr, false);
  if (j.is_discarded() || !j.contains("search") || !j["search"].is_array()) {
    throw Error("malformed search response for '" + key + "'");
  }
  for (const auto &hit : j["search"]) {
    if (hit.value("label", std::string()) == key && hit.contains("id")) {
      return hit["id"].get<std::string>();
    }
  }
  return std::nullopt;
}

}  // namespace atomlm
