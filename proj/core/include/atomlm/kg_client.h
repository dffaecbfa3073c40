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

#ifndef ATOMLM_KG_CLIENT_H_
#define ATOMLM_KG_CLIENT_H_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atomlm/entities.h"
#include "atomlm/inference.h"
#include "atomlm/schema.h"
#include "atomlm/util.h"

namespace atomlm {

struct FetchSpec {
  // SPARQL endpoint for entity harvesting.
  std::string endpoint = "https://query.wikidata.org/sparql";
  // Entity search API used for surface resolution.
  std::string search_endpoint = "https://www.wikidata.org/w/api.php";
  // Relation name -> property id, e.g. "CountryBordersCountry" -> "P47".
  // Ships empty; live fetching needs it filled in.
  std::map<std::string, std::string> relation_properties;
  size_t page_size = 500;
  // Requests per second.
  double rate_limit = 1.0;
  // Replay recorded responses instead of touching the network.
  std::optional<std::filesystem::path> fixture_dir;
  // Resolution cache, cache/<sha1(surface)>.json.
  std::optional<std::filesystem::path> cache_dir;
  int max_attempts = 3;
  double initial_backoff_seconds = 0.5;
  std::string language = "en";

  void Validate() const;
  static FetchSpec FromJson(std::string_view json_text);
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Connection-level failure: no response was received.
class TransportError : public Error {
 public:
  using Error::Error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse Get(const std::string &url) = 0;
};

// Live transport over cpp-httplib, https through OpenSSL.
class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(double timeout_seconds = 30.0)
      : timeout_seconds_(timeout_seconds) {}
  HttpResponse Get(const std::string &url) override;

 private:
  double timeout_seconds_;
};

// Fixture file holding the recorded response body for a request URL.
std::filesystem::path FixturePath(const std::filesystem::path &fixture_dir,
                                  std::string_view url);
// Cache file for a surface: <dir>/<sha1(surface)>.json.
std::filesystem::path CachePath(const std::filesystem::path &cache_dir,
                                std::string_view surface);

// Query-string encoding of key/value pairs in the given order.
std::string BuildUrl(std::string_view base,
                     const std::vector<std::pair<std::string, std::string>> &params);

struct RelationFailure {
  std::string relation;
  std::string message;
};

struct FetchReport {
  std::vector<EntityRecord> records;
  std::vector<RelationFailure> failures;
  size_t pages = 0;
};

class KgClient {
 public:
  // Without a transport a live HttplibTransport is created. In fixture mode
  // the transport is never called.
  explicit KgClient(FetchSpec spec,
                    std::shared_ptr<HttpTransport> transport = nullptr);

  // Harvests subjects and objects of every mapped relation, page by page.
  // Failed relations are listed in the report; what was fetched is kept.
  FetchReport FetchEntities(const RelationSchema &schema);
  // Writes the records as an entity dump and returns the report. Throws when
  // every relation failed.
  FetchReport FetchEntitiesTo(const RelationSchema &schema,
                              const std::filesystem::path &out);

  // Top search hit whose label equals the surface exactly, or nullopt.
  // Throws ResolverTransportError when the service cannot be reached.
  std::optional<std::string> ResolveSurface(std::string_view surface);

  size_t network_requests() const { return network_requests_.load(); }
  std::vector<std::chrono::steady_clock::time_point> request_log() const;

  const FetchSpec &spec() const { return spec_; }

 private:
  std::string Request(const std::string &url);
  std::string Replay(const std::string &url) const;
  void WaitForSlot();
  std::string SparqlQuery(const std::string &property, size_t offset) const;

  FetchSpec spec_;
  std::shared_ptr<HttpTransport> transport_;
  std::atomic<size_t> network_requests_{0};
  mutable std::mutex mu_;
  std::vector<std::chrono::steady_clock::time_point> log_;
  std::optional<std::chrono::steady_clock::time_point> last_request_;
};

// Resolver facade over KgClient::ResolveSurface.
class KgResolver : public Resolver {
 public:
  explicit KgResolver(KgClient *client) : client_(client) {}
  std::optional<std::string> Resolve(std::string_view surface) override {
    return client_->ResolveSurface(surface);
  }

 private:
  KgClient *client_;
};

}  // namespace atomlm

#endif  // ATOMLM_KG_CLIENT_H_
