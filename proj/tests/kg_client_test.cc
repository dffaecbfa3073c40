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

#include <gtest/gtest.h>

#include <filesystem>

#include "atomlm/entities.h"
#include "atomlm/util.h"
#include "test_fixtures.h"

namespace atomlm {
namespace {

namespace fs = std::filesystem;

fs::path Fixtures() { return testing_fixtures::DataDir() / "kg_fixtures"; }
RelationSchema Schema() { return LoadSchema(ATOMLM_BUNDLED_SCHEMA); }

// Transport double: replies from a table and counts calls.
class FakeTransport : public HttpTransport {
 public:
  HttpResponse Get(const std::string &url) override {
    ++calls;
    urls.push_back(url);
    if (fail_connect) throw TransportError("connection refused");
    if (status != 200) return {status, ""};
    return {200, body};
  }
  int calls = 0;
  std::vector<std::string> urls;
  bool fail_connect = false;
  int status = 200;
  std::string body;
};

FetchSpec FixtureSpec() {
  FetchSpec spec;
  spec.fixture_dir = Fixtures();
  spec.page_size = 4;
  return spec;
}

TEST(FetchSpec, ParsesAndValidates) {
  FetchSpec spec = FetchSpec::FromJson(
      R"({"relation_properties": {"PersonHasNoblePrize": "P166"}, "page_size": 4,
          "rate_limit": 2.5, "fixture_dir": "fx", "max_attempts": 5})");
  EXPECT_EQ(spec.relation_properties.at("PersonHasNoblePrize"), "P166");
  EXPECT_EQ(spec.page_size, 4u);
  EXPECT_EQ(spec.rate_limit, 2.5);
  EXPECT_EQ(spec.fixture_dir, fs::path("fx"));
  EXPECT_EQ(spec.max_attempts, 5);
  EXPECT_TRUE(FetchSpec().relation_properties.empty());
  EXPECT_THROW(FetchSpec::FromJson(R"({"page_size": 0})"), Error);
  EXPECT_THROW(FetchSpec::FromJson(R"({"rate_limit": 0})"), Error);
}

TEST(BuildUrl, EncodesParameters) {
  EXPECT_EQ(BuildUrl("https://x.org/api", {{"search", "United States"}, {"a", "b&c"}}),
            "https://x.org/api?search=United%20States&a=b%26c");
}

TEST(ResolveSurface, FixtureHit) {
  auto transport = std::make_shared<FakeTransport>();
  KgClient client(FixtureSpec(), transport);
  EXPECT_EQ(client.ResolveSurface("Greenland"), "Q223");
  EXPECT_EQ(client.ResolveSurface("Canada"), "Q16");
  EXPECT_EQ(client.ResolveSurface("Paris Hilton"), "Q47899");
  EXPECT_EQ(client.network_requests(), 0u);
  EXPECT_EQ(transport->calls, 0);
}

TEST(ResolveSurface, FixtureMissIsNull) {
  KgClient client(FixtureSpec());
  EXPECT_FALSE(client.ResolveSurface("Atlantis").has_value());
  // A hit whose label differs from the surface is not accepted.
  EXPECT_FALSE(client.ResolveSurface("Gren").has_value());
  EXPECT_EQ(client.network_requests(), 0u);
}

TEST(ResolveSurface, CacheHitAvoidsNetwork) {
  fs::path cache = fs::path(testing::TempDir()) / "kg_cache";
  fs::remove_all(cache);
  auto transport = std::make_shared<FakeTransport>();
  transport->body = R"({"search": [{"id": "Q223", "label": "Greenland"}]})";
  FetchSpec spec;
  spec.cache_dir = cache;
  spec.rate_limit = 1000;
  {
    KgClient client(spec, transport);
    EXPECT_EQ(client.ResolveSurface("Greenland"), "Q223");
    EXPECT_EQ(client.network_requests(), 1u);
    ASSERT_EQ(transport->urls.size(), 1u);
    EXPECT_NE(transport->urls[0].find("action=wbsearchentities"), std::string::npos);
    EXPECT_NE(transport->urls[0].find("search=Greenland"), std::string::npos);
  }
  EXPECT_TRUE(fs::exists(CachePath(cache, "Greenland")));
  KgClient again(spec, transport);
  EXPECT_EQ(again.ResolveSurface("Greenland"), "Q223");
  EXPECT_EQ(again.network_requests(), 0u);
  EXPECT_EQ(transport->calls, 1);
}

TEST(ResolveSurface, UnreachableRaisesTransportError) {
  auto transport = std::make_shared<FakeTransport>();
  transport->fail_connect = true;
  FetchSpec spec;
  spec.initial_backoff_seconds = 0.001;
  spec.rate_limit = 1000;
  KgClient client(spec, transport);
  EXPECT_THROW(client.ResolveSurface("Greenland"), ResolverTransportError);
  EXPECT_EQ(transport->calls, 3);
  EXPECT_EQ(client.network_requests(), 3u);
}

TEST(ResolveSurface, ClientErrorsAreNotRetried) {
  auto transport = std::make_shared<FakeTransport>();
  transport->status = 404;
  FetchSpec spec;
  spec.initial_backoff_seconds = 0.001;
  spec.rate_limit = 1000;
  KgClient client(spec, transport);
  EXPECT_THROW(client.ResolveSurface("Greenland"), ResolverTransportError);
  EXPECT_EQ(transport->calls, 1);
  transport->status = 503;
  EXPECT_THROW(client.ResolveSurface("Canada"), ResolverTransportError);
  EXPECT_EQ(transport->calls, 4);
}

TEST(ResolveSurface, MalformedResponse) {
  auto transport = std::make_shared<FakeTransport>();
  transport->body = "<html>";
  FetchSpec spec;
  spec.rate_limit = 1000;
  KgClient client(spec, transport);
  EXPECT_THROW(client.ResolveSurface("Greenland"), Error);
}

TEST(RateLimit, RequestsAreSpaced) {
  auto transport = std::make_shared<FakeTransport>();
  transport->body = R"({"search": []})";
  FetchSpec spec;
  spec.rate_limit = 20.0;
  KgClient client(spec, transport);
  for (const char *s : {"a", "b", "c", "d"}) client.ResolveSurface(s);
  auto log = client.request_log();
  ASSERT_EQ(log.size(), 4u);
  for (size_t i = 1; i < log.size(); ++i) {
    EXPECT_GE(std::chrono::duration<double>(log[i] - log[i - 1]).count(), 0.05 - 1e-3);
  }
}

TEST(FetchEntities, PrizeFixtureYieldsSevenPrizes) {
  FetchSpec spec = FixtureSpec();
  spec.relation_properties = {{"PersonHasNoblePrize", "P166"}};
  auto transport = std::make_shared<FakeTransport>();
  KgClient client(spec, transport);
  FetchReport report = client.FetchEntities(Schema());
  EXPECT_TRUE(report.failures.empty());
  EXPECT_EQ(report.pages, 3u);
  auto counts = CountTypes(report.records);
  EXPECT_EQ(counts["Prize"], 7u);
  EXPECT_EQ(counts["Person"], 10u);
  EXPECT_EQ(client.network_requests(), 0u);
  EXPECT_EQ(transport->calls, 0);
}

TEST(FetchEntities, DuplicatesAcrossPagesCollapse) {
  FetchSpec spec = FixtureSpec();
  spec.relation_properties = {{"PersonHasNoblePrize", "P166"}};
  KgClient client(spec);
  FetchReport report = client.FetchEntities(Schema());
  size_t literature = 0;
  for (const auto &r : report.records) {
    if (r.surface == "Nobel Prize in Literature") {
      ++literature;
      EXPECT_EQ(r.entity_id, "Q37922");
      EXPECT_EQ(r.source, EntitySource::kKgDump);
    }
    EXPECT_NE(r.surface, "Q1035");
  }
  EXPECT_EQ(literature, 1u);
}

TEST(FetchEntities, PartialFailureKeepsWhatWasFetched) {
  FetchSpec spec = FixtureSpec();
  spec.relation_properties = {{"CountryBordersCountry", "P47"},
                              {"PersonHasSpouse", "P26"}};
  KgClient client(spec);
  fs::path out = fs::path(testing::TempDir()) / "kg_partial.jsonl";
  FetchReport report = client.FetchEntitiesTo(Schema(), out);
  ASSERT_EQ(report.failures.size(), 1u);
  EXPECT_EQ(report.failures[0].relation, "PersonHasSpouse");
  EXPECT_EQ(CountTypes(report.records)["Country"], 3u);
  auto merged = MergeKgDump({}, out, Schema());
  EXPECT_EQ(merged.records, report.records);
}

TEST(FetchEntities, TotalFailureThrows) {
  FetchSpec spec = FixtureSpec();
  spec.relation_properties = {{"PersonHasSpouse", "P26"}};
  KgClient client(spec);
  EXPECT_THROW(client.FetchEntitiesTo(Schema(), fs::path(testing::TempDir()) / "x.jsonl"),
               Error);
}

TEST(FetchEntities, UnreachableEndpointGivesUpAfterThreeAttempts) {
  auto transport = std::make_shared<FakeTransport>();
  transport->fail_connect = true;
  FetchSpec spec;
  spec.relation_properties = {{"PersonHasNoblePrize", "P166"}};
  spec.initial_backoff_seconds = 0.001;
  spec.rate_limit = 1000;
  KgClient client(spec, transport);
  FetchReport report = client.FetchEntities(Schema());
  ASSERT_EQ(report.failures.size(), 1u);
  EXPECT_NE(report.failures[0].message.find("giving up"), std::string::npos);
  EXPECT_EQ(transport->calls, 3);
}

TEST(FetchEntities, OutputIsByteIdentical) {
  FetchSpec spec = FixtureSpec();
  spec.relation_properties = {{"PersonHasNoblePrize", "P166"},
                              {"CountryBordersCountry", "P47"}};
  fs::path a = fs::path(testing::TempDir()) / "kg_a.jsonl";
  fs::path b = fs::path(testing::TempDir()) / "kg_b.jsonl";
  KgClient(spec).FetchEntitiesTo(Schema(), a);
  KgClient(spec).FetchEntitiesTo(Schema(), b);
  EXPECT_EQ(Sha256File(a), Sha256File(b));
}

}  // namespace
}  // namespace atomlm
