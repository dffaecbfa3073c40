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

#include "atomlm/evaluation.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "atomlm/util.h"

namespace atomlm {

namespace {

std::set<std::string> Normalize(std::span<const std::string> items) {
  std::set<std::string> out;
  for (const std::string &s : items) {
    std::string_view t = Trim(s);
    if (!t.empty()) out.emplace(t);
  }
  return out;
}

// Objects as compared under the options. Missing ids never match anything.
std::vector<std::string> MatchKeys(const TripleSample &s,
                                   const ScoreOptions &options) {
  if (!options.match_on_id) return s.objects;
  std::vector<std::string> keys;
  for (size_t k = 0; k < s.objects.size(); ++k) {
    if (k < s.object_ids.size() && s.object_ids[k]) {
      keys.push_back(*s.object_ids[k]);
    } else {
      keys.push_back(std::string("\x01unresolved:") + s.objects[k]);
    }
  }
  return keys;
}

std::string Fixed3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

// Validation averages of the full-scale system, shown for orientation only.
constexpr const char *kReferenceFooter =
    "reference: full-scale bert-base-cased system, challenge validation set: "
    "P=0.493 R=0.443 F1=0.362 (not reproduced at desk scale)";

}  // namespace

Metrics ScoreSample(std::span<const std::string> predicted,
                    std::span<const std::string> gold) {
  const std::set<std::string> pred = Normalize(predicted);
  const std::set<std::string> truth = Normalize(gold);
  size_t hits = 0;
  for (const std::string &p : pred) hits += truth.contains(p) ? 1 : 0;

  Metrics m;
  m.support = 1;
  if (pred.empty()) {
    m.precision = truth.empty() ? 1.0 : 0.0;
  } else {
    m.precision = static_cast<double>(hits) / static_cast<double>(pred.size());
  }
  if (truth.empty()) {
    m.recall = 1.0;
  } else {
    m.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
  }
  const double sum = m.precision + m.recall;
  m.f1 = sum > 0.0 ? 2.0 * m.precision * m.recall / sum : 0.0;
  return m;
}

RunReport ScoreRun(std::span<const TripleSample> predictions,
                   std::span<const TripleSample> gold,
                   const ScoreOptions &options) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, const TripleSample *> predicted;
  for (const TripleSample &p : predictions) {
    Key key{p.subject, p.relation};
    if (!predicted.emplace(key, &p).second) {
      throw Error("duplicate prediction key (" + p.subject + ", " +
                  p.relation + ")");
    }
  }

  RunReport report;
  std::set<Key> gold_keys;
  std::map<std::string, std::vector<Metrics>> samples;
  for (const TripleSample &g : gold) {
    Key key{g.subject, g.relation};
    if (!gold_keys.insert(key).second) {
      throw Error("duplicate gold key (" + g.subject + ", " + g.relation + ")");
    }
    auto it = predicted.find(key);
    std::vector<std::string> pred_keys;
    if (it == predicted.end()) {
      std::string msg = "no prediction for (" + g.subject + ", " + g.relation +
                        "); scored as empty";
      spdlog::warn("{}", msg);
      report.warnings.push_back(std::move(msg));
    } else {
      pred_keys = MatchKeys(*it->second, options);
    }
    samples[g.relation].push_back(ScoreSample(pred_keys, MatchKeys(g, options)));
  }
  for (const auto &[key, p] : predicted) {
    if (!gold_keys.contains(key)) {
      report.warnings.push_back("prediction (" + key.first + ", " + key.second +
                                ") has no gold entry; ignored");
    }
  }

  for (const auto &[relation, list] : samples) {
    Metrics mean;
    for (const Metrics &m : list) {
      mean.precision += m.precision;
      mean.recall += m.recall;
      mean.f1 += m.f1;
    }
    const auto n = static_cast<double>(list.size());
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    mean.support = list.size();
    report.per_relation.emplace(relation, mean);
  }
  if (!report.per_relation.empty()) {
    for (const auto &[relation, m] : report.per_relation) {
      report.overall.precision += m.precision;
      report.overall.recall += m.recall;
      report.overall.f1 += m.f1;
      report.overall.support += m.support;
    }
    const auto r = static_cast<double>(report.per_relation.size());
    report.overall.precision /= r;
    report.overall.recall /= r;
    report.overall.f1 /= r;
  }
  return report;
}

RunReport ScoreRunFiles(const std::filesystem::path &predictions,
                        const std::filesystem::path &gold,
                        const ScoreOptions &options) {
  auto pred = LoadSamples(predictions);
  auto truth = LoadSamples(gold);
  return ScoreRun(pred, truth, options);
}

std::string RenderTable(const RunReport &report) {
  size_t width = std::string_view("Relation").size();
  for (const auto &[relation, m] : report.per_relation) {
    width = std::max(width, relation.size());
  }
  auto pad = [&](const std::string &s) {
    return s + std::string(width - std::min(width, s.size()) + 2, ' ');
  };
  std::string out = pad("Relation") + "Precision  Recall  F1     Support\n";
  auto row = [&](const std::string &name, const Metrics &m) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-9s  %-6s  %-5s  %zu\n",
                  Fixed3(m.precision).c_str(), Fixed3(m.recall).c_str(),
                  Fixed3(m.f1).c_str(), m.support);
    out += pad(name) + buf;
  };
  for (const auto &[relation, m] : report.per_relation) row(relation, m);
  row("Average", report.overall);
  out += std::string("# ") + kReferenceFooter + "\n";
  return out;
}

std::string RenderCsv(const RunReport &report) {
  std::string out = "relation,precision,recall,f1,support\n";
  char buf[160];
  auto row = [&](const std::string &name, const Metrics &m) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%zu\n", name.c_str(),
                  m.precision, m.recall, m.f1, m.support);
    out += buf;
  };
  for (const auto &[relation, m] : report.per_relation) row(relation, m);
  row("Average", report.overall);
  return out;
}

std::string RenderJson(const RunReport &report) {
  nlohmann::ordered_json j;
  auto metrics = [](const Metrics &m) {
    nlohmann::ordered_json o;
    o["precision"] = m.precision;
    o["recall"] = m.recall;
    o["f1"] = m.f1;
    o["support"] = m.support;
    return o;
  };
  nlohmann::ordered_json rel = nlohmann::ordered_json::object();
  for (const auto &[relation, m] : report.per_relation) rel[relation] = metrics(m);
  j["relations"] = std::move(rel);
  j["average"] = metrics(report.overall);
  j["reference"] = kReferenceFooter;
  return j.dump(2) + "\n";
}

}  // namespace atomlm
