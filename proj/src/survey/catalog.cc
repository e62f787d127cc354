// Copyright 2026 The Geopool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geopool/survey/catalog.h"

#include <openssl/sha.h>

#include <fstream>
#include <map>
#include <set>

#include "geopool/error.h"

namespace geopool::survey {

namespace {

void RequireKeys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                 std::string_view where) {
  if (!obj.is_object()) {
    throw ParseError(std::string(where) + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) {
      throw ParseError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

std::string HexPrefix(const unsigned char* bytes, size_t n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (size_t i = 0; i < n; ++i) {
    out.push_back(kHex[bytes[i] >> 4]);
    out.push_back(kHex[bytes[i] & 0xf]);
  }
  return out;
}

}  // namespace

ValidationResult ValidateSchema(const SurveySchema& schema) {
  ValidationResult result;
  const std::string& sid = schema.survey_id;
  if (sid.empty()) result.Add("<survey>", "survey id is empty");
  if (schema.name.empty()) result.Add(sid, "survey name is empty");
  if (schema.questions.empty()) result.Add(sid, "survey needs >=1 question");

  std::set<std::string> question_ids;
  std::set<std::string> tag_ids;
  for (const auto& q : schema.questions) {
    const std::string& qid = q.question_id;
    if (qid.empty()) result.Add(sid, "question id is empty");
    if (!question_ids.insert(qid).second) {
      result.Add(qid, "duplicate question id");
    }
    if (q.survey_id != sid) {
      result.Add(qid, "question does not belong to survey " + sid);
    }
    if (q.tags.size() < 2) result.Add(qid, "question needs >=2 tags");
    for (const auto& t : q.tags) {
      if (t.tag_id.empty()) result.Add(qid, "tag id is empty");
      if (t.label.empty()) result.Add(t.tag_id, "tag label is empty");
      if (t.question_id != qid) {
        result.Add(t.tag_id, "tag does not belong to question " + qid);
      }
      if (!tag_ids.insert(t.tag_id).second) {
        result.Add(t.tag_id, "duplicate tag id");
      }
    }
  }
  return result;
}

ValidationResult ValidateCatalog(std::span<const SurveySchema> surveys) {
  ValidationResult result;
  std::set<std::string> survey_ids, names;
  // id -> owning survey; same-survey reuse is ValidateSchema's to report.
  std::map<std::string, std::string> question_owner, tag_owner;
  for (const auto& s : surveys) {
    for (auto& v : ValidateSchema(s).violations) {
      result.violations.push_back(std::move(v));
    }
    if (!survey_ids.insert(s.survey_id).second) {
      result.Add(s.survey_id, "duplicate survey id");
    }
    if (!names.insert(s.name).second) {
      result.Add(s.survey_id, "duplicate survey name '" + s.name + "'");
    }
    for (const auto& q : s.questions) {
      auto [qit, qnew] = question_owner.emplace(q.question_id, s.survey_id);
      if (!qnew && qit->second != s.survey_id) {
        result.Add(q.question_id, "duplicate question id");
      }
      for (const auto& t : q.tags) {
        auto [tit, tnew] = tag_owner.emplace(t.tag_id, s.survey_id);
        if (!tnew && tit->second != s.survey_id) {
          result.Add(t.tag_id, "duplicate tag id");
        }
      }
    }
  }
  return result;
}

std::vector<SurveySchema> ParseCatalogJson(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError("catalog must be a top-level array");
  std::vector<SurveySchema> surveys;
  try {
    for (const auto& js : doc) {
      RequireKeys(js, {"id", "name", "questions"}, "survey");
      SurveySchema s;
      s.survey_id = js.at("id").get<std::string>();
      s.name = js.at("name").get<std::string>();
      for (const auto& jq : js.at("questions")) {
        RequireKeys(jq, {"id", "text", "multi_select", "tags"}, "question");
        Question q;
        q.question_id = jq.at("id").get<std::string>();
        q.text = jq.at("text").get<std::string>();
        q.survey_id = s.survey_id;
        q.multi_select = jq.value("multi_select", true);
        for (const auto& jt : jq.at("tags")) {
          RequireKeys(jt, {"id", "label"}, "tag");
          q.tags.push_back({jt.at("id").get<std::string>(),
                            jt.at("label").get<std::string>(), q.question_id});
        }
        s.questions.push_back(std::move(q));
      }
      surveys.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("catalog: ") + e.what());
  }
  return surveys;
}

nlohmann::json CatalogToJson(std::span<const SurveySchema> surveys) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& s : surveys) {
    nlohmann::json js = {{"id", s.survey_id}, {"name", s.name}};
    js["questions"] = nlohmann::json::array();
    for (const auto& q : s.questions) {
      nlohmann::json jq = {{"id", q.question_id},
                           {"text", q.text},
                           {"multi_select", q.multi_select}};
      jq["tags"] = nlohmann::json::array();
      for (const auto& t : q.tags) {
        jq["tags"].push_back({{"id", t.tag_id}, {"label", t.label}});
      }
      js["questions"].push_back(std::move(jq));
    }
    doc.push_back(std::move(js));
  }
  return doc;
}

Catalog Catalog::Create(std::vector<SurveySchema> surveys) {
  ValidationResult check = ValidateCatalog(surveys);
  if (!check.ok()) {
    std::string msg = "invalid catalog:";
    for (size_t i = 0; i < check.violations.size() && i < 5; ++i) {
      msg += " [" + check.violations[i].element + ": " +
             check.violations[i].message + "]";
    }
    throw InvalidArgumentError(msg);
  }

  Catalog c;
  c.surveys_ = std::move(surveys);
  for (uint32_t s = 0; s < c.surveys_.size(); ++s) {
    c.survey_index_.emplace(c.surveys_[s].survey_id, s);
    const auto& questions = c.surveys_[s].questions;
    for (uint32_t q = 0; q < questions.size(); ++q) {
      c.question_index_.emplace(questions[q].question_id, std::pair{s, q});
      for (uint32_t t = 0; t < questions[q].tags.size(); ++t) {
        auto dense = static_cast<uint32_t>(c.dense_.size());
        c.dense_.push_back({s, q, t, dense});
        c.tag_index_.emplace(questions[q].tags[t].tag_id, dense);
      }
    }
  }

  std::string canonical = CatalogToJson(c.surveys_).dump();
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(canonical.data()),
         canonical.size(), digest);
  c.version_ = HexPrefix(digest, 8);
  return c;
}

Catalog Catalog::FromJson(const nlohmann::json& doc) {
  return Create(ParseCatalogJson(doc));
}

Catalog Catalog::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open catalog " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return FromJson(doc);
}

const Catalog::TagRef* Catalog::FindTag(std::string_view tag_id) const {
  auto it = tag_index_.find(std::string(tag_id));
  return it == tag_index_.end() ? nullptr : &dense_[it->second];
}

const Question* Catalog::FindQuestion(std::string_view question_id) const {
  auto it = question_index_.find(std::string(question_id));
  if (it == question_index_.end()) return nullptr;
  return &surveys_[it->second.first].questions[it->second.second];
}

const SurveySchema* Catalog::FindSurvey(std::string_view survey_id) const {
  auto it = survey_index_.find(std::string(survey_id));
  return it == survey_index_.end() ? nullptr : &surveys_[it->second];
}

const SurveySchema* Catalog::FindSurveyByName(std::string_view name) const {
  for (const auto& s : surveys_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

nlohmann::json Catalog::ToJson() const {
  return {{"version", version_}, {"surveys", CatalogToJson(surveys_)}};
}

}  // namespace geopool::survey
