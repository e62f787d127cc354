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

// The survey catalog: surveys own questions, questions own tags. Every answer
// a report can carry is a catalog-defined tag; there is no free-text field
// anywhere in the model.

#ifndef GEOPOOL_SURVEY_CATALOG_H_
#define GEOPOOL_SURVEY_CATALOG_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace geopool::survey {

struct Tag {
  std::string tag_id;
  std::string label;
  std::string question_id;
};

struct Question {
  std::string question_id;
  std::string text;
  std::string survey_id;
  std::vector<Tag> tags;
  bool multi_select = true;
};

struct SurveySchema {
  std::string survey_id;
  std::string name;
  std::vector<Question> questions;
};

struct Violation {
  std::string element;  // id of the offending survey/question/tag/field
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void Add(std::string element, std::string message) {
    violations.push_back({std::move(element), std::move(message)});
  }
};

// Structural checks for one survey: >= 1 question, >= 2 tags per question,
// non-empty ids and labels, ids unique within the survey, and each tag's
// question_id naming its owning question.
ValidationResult ValidateSchema(const SurveySchema& schema);

// ValidateSchema over every survey plus catalog-wide uniqueness of survey
// ids, survey names, question ids and tag ids.
ValidationResult ValidateCatalog(std::span<const SurveySchema> surveys);

// Parses the catalog file format: a top-level array of
//   {id, name, questions: [{id, text, multi_select?, tags: [{id, label}]}]}
// multi_select defaults to true. Throws kParse on malformed documents or
// unknown keys; semantic problems are left to ValidateCatalog.
std::vector<SurveySchema> ParseCatalogJson(const nlohmann::json& doc);
nlohmann::json CatalogToJson(std::span<const SurveySchema> surveys);

// Immutable, indexed catalog. Safe for concurrent reads.
class Catalog {
 public:
  struct TagRef {
    uint32_t survey;    // index into surveys()
    uint32_t question;  // index into surveys()[survey].questions
    uint32_t tag;       // index into that question's tags
    uint32_t dense;     // catalog-wide tag index, 0..tag_count()-1
  };

  // Throws kInvalidArgument carrying the first violations if the catalog
  // does not pass ValidateCatalog.
  static Catalog Create(std::vector<SurveySchema> surveys);
  static Catalog FromJson(const nlohmann::json& doc);
  static Catalog FromFile(const std::string& path);

  const std::vector<SurveySchema>& surveys() const { return surveys_; }
  // Content hash of the canonical catalog document (16 hex digits).
  const std::string& version() const { return version_; }

  const TagRef* FindTag(std::string_view tag_id) const;
  const Question* FindQuestion(std::string_view question_id) const;
  const SurveySchema* FindSurvey(std::string_view survey_id) const;
  const SurveySchema* FindSurveyByName(std::string_view name) const;

  const Tag& tag(const TagRef& ref) const {
    return surveys_[ref.survey].questions[ref.question].tags[ref.tag];
  }
  const Tag& tag_by_dense(uint32_t dense) const { return tag(dense_[dense]); }
  const TagRef& ref_by_dense(uint32_t dense) const { return dense_[dense]; }
  size_t tag_count() const { return dense_.size(); }

  nlohmann::json ToJson() const;

 private:
  Catalog() = default;

  std::vector<SurveySchema> surveys_;
  std::string version_;
  std::vector<TagRef> dense_;
  std::unordered_map<std::string, uint32_t> tag_index_;  // -> dense
  std::unordered_map<std::string, std::pair<uint32_t, uint32_t>> question_index_;
  std::unordered_map<std::string, uint32_t> survey_index_;
};

}  // namespace geopool::survey

#endif  // GEOPOOL_SURVEY_CATALOG_H_
