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

// Named aggregates shared by the HTTP API and the CLI.
//
//   tag-counts          [country, province, city, survey]
//   cooccurrence        qa, qb
//   tags-per-report     [above]  (default 80)
//   surveys-per-report  histogram plus the geometric null for it
//   geometric-null      n_max, total
//   geography           [level = country|province|city, country, province]

#ifndef GEOPOOL_ANALYTICS_AGGREGATE_H_
#define GEOPOOL_ANALYTICS_AGGREGATE_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geopool/analytics/analytics.h"
#include "json.hpp"

namespace geopool::analytics {

using AggregateParams = std::map<std::string, std::string>;

const std::vector<std::string>& AggregateNames();

// Throws kNotFound for an unknown aggregate and kInvalidArgument for bad or
// unexpected parameters.
nlohmann::json RunAggregate(const Analyzer& analyzer, std::string_view name,
                            const AggregateParams& params);

// Flattens a RunAggregate result for `name` into CSV with a header row.
std::string AggregateCsv(std::string_view name, const nlohmann::json& result);

}  // namespace geopool::analytics

#endif  // GEOPOOL_ANALYTICS_AGGREGATE_H_
