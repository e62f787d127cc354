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

#include "geopool/sim/fixture.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "geopool/error.h"
#include "geopool/geo/designation.h"
#include "geopool/ingest/report_io.h"
#include "geopool/release/report_id.h"
#include "geopool/sim/random.h"

namespace geopool::sim {

namespace {

using nlohmann::json;

void CheckKeys(const json& j, const std::set<std::string>& allowed,
               const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) {
      throw ParseError("unknown field '" + k + "' in " + where);
    }
  }
}

PlaceSpec ParsePlace(const json& j, const std::string& where, int depth) {
  CheckKeys(j, depth < 2 ? std::set<std::string>{"count", "provinces", "cities"}
                         : std::set<std::string>{"count"},
            where);
  PlaceSpec p;
  p.count = j.at("count").get<uint64_t>();
  const char* child_key = depth == 0 ? "provinces" : "cities";
  const char* other_key = depth == 0 ? "cities" : "provinces";
  if (j.contains(other_key)) {
    throw ParseError("'" + std::string(other_key) + "' not allowed in " + where);
  }
  if (j.contains(child_key)) {
    for (const auto& [name, v] : j.at(child_key).items()) {
      if (depth == 1) {
        // Cities are plain counts.
        p.children[name].count = v.get<uint64_t>();
      } else {
        p.children[name] = ParsePlace(v, where + "/" + name, depth + 1);
      }
    }
  }
  return p;
}

// Selectable slots of a question set: one per single-select question with
// an allowed tag, one per allowed tag of a multi-select question.
struct Constraint {
  std::set<std::string> forced;
  std::set<std::string> excluded_tags;
  std::set<std::string> excluded_questions;
};

size_t AvailableSlots(const survey::SurveySchema& s, const Constraint& c) {
  size_t n = 0;
  for (const auto& q : s.questions) {
    if (c.excluded_questions.contains(q.question_id)) continue;
    size_t allowed = 0;
    for (const auto& t : q.tags) allowed += !c.excluded_tags.contains(t.tag_id);
    n += q.multi_select ? allowed : (allowed > 0 ? 1 : 0);
  }
  return n;
}

// Picks `count` tags from `s` honoring `c`. Forced tags are always included.
std::vector<std::string> PickTags(const survey::SurveySchema& s, size_t count,
                                  const Constraint& c, Rng& rng) {
  struct Slot {
    std::vector<std::string> candidates;
  };
  std::vector<std::string> chosen;
  std::vector<Slot> open;
  for (const auto& q : s.questions) {
    if (c.excluded_questions.contains(q.question_id)) continue;
    std::vector<std::string> allowed;
    bool forced_here = false;
    for (const auto& t : q.tags) {
      if (c.forced.contains(t.tag_id)) {
        chosen.push_back(t.tag_id);
        forced_here = true;
      } else if (!c.excluded_tags.contains(t.tag_id)) {
        allowed.push_back(t.tag_id);
      }
    }
    if (q.multi_select) {
      for (auto& t : allowed) open.push_back({{std::move(t)}});
    } else if (!forced_here && !allowed.empty()) {
      open.push_back({std::move(allowed)});
    }
  }
  if (chosen.size() > count || chosen.size() + open.size() < count) {
    throw FailedPreconditionError("cannot place " + std::to_string(count) +
                                  " tags in survey '" + s.survey_id + "'");
  }
  Shuffle(open.begin(), open.end(), rng);
  for (size_t i = 0; chosen.size() < count; ++i) {
    const auto& cand = open[i].candidates;
    chosen.push_back(cand[UniformInt(rng, cand.size())]);
  }
  return chosen;
}

// Gale-Ryser: can surveys with `remaining` counts be spread over reports
// with degree histogram `degrees` (n -> reports), each report taking each
// survey at most once?
bool Realizable(std::vector<uint64_t> remaining,
                const std::map<uint32_t, uint64_t>& degrees) {
  std::sort(remaining.rbegin(), remaining.rend());
  uint64_t total_degree = 0;
  for (const auto& [d, n] : degrees) total_degree += d * n;
  if (std::accumulate(remaining.begin(), remaining.end(), uint64_t{0}) !=
      total_degree) {
    return false;
  }
  uint64_t lhs = 0;
  for (size_t k = 1; k <= remaining.size(); ++k) {
    lhs += remaining[k - 1];
    uint64_t rhs = 0;
    for (const auto& [d, n] : degrees) rhs += std::min<uint64_t>(d, k) * n;
    if (lhs > rhs) return false;
  }
  return true;
}

// Survey index sets, one per report, meeting counts and the histogram.
std::vector<std::vector<uint32_t>> AssignSurveys(
    std::vector<uint64_t> remaining, std::map<uint32_t, uint64_t> degrees,
    Rng& rng) {
  std::vector<uint32_t> order;
  for (auto it = degrees.rbegin(); it != degrees.rend(); ++it) {
    order.insert(order.end(), it->second, it->first);
  }
  std::vector<std::vector<uint32_t>> sets;
  sets.reserve(order.size());
  const uint32_t s_count = static_cast<uint32_t>(remaining.size());
  for (uint32_t d : order) {
    if (--degrees[d] == 0) degrees.erase(d);
    std::vector<uint32_t> pick;
    // Weighted draws first; fall back to the largest remaining counts,
    // which always keeps a realizable state realizable.
    for (int attempt = 0; attempt < 8 && pick.empty(); ++attempt) {
      std::vector<uint64_t> w = remaining;
      std::vector<uint32_t> trial;
      for (uint32_t i = 0; i < d; ++i) {
        const uint64_t sum = std::accumulate(w.begin(), w.end(), uint64_t{0});
        if (sum == 0) break;
        uint64_t x = UniformInt(rng, sum);
        uint32_t s = 0;
        while (x >= w[s]) x -= w[s++];
        trial.push_back(s);
        w[s] = 0;
      }
      if (trial.size() != d) continue;
      auto after = remaining;
      for (uint32_t s : trial) --after[s];
      if (Realizable(after, degrees)) pick = std::move(trial);
    }
    if (pick.empty()) {
      std::vector<uint32_t> idx(s_count);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
        return remaining[a] > remaining[b];
      });
      pick.assign(idx.begin(), idx.begin() + d);
    }
    for (uint32_t s : pick) --remaining[s];
    std::sort(pick.begin(), pick.end());
    sets.push_back(std::move(pick));
  }
  Shuffle(sets.begin(), sets.end(), rng);
  return sets;
}

// Discretized lognormal: P(n = j) proportional to F(j + 1/2) - F(j - 1/2),
// truncated to [lo, hi].
class TagLengthModel {
 public:
  TagLengthModel(double mu, double sigma, uint32_t max_cap) : cdf_(max_cap + 2) {
    for (uint32_t j = 0; j < cdf_.size(); ++j) {
      // cdf_[j] = F(j + 1/2).
      const double x = j + 0.5;
      cdf_[j] = 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0)));
    }
    for (uint32_t j = 0; j < cdf_.size(); ++j) {
      const double p = cdf_[j] - (j == 0 ? 0.0 : cdf_[j - 1]);
      first_moment_.push_back((j == 0 ? 0.0 : first_moment_.back()) + j * p);
    }
  }

  double Mass(uint32_t lo, uint32_t hi) const { return Cdf(hi) - Cdf(lo - 1); }

  // Expected value and P(n > above) on [lo, hi].
  std::pair<double, double> Moments(uint32_t lo, uint32_t hi,
                                    uint32_t above) const {
    const double z = Mass(lo, hi);
    if (z <= 1e-300) {
      const double v = Degenerate(lo, hi);
      return {v, v > above ? 1.0 : 0.0};
    }
    const double mean = (first_moment_[hi] - first_moment_[lo - 1]) / z;
    const double tail = above >= hi ? 0.0 : Mass(std::max(lo, above + 1), hi) / z;
    return {mean, tail};
  }

  uint32_t Draw(uint32_t lo, uint32_t hi, Rng& rng) const {
    const double z = Mass(lo, hi);
    if (z <= 1e-300) return static_cast<uint32_t>(Degenerate(lo, hi));
    const double target = Cdf(lo - 1) + Uniform01(rng) * z;
    auto it = std::lower_bound(cdf_.begin() + lo, cdf_.begin() + hi, target);
    return static_cast<uint32_t>(it - cdf_.begin());
  }

 private:
  double Cdf(uint32_t j) const { return cdf_[j]; }
  // All mass fell outside [lo, hi]: it sits at the nearer end.
  double Degenerate(uint32_t lo, uint32_t hi) const {
    return Cdf(lo - 1) >= 0.5 ? lo : hi;
  }

  std::vector<double> cdf_;
  std::vector<double> first_moment_;
};

struct Bounds {
  uint32_t lo, hi;
  uint64_t reports;
};

std::pair<double, double> Expected(const TagLengthModel& m,
                                   const std::vector<Bounds>& groups,
                                   uint32_t above) {
  double mean = 0, tail = 0, n = 0;
  for (const auto& g : groups) {
    auto [gm, gt] = m.Moments(g.lo, g.hi, above);
    mean += gm * g.reports;
    tail += gt * g.reports;
    n += g.reports;
  }
  return {mean / n, tail / n};
}

TagModel Calibrate(const FixtureSpec& spec, const std::vector<Bounds>& groups,
                   uint32_t max_cap) {
  auto fit_mu = [&](double sigma) {
    double lo = -5, hi = 10;
    for (int i = 0; i < 80; ++i) {
      const double mid = (lo + hi) / 2;
      TagLengthModel m(mid, sigma, max_cap);
      (Expected(m, groups, spec.tail_above).first < spec.mean_tags ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
  };
  auto evaluate = [&](double sigma) {
    TagModel t{fit_mu(sigma), sigma, 0, 0};
    TagLengthModel m(t.mu, sigma, max_cap);
    std::tie(t.expected_mean, t.expected_tail) =
        Expected(m, groups, spec.tail_above);
    return t;
  };

  double s_lo = 0.05, s_hi = 2.5;
  TagModel lo = evaluate(s_lo), hi = evaluate(s_hi);
  auto mean_ok = [&](const TagModel& t) {
    return std::abs(t.expected_mean - spec.mean_tags) < 1e-3 * spec.mean_tags;
  };
  if (!mean_ok(lo) || !mean_ok(hi)) {
    throw FailedPreconditionError(
        "mean tags per report is out of reach for this catalog and survey mix");
  }
  if (spec.tail_fraction < lo.expected_tail ||
      spec.tail_fraction > hi.expected_tail) {
    throw FailedPreconditionError(
        "tail fraction above " + std::to_string(spec.tail_above) +
        " is out of reach for this catalog and survey mix");
  }
  for (int i = 0; i < 50; ++i) {
    const double mid = (s_lo + s_hi) / 2;
    TagModel t = evaluate(mid);
    if (t.expected_tail < spec.tail_fraction) {
      s_lo = mid;
      lo = t;
    } else {
      s_hi = mid;
      hi = t;
    }
  }
  return evaluate((s_lo + s_hi) / 2);
}

struct Place {
  std::string country;
  std::optional<std::string> province, city;
};

std::vector<Place> ExpandPlaces(const FixtureSpec& spec) {
  std::vector<Place> out;
  for (const auto& [country, c] : spec.countries) {
    uint64_t in_provinces = 0;
    for (const auto& [province, p] : c.children) {
      uint64_t in_cities = 0;
      for (const auto& [city, ci] : p.children) {
        out.insert(out.end(), ci.count, {country, province, city});
        in_cities += ci.count;
      }
      out.insert(out.end(), p.count - in_cities, {country, province, {}});
      in_provinces += p.count;
    }
    out.insert(out.end(), c.count - in_provinces, {country, {}, {}});
  }
  return out;
}

enum class PinRole { kNone, kPair, kBothOther, kNotBoth };

}  // namespace

FixtureSpec ParseFixtureSpec(const json& j) {
  try {
    CheckKeys(j,
              {"total_reports", "seed", "start_date", "span_days",
               "survey_counts", "surveys_per_report", "tags_per_report",
               "countries", "pinned_cooccurrence"},
              "fixture spec");
    FixtureSpec s;
    s.total_reports = j.at("total_reports").get<uint64_t>();
    s.seed = j.value("seed", uint64_t{1});
    s.start_date = std::chrono::floor<std::chrono::days>(
        ingest::ParseReleaseTime(j.value("start_date", "2012-01-01")));
    s.span_days = j.value("span_days", 1u);
    s.survey_counts = j.at("survey_counts").get<std::map<std::string, uint64_t>>();
    for (const auto& [n, c] : j.at("surveys_per_report").items()) {
      size_t used = 0;
      const int v = std::stoi(n, &used);
      if (used != n.size() || v < 1) {
        throw ParseError("surveys_per_report key '" + n + "' is not a count");
      }
      s.surveys_per_report[static_cast<uint32_t>(v)] = c.get<uint64_t>();
    }
    if (j.contains("tags_per_report")) {
      const auto& t = j.at("tags_per_report");
      CheckKeys(t, {"mean", "above", "fraction_above"}, "tags_per_report");
      s.mean_tags = t.at("mean").get<double>();
      s.tail_above = t.value("above", 80u);
      s.tail_fraction = t.at("fraction_above").get<double>();
    }
    for (const auto& [name, v] : j.at("countries").items()) {
      s.countries[name] = ParsePlace(v, name, 0);
    }
    if (j.contains("pinned_cooccurrence")) {
      const auto& p = j.at("pinned_cooccurrence");
      CheckKeys(p, {"question_a", "tag_a", "question_b", "tag_b", "base", "pair"},
                "pinned_cooccurrence");
      s.pinned = PinnedCooccurrence{
          p.at("question_a").get<std::string>(), p.at("tag_a").get<std::string>(),
          p.at("question_b").get<std::string>(), p.at("tag_b").get<std::string>(),
          p.at("base").get<uint64_t>(), p.at("pair").get<uint64_t>()};
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad fixture spec: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ParseError("bad fixture spec: surveys_per_report key is not a count");
  } catch (const std::out_of_range&) {
    throw ParseError("bad fixture spec: surveys_per_report key out of range");
  }
}

std::vector<std::string> CheckFixtureSpec(const FixtureSpec& spec,
                                          const survey::Catalog& catalog) {
  std::vector<std::string> errors;
  auto sum = [](const auto& m) {
    uint64_t t = 0;
    for (const auto& [k, v] : m) t += v;
    return t;
  };
  const size_t s_count = catalog.surveys().size();

  uint64_t survey_total = 0;
  std::vector<uint64_t> counts(s_count, 0);
  for (const auto& [name, c] : spec.survey_counts) {
    const auto* s = catalog.FindSurveyByName(name);
    if (s == nullptr) {
      errors.push_back("unknown survey '" + name + "'");
      continue;
    }
    counts[s - catalog.surveys().data()] = c;
    survey_total += c;
    if (c > spec.total_reports) {
      errors.push_back("survey '" + name + "' count " + std::to_string(c) +
                       " exceeds total_reports " +
                       std::to_string(spec.total_reports));
    }
  }
  const uint64_t hist_reports = sum(spec.surveys_per_report);
  uint64_t hist_surveys = 0;
  for (const auto& [n, c] : spec.surveys_per_report) {
    hist_surveys += n * c;
    if (n > s_count && c > 0) {
      errors.push_back("surveys_per_report has " + std::to_string(c) +
                       " reports with " + std::to_string(n) +
                       " surveys but the catalog has " + std::to_string(s_count));
    }
  }
  if (hist_reports != spec.total_reports) {
    errors.push_back("surveys_per_report sums to " + std::to_string(hist_reports) +
                     " reports, total_reports is " +
                     std::to_string(spec.total_reports));
  }
  if (hist_surveys != survey_total) {
    errors.push_back("surveys_per_report implies " + std::to_string(hist_surveys) +
                     " survey responses, survey_counts sum to " +
                     std::to_string(survey_total));
  }
  if (errors.empty() && !Realizable(counts, spec.surveys_per_report)) {
    errors.push_back(
        "survey_counts cannot be spread over surveys_per_report without "
        "repeating a survey within a report");
  }

  const uint64_t country_total = sum([&] {
    std::map<std::string, uint64_t> m;
    for (const auto& [k, v] : spec.countries) m[k] = v.count;
    return m;
  }());
  if (country_total != spec.total_reports) {
    errors.push_back("country counts sum to " + std::to_string(country_total) +
                     ", total_reports is " + std::to_string(spec.total_reports));
  }
  std::set<std::string> seen_keys;
  for (const auto& [country, c] : spec.countries) {
    auto check_name = [&](const std::string& path, const std::string& name) {
      try {
        geo::NormalizePlaceName(name);
      } catch (const Error& e) {
        errors.push_back("place '" + path + "': " + e.what());
      }
    };
    check_name(country, country);
    uint64_t p_sum = 0;
    for (const auto& [province, p] : c.children) {
      const std::string path = country + "/" + province;
      check_name(path, province);
      p_sum += p.count;
      uint64_t c_sum = 0;
      for (const auto& [city, ci] : p.children) {
        check_name(path + "/" + city, city);
        c_sum += ci.count;
      }
      if (c_sum > p.count) {
        errors.push_back("cities of '" + path + "' sum to " +
                         std::to_string(c_sum) + ", more than its count " +
                         std::to_string(p.count));
      }
    }
    if (p_sum > c.count) {
      errors.push_back("provinces of '" + country + "' sum to " +
                       std::to_string(p_sum) + ", more than its count " +
                       std::to_string(c.count));
    }
  }
  // Distinct spellings must not normalize to the same place.
  for (const auto& [country, c] : spec.countries) {
    try {
      if (!seen_keys.insert(geo::NormalizePlaceName(country)).second) {
        errors.push_back("country '" + country + "' is listed twice");
      }
    } catch (const Error&) {
    }
  }

  if (!(spec.mean_tags > 0)) errors.push_back("tags_per_report.mean must be > 0");
  if (!(spec.tail_fraction >= 0 && spec.tail_fraction < 1)) {
    errors.push_back("tags_per_report.fraction_above must be in [0, 1)");
  }
  if (spec.span_days < 1) errors.push_back("span_days must be >= 1");

  if (spec.pinned) {
    const auto& p = *spec.pinned;
    const auto* qa = catalog.FindQuestion(p.question_a);
    const auto* qb = catalog.FindQuestion(p.question_b);
    const auto* ta = catalog.FindTag(p.tag_a);
    const auto* tb = catalog.FindTag(p.tag_b);
    if (qa == nullptr) errors.push_back("unknown question '" + p.question_a + "'");
    if (qb == nullptr) errors.push_back("unknown question '" + p.question_b + "'");
    if (ta == nullptr || catalog.tag(*ta).question_id != p.question_a) {
      errors.push_back("tag_a '" + p.tag_a + "' is not in " + p.question_a);
    }
    if (tb == nullptr || catalog.tag(*tb).question_id != p.question_b) {
      errors.push_back("tag_b '" + p.tag_b + "' is not in " + p.question_b);
    }
    if (qa && qb) {
      if (qa == qb) errors.push_back("pinned questions must differ");
      if (qa->survey_id != qb->survey_id) {
        errors.push_back("pinned questions must belong to the same survey");
      } else {
        const auto* s = catalog.FindSurvey(qa->survey_id);
        const uint64_t available = counts[s - catalog.surveys().data()];
        if (p.base > available) {
          errors.push_back("pinned base " + std::to_string(p.base) +
                           " exceeds the " + std::to_string(available) +
                           " reports of survey '" + s->name + "'");
        }
      }
    }
    if (p.pair > p.base) {
      errors.push_back("pinned pair " + std::to_string(p.pair) +
                       " exceeds pinned base " + std::to_string(p.base));
    }
  }
  return errors;
}

Fixture GenerateFixture(const FixtureSpec& spec,
                        const survey::Catalog& catalog) {
  if (auto errors = CheckFixtureSpec(spec, catalog); !errors.empty()) {
    std::string msg = "inconsistent fixture spec:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw InvalidArgumentError(msg);
  }
  Fixture out;
  if (spec.total_reports == 0) return out;
  Rng rng(spec.seed);
  const auto& surveys = catalog.surveys();

  std::vector<uint64_t> counts(surveys.size(), 0);
  for (const auto& [name, c] : spec.survey_counts) {
    counts[catalog.FindSurveyByName(name) - surveys.data()] = c;
  }
  auto sets = AssignSurveys(counts, spec.surveys_per_report, rng);
  auto places = ExpandPlaces(spec);
  Shuffle(places.begin(), places.end(), rng);

  // Tag lengths.
  std::vector<uint32_t> survey_cap(surveys.size());
  for (size_t s = 0; s < surveys.size(); ++s) {
    survey_cap[s] = static_cast<uint32_t>(AvailableSlots(surveys[s], {}));
  }
  const size_t n = sets.size();
  std::vector<uint32_t> lo(n), hi(n);
  std::map<std::pair<uint32_t, uint32_t>, uint64_t> group_counts;
  uint32_t max_cap = 1;
  for (size_t r = 0; r < n; ++r) {
    lo[r] = static_cast<uint32_t>(sets[r].size());
    hi[r] = 0;
    for (uint32_t s : sets[r]) hi[r] += survey_cap[s];
    max_cap = std::max(max_cap, hi[r]);
    ++group_counts[{lo[r], hi[r]}];
  }
  std::vector<Bounds> groups;
  for (const auto& [b, c] : group_counts) groups.push_back({b.first, b.second, c});
  out.tag_model = Calibrate(spec, groups, max_cap);
  TagLengthModel model(out.tag_model.mu, out.tag_model.sigma, max_cap);

  // Per-survey shares of each report's length.
  std::vector<std::vector<uint32_t>> shares(n);
  for (size_t r = 0; r < n; ++r) {
    const uint32_t len = model.Draw(lo[r], hi[r], rng);
    auto& share = shares[r];
    share.assign(sets[r].size(), 1);
    for (uint32_t left = len - lo[r]; left > 0; --left) {
      uint64_t room = 0;
      for (size_t i = 0; i < share.size(); ++i) room += survey_cap[sets[r][i]] - share[i];
      uint64_t x = UniformInt(rng, room);
      size_t i = 0;
      while (x >= survey_cap[sets[r][i]] - share[i]) {
        x -= survey_cap[sets[r][i]] - share[i];
        ++i;
      }
      ++share[i];
    }
  }

  // Pinned co-occurrence roles.
  std::vector<PinRole> roles(n, PinRole::kNone);
  std::optional<uint32_t> pin_survey;
  Constraint pair_c, other_a, other_b, drop_a, drop_b;
  if (spec.pinned) {
    const auto& p = *spec.pinned;
    pin_survey = static_cast<uint32_t>(
        catalog.FindSurvey(catalog.FindQuestion(p.question_a)->survey_id) -
        surveys.data());
    pair_c.forced = {p.tag_a, p.tag_b};
    other_a.excluded_tags = {p.tag_b};  // tag_a chosen, so never tag_b
    other_b.excluded_tags = {p.tag_a};
    drop_a.excluded_questions = {p.question_a};
    drop_b.excluded_questions = {p.question_b};
    const auto& ps = surveys[*pin_survey];
    const size_t both_cap =
        std::min(AvailableSlots(ps, other_a), AvailableSlots(ps, other_b));
    const size_t none_cap =
        std::max(AvailableSlots(ps, drop_a), AvailableSlots(ps, drop_b));

    const size_t pair_cap = AvailableSlots(ps, pair_c);

    // Feasible roles per report as a bitmask over kPair, kBothOther,
    // kNotBoth; reports are bucketed by mask and the most constrained
    // buckets draw first.
    constexpr unsigned kP = 1, kO = 2, kN = 4;
    std::vector<std::vector<size_t>> by_mask(8);
    for (size_t r = 0; r < n; ++r) {
      auto it = std::find(sets[r].begin(), sets[r].end(), *pin_survey);
      if (it == sets[r].end()) continue;
      const uint32_t share = shares[r][it - sets[r].begin()];
      unsigned mask = 0;
      if (share >= 2 && share <= pair_cap) mask |= kP;
      if (share >= 2 && share <= both_cap) mask |= kO;
      if (share <= none_cap) mask |= kN;
      if (mask == 0) {
        throw FailedPreconditionError("report cannot satisfy pinned roles");
      }
      by_mask[mask].push_back(r);
    }
    uint64_t quota[3] = {p.pair, p.base - p.pair, 0};
    uint64_t members = 0;
    for (const auto& b : by_mask) members += b.size();
    if (members < p.base) {
      throw FailedPreconditionError("pinned base " + std::to_string(p.base) +
                                    " exceeds reports in its survey");
    }
    quota[2] = members - p.base;
    const PinRole kRoles[3] = {PinRole::kPair, PinRole::kBothOther,
                               PinRole::kNotBoth};
    for (unsigned mask : {1u, 2u, 4u, 3u, 5u, 6u, 7u}) {
      auto& bucket = by_mask[mask];
      Shuffle(bucket.begin(), bucket.end(), rng);
      for (size_t r : bucket) {
        // Among allowed roles with quota left, take the one with the most
        // quota remaining.
        int best = -1;
        for (int i = 0; i < 3; ++i) {
          if ((mask >> i & 1u) && quota[i] > 0 &&
              (best < 0 || quota[i] > quota[best])) {
            best = i;
          }
        }
        if (best < 0) {
          throw FailedPreconditionError(
              "pinned base " + std::to_string(p.base) + " and pair " +
              std::to_string(p.pair) + " are out of reach for the drawn tag lengths");
        }
        --quota[best];
        roles[r] = kRoles[best];
      }
    }
  }

  release::ReportIdGenerator ids(spec.seed);
  out.reports.reserve(n);
  for (size_t r = 0; r < n; ++r) {
    std::vector<std::string> tags;
    for (size_t i = 0; i < sets[r].size(); ++i) {
      const auto& s = surveys[sets[r][i]];
      Constraint c;
      if (pin_survey && sets[r][i] == *pin_survey) {
        const auto& p = *spec.pinned;
        switch (roles[r]) {
          case PinRole::kPair:
            c = pair_c;
            break;
          case PinRole::kBothOther: {
            // One tag from each question, never the pinned pair together.
            const auto* qa = catalog.FindQuestion(p.question_a);
            const auto& a_pick = qa->tags[UniformInt(rng, qa->tags.size())].tag_id;
            c = a_pick == p.tag_a ? other_a : other_b;
            std::vector<std::string> b_allowed;
            for (const auto& t : catalog.FindQuestion(p.question_b)->tags) {
              if (!c.excluded_tags.contains(t.tag_id)) b_allowed.push_back(t.tag_id);
            }
            c.forced = {a_pick, b_allowed[UniformInt(rng, b_allowed.size())]};
            break;
          }
          case PinRole::kNotBoth: {
            const bool keep_a = AvailableSlots(s, drop_b) >= shares[r][i] &&
                                (AvailableSlots(s, drop_a) < shares[r][i] ||
                                 UniformInt(rng, 2) == 0);
            c = keep_a ? drop_b : drop_a;
            break;
          }
          case PinRole::kNone:
            break;
        }
      }
      auto picked = PickTags(s, shares[r][i], c, rng);
      tags.insert(tags.end(), picked.begin(), picked.end());
      ++out.survey_counts[s.survey_id];
    }
    std::sort(tags.begin(), tags.end());
    ++out.surveys_per_report[static_cast<uint32_t>(sets[r].size())];

    const auto& pl = places[r];
    auto d = geo::GeoDesignation::Make(
        pl.country,
        pl.province ? std::optional<std::string_view>(*pl.province) : std::nullopt,
        pl.city ? std::optional<std::string_view>(*pl.city) : std::nullopt);
    const auto day = spec.start_date + std::chrono::days(UniformInt(rng, spec.span_days));
    out.reports.push_back({ids.Next(), std::move(tags), std::move(d),
                           std::chrono::sys_seconds(day)});
  }
  std::sort(out.reports.begin(), out.reports.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.released_at, a.report_id) <
                     std::tie(b.released_at, b.report_id);
            });
  return out;
}

}  // namespace geopool::sim
