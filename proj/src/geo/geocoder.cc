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

#include "geopool/geo/geocoder.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "geopool/error.h"
#include "httplib.h"

namespace geopool::geo {

Coordinates Coordinates::Make(double lat, double lon) {
  if (!(lat >= -90.0 && lat <= 90.0)) {
    throw InvalidArgumentError("latitude out of range [-90, 90]");
  }
  if (!(lon >= -180.0 && lon <= 180.0)) {
    throw InvalidArgumentError("longitude out of range [-180, 180]");
  }
  return Coordinates(lat, lon);
}

GeoDesignation ReverseGeocode(const Coordinates& coords, const Geocoder& g) {
  GeoDesignation d = g.Lookup(coords);
  if (d.resolution() != Resolution::kCity) {
    throw InternalError("geocoder returned a partial designation: " + d.Key());
  }
  return d;
}

StubGeocoder::StubGeocoder(std::vector<BoundingBox> boxes)
    : boxes_(std::move(boxes)) {}

StubGeocoder StubGeocoder::FromJson(const nlohmann::json& table) {
  if (!table.is_array()) throw ParseError("geocoder table must be an array");
  std::vector<BoundingBox> boxes;
  boxes.reserve(table.size());
  try {
    for (const auto& row : table) {
      BoundingBox b;
      b.country = row.at("country").get<std::string>();
      b.province = row.at("province").get<std::string>();
      b.city = row.at("city").get<std::string>();
      b.lat_min = row.at("lat_min").get<double>();
      b.lat_max = row.at("lat_max").get<double>();
      b.lon_min = row.at("lon_min").get<double>();
      b.lon_max = row.at("lon_max").get<double>();
      if (b.lat_min > b.lat_max || b.lon_min > b.lon_max) {
        throw ParseError("inverted bounding box for " + b.city);
      }
      // Validates the names once up front.
      GeoDesignation::Make(b.country, b.province, b.city);
      boxes.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("geocoder table: ") + e.what());
  }
  return StubGeocoder(std::move(boxes));
}

StubGeocoder StubGeocoder::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open geocoder table " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return FromJson(j);
}

GeoDesignation StubGeocoder::Lookup(const Coordinates& coords) const {
  for (const auto& b : boxes_) {
    if (b.Contains(coords)) {
      return GeoDesignation::Make(b.country, b.province, b.city);
    }
  }
  throw NotFoundError("unknown location");
}

HttpGeocoder::HttpGeocoder(std::string host, int port, std::string path,
                           std::chrono::milliseconds timeout)
    : host_(std::move(host)),
      port_(port),
      path_(std::move(path)),
      timeout_(timeout) {}

GeoDesignation HttpGeocoder::Lookup(const Coordinates& coords) const {
  httplib::Client client(host_, port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);

  std::ostringstream target;
  target.precision(8);
  target << path_ << "?lat=" << coords.lat() << "&lon=" << coords.lon();
  auto res = client.Get(target.str());
  if (!res) {
    throw UnavailableError("geocoder unreachable: " +
                           httplib::to_string(res.error()));
  }
  if (res->status == 404) throw NotFoundError("unknown location");
  if (res->status >= 500) {
    throw UnavailableError("geocoder returned HTTP " +
                           std::to_string(res->status));
  }
  if (res->status != 200) {
    throw InternalError("geocoder returned HTTP " +
                        std::to_string(res->status));
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return GeoDesignation::Make(j.at("country").get<std::string>(),
                                j.at("province").get<std::string>(),
                                j.at("city").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("geocoder response: ") + e.what());
  }
}

}  // namespace geopool::geo
