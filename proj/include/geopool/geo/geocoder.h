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

// Reverse geocoding lives on its own channel: coordinates go to a geocoder
// and only the resulting coarse designation is ever attached to a report.
// Nothing outside this header (and the client) can hold a Coordinates value.

#ifndef GEOPOOL_GEO_GEOCODER_H_
#define GEOPOOL_GEO_GEOCODER_H_

#include <chrono>
#include <string>
#include <vector>

#include "geopool/geo/designation.h"
#include "json.hpp"

namespace geopool::geo {

class Coordinates {
 public:
  // Throws kInvalidArgument outside [-90, 90] x [-180, 180] or on NaN.
  static Coordinates Make(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

 private:
  Coordinates(double lat, double lon) : lat_(lat), lon_(lon) {}
  double lat_;
  double lon_;
};

// Resolves coordinates to a CITY-resolution designation. Implementations
// throw kNotFound for points outside their coverage and kUnavailable when the
// backing service cannot be reached. Must be safe to call concurrently.
class Geocoder {
 public:
  virtual ~Geocoder() = default;
  virtual GeoDesignation Lookup(const Coordinates& coords) const = 0;
};

// Validates the result is fully populated before handing it back.
GeoDesignation ReverseGeocode(const Coordinates& coords, const Geocoder& g);

struct BoundingBox {
  std::string country;
  std::string province;
  std::string city;
  double lat_min = 0;
  double lat_max = 0;
  double lon_min = 0;
  double lon_max = 0;

  bool Contains(const Coordinates& c) const {
    return c.lat() >= lat_min && c.lat() <= lat_max && c.lon() >= lon_min &&
           c.lon() <= lon_max;
  }
};

// Offline geocoder over a bounding-box table. First match in document order
// wins. Immutable after construction.
class StubGeocoder : public Geocoder {
 public:
  explicit StubGeocoder(std::vector<BoundingBox> boxes);

  // JSON array of {country, province, city, lat_min, lat_max, lon_min,
  // lon_max}. Throws kParse on malformed input.
  static StubGeocoder FromJson(const nlohmann::json& table);
  static StubGeocoder FromFile(const std::string& path);

  GeoDesignation Lookup(const Coordinates& coords) const override;

  const std::vector<BoundingBox>& boxes() const { return boxes_; }

 private:
  std::vector<BoundingBox> boxes_;
};

// Client for a remote reverse-geocoding service speaking
//   GET <path>?lat=<deg>&lon=<deg>  ->  200 {"country","province","city"}
// with 404 meaning "outside coverage". Connection failures and 5xx map to
// kUnavailable. Opens a connection per lookup, so one instance can be
// shared across threads.
class HttpGeocoder : public Geocoder {
 public:
  HttpGeocoder(std::string host, int port, std::string path = "/reverse",
               std::chrono::milliseconds timeout = std::chrono::seconds(5));

  GeoDesignation Lookup(const Coordinates& coords) const override;

 private:
  std::string host_;
  int port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

}  // namespace geopool::geo

#endif  // GEOPOOL_GEO_GEOCODER_H_
