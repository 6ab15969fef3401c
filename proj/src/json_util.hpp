// Copyright 2026 The detfuse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Shared JSON helpers for the file-format code. Not installed.

#include <cmath>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "detfuse/error.hpp"
#include "detfuse/geometry.hpp"
#include "detfuse/types.hpp"

namespace detfuse::detail {

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    // parse errors and numeric overflow alike
    throw Error(ErrorCode::kMalformedFile, std::string(what) + ": " + e.what());
  }
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::kMalformedFile, where + ": missing key '" + key + "'");
  }
  return *it;
}

inline std::int64_t as_int(const Json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  throw Error(ErrorCode::kMalformedFile, where + ": expected an integer");
}

inline double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw Error(ErrorCode::kMalformedFile, where + ": expected a number");
  return v.get<double>();
}

inline BoundingBox as_box(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) {
    throw Error(ErrorCode::kMalformedFile, where + ": bbox must be [x,y,w,h]");
  }
  BoundingBox b{as_number(v[0], where), as_number(v[1], where),
                as_number(v[2], where), as_number(v[3], where)};
  if (!is_valid(b)) {
    throw Error(ErrorCode::kInvalidBox, where + ": bbox must be finite with w > 0 and h > 0");
  }
  return b;
}

inline Json box_json(const BoundingBox& b) { return Json::array({b.x, b.y, b.w, b.h}); }

// DENTEX category fields -> 1-based triple.
inline CategoryTriple parse_category(const Json& obj, const std::string& where) {
  CategoryTriple c;
  const bool triple = obj.contains("category_id_1") || obj.contains("category_id_2") ||
                      obj.contains("category_id_3");
  auto bad = [&](const std::string& what) {
    return Error(ErrorCode::kInvalidCategory, where + ": " + what);
  };
  if (triple) {
    if (auto it = obj.find("category_id_1"); it != obj.end() && !it->is_null()) {
      const std::int64_t q = as_int(*it, where);
      if (q < 0 || q >= kQuadrantCount) throw bad("category_id_1 out of range 0..3");
      c.quadrant = static_cast<int>(q) + 1;
    }
    if (auto it = obj.find("category_id_2"); it != obj.end() && !it->is_null()) {
      const std::int64_t t = as_int(*it, where);
      if (t < 0 || t >= kTeethPerQuadrant) throw bad("category_id_2 out of range 0..7");
      c.enumeration = static_cast<int>(t) + 1;
    }
    if (auto it = obj.find("category_id_3"); it != obj.end() && !it->is_null()) {
      auto d = disease_from_index(as_int(*it, where));
      if (!d) throw bad("category_id_3 out of range 0..3");
      c.disease = d;
    }
  } else if (auto it = obj.find("category_id"); it != obj.end()) {
    const std::int64_t id = as_int(*it, where);
    if (id < 0 || id >= kQuadrantCount * kTeethPerQuadrant) {
      throw bad("category_id out of range 0..31");
    }
    c.quadrant = static_cast<int>(id / kTeethPerQuadrant) + 1;
    c.enumeration = static_cast<int>(id % kTeethPerQuadrant) + 1;
  }
  if (!is_valid(c)) throw bad("no category axis present");
  return c;
}

inline void write_category(Json& obj, const CategoryTriple& c) {
  if (c.quadrant) obj["category_id_1"] = *c.quadrant - 1;
  if (c.enumeration) obj["category_id_2"] = *c.enumeration - 1;
  if (c.disease) obj["category_id_3"] = disease_index(*c.disease);
}

}  // namespace detfuse::detail
