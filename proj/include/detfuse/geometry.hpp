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

#include <cmath>

namespace detfuse {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box in COCO xywh pixel coordinates. Sub-pixel values are
// allowed; a valid box has finite fields and strictly positive extent.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline bool is_valid(const BoundingBox& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
         std::isfinite(b.h) && b.w > 0.0 && b.h > 0.0;
}

double iou(const BoundingBox& a, const BoundingBox& b);

inline Point center(const BoundingBox& b) {
  return {b.x + b.w / 2.0, b.y + b.h / 2.0};
}

double center_distance(const BoundingBox& a, const BoundingBox& b);

inline BoundingBox translated(const BoundingBox& b, double dx, double dy) {
  return {b.x + dx, b.y + dy, b.w, b.h};
}

// Clips `b` to [0,width]x[0,height]. The result may be degenerate (zero
// extent) when the box lies entirely outside the frame.
BoundingBox clamp_to_frame(const BoundingBox& b, double width, double height);

}  // namespace detfuse
