// Copyright 2026 The coeforge Authors
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

#pragma once

#include <span>

#include "coeforge/core.hpp"

namespace coeforge {

// Predicted box clipped into a page: 0 <= x1 < x2 <= width, same for y.
struct CropRegion {
  BoundingBox box;
  PageRef page;
};

// Intersection area of two rectangles; touching edges give 0.
double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Max IoU over unordered pairs; 0 for fewer than two boxes.
double max_pairwise_iou(std::span<const BoundingBox> boxes) noexcept;

// Throws EmptyAfterClamp when nothing of the box lies on the page.
CropRegion clamp_to_page(const BoundingBox& box, const PageRef& page);

}  // namespace coeforge
