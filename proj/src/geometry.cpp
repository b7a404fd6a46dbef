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

#include "coeforge/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "coeforge/error.hpp"

namespace coeforge {

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double max_pairwise_iou(std::span<const BoundingBox> boxes) noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      best = std::max(best, iou(boxes[i], boxes[j]));
    }
  }
  return best;
}

CropRegion clamp_to_page(const BoundingBox& box, const PageRef& page) {
  const double w = page.width;
  const double h = page.height;
  BoundingBox c{std::clamp(box.x1, 0.0, w), std::clamp(box.y1, 0.0, h),
                std::clamp(box.x2, 0.0, w), std::clamp(box.y2, 0.0, h)};
  if (c.x1 >= c.x2 || c.y1 >= c.y2) {
    std::ostringstream msg;
    msg << "box [" << box.x1 << ", " << box.y1 << ", " << box.x2 << ", " << box.y2
        << "] lies outside page '" << page.page_id << "' (" << page.width << "x"
        << page.height << ")";
    fail(ErrorCode::kEmptyAfterClamp, msg.str());
  }
  return CropRegion{c, page};
}

}  // namespace coeforge
