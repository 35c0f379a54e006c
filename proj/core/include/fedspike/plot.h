/*
 * Copyright 2026 The fedspike Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSPIKE_PLOT_H_
#define FEDSPIKE_PLOT_H_

#include <span>
#include <string>

#include "fedspike/experiments.h"

namespace fedspike {

struct PlotOptions {
  std::string title;
  std::string x_label = "sweep value";
  std::string y_label = "mean projection error";
  int width = 640;
  int height = 420;
};

// Self-contained SVG line plot, one polyline per series.
std::string RenderSvg(std::span<const SeriesSummary> series,
                      const PlotOptions& options = {});

}  // namespace fedspike

#endif  // FEDSPIKE_PLOT_H_
