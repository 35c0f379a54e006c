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

#ifndef FEDSPIKE_RANDOM_H_
#define FEDSPIKE_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace fedspike {

using Seed = std::uint64_t;

// Every stochastic operation draws from std::mt19937_64. Independent streams
// are obtained by deriving child seeds with SplitMix64 mixing of
// (parent seed, label hash, index), never by sharing an engine.
using Engine = std::mt19937_64;

std::uint64_t SplitMix64(std::uint64_t x);

// FNV-1a 64-bit hash, used to turn stream labels into integers.
std::uint64_t HashLabel(std::string_view label);

Seed DeriveSeed(Seed parent, std::string_view label, std::uint64_t index = 0);

// rows x cols matrix of i.i.d. N(0, 1), filled column-major.
Eigen::MatrixXd StandardNormalMatrix(Eigen::Index rows, Eigen::Index cols,
                                     Engine& engine);

}  // namespace fedspike

#endif  // FEDSPIKE_RANDOM_H_
