/*
 * Copyright 2026 The ECRECer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ECRECER_TASK_H_
#define ECRECER_TASK_H_

#include <string>
#include <string_view>

#include "ecrecer/error.h"

namespace ecrecer {

// The three benchmark tasks: enzyme vs. non-enzyme, number of catalytic
// functions, EC number assignment.
enum class Task { EnzymeOrNot = 1, FunctionCount = 2, ECNumber = 3 };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::EnzymeOrNot: return "enzyme";
    case Task::FunctionCount: return "function-count";
    case Task::ECNumber: return "ec";
  }
  return "ec";
}

inline Task parse_task(std::string_view s) {
  if (s == "1" || s == "enzyme") return Task::EnzymeOrNot;
  if (s == "2" || s == "function-count") return Task::FunctionCount;
  if (s == "3" || s == "ec") return Task::ECNumber;
  throw ParseError("unknown task '" + std::string(s) + "'");
}

}  // namespace ecrecer

#endif  // ECRECER_TASK_H_
