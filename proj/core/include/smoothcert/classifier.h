// Copyright 2026 The smoothcert Authors
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

#ifndef SMOOTHCERT_CLASSIFIER_H_
#define SMOOTHCERT_CLASSIFIER_H_

#include <span>

namespace smoothcert {

// Base classifier g mapping an input to a nonnegative class label.
// Implementations are deterministic and reentrant.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int classify(std::span<const double> x) const = 0;
};

}  // namespace smoothcert

#endif  // SMOOTHCERT_CLASSIFIER_H_
