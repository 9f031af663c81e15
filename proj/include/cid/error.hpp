/*
 * Copyright 2026 The CID Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace cid {

// Contract violations by the caller (bad dimensions, invalid configuration)
// are reported with std::invalid_argument. Everything below describes a
// failure of the data, the model or the search itself.

// Base class for runtime failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (CSV cells, label values, weight
// files, explanation files).
class DataError : public Error {
 public:
  using Error::Error;
};

// Model training or evaluation failed (single-class labels, non-finite loss).
class ModelError : public Error {
 public:
  using Error::Error;
};

// An external classifier process could not be launched or violated the
// line protocol.
class ProtocolError : public ModelError {
 public:
  using ModelError::ModelError;
};

// Counterfactual search ran out of budget before both sets were filled.
class BudgetExhaustedError : public Error {
 public:
  using Error::Error;
};

// Numerical inconsistency that should not happen for valid densities, e.g.
// an overlap with a zero denominator.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cid
