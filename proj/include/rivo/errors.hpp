/*
   Copyright 2026 The rivolution Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace rivo {

// Error taxonomy mapped to CLI exit codes: data/validation errors exit 2,
// runtime/numeric errors exit 3.

/// Grids or extents that were required to line up do not.
struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Array dimensions or channel counts violate an operation's contract.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scene/dataset construction failed (missing frames, bad manifest, ...).
struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be read, written, or parsed.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite values or numeric divergence where finiteness is required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller broke an API contract (bad transect, wrong SR output grid, ...).
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All training attempts failed (every learning-rate candidate diverged).
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rivo
