// Copyright 2026 The dcvs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <ostream>

namespace dcvs {

/// Quick randomized cross-checks of the closed-form operators against the
/// brute-force oracles (prox grids, finite-difference gradients, descent
/// inequality). Prints one PASS/FAIL line per check; returns the number of
/// failed checks.
int run_selfcheck(std::ostream& out, std::uint64_t seed = 1);

}  // namespace dcvs
