// core/include/isib/parallel.hpp

// Copyright 2026  isibkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ISIB_PARALLEL_HPP_
#define ISIB_PARALLEL_HPP_

#include <cstdint>
#include <functional>

namespace isib {

// Worker count: hardware concurrency capped by the ISIB_THREADS environment
// variable, at least 1. Read once per process.
int worker_threads();

// Runs fn(i) for every i in [0, n), possibly across threads. Each index is
// visited exactly once and writes only caller-provided per-index slots;
// callers reduce over slots in index order, so results never depend on the
// worker count or scheduling. grain is the fixed chunk size handed to a
// worker at a time: 1 for heavyweight items (utterances), larger for cheap
// per-point work.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn, int64_t grain = 16);

}  // namespace isib

#endif  // ISIB_PARALLEL_HPP_
