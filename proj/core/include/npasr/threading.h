// core/include/npasr/threading.h

// Copyright 2026  NPASR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NPASR_THREADING_H_
#define NPASR_THREADING_H_

#include <cstddef>
#include <functional>

namespace npasr {

// Worker cap: NPASR_THREADS when set (>= 1), else hardware concurrency.
int worker_count();

// Runs fn(0..n-1) across worker_count() threads. fn must be safe to call
// concurrently for distinct indices. The first exception thrown by any
// worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace npasr

#endif  // NPASR_THREADING_H_
