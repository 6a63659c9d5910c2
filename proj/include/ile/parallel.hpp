/*
 * Copyright 2026 The ILE Authors
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

#ifndef ILE_PARALLEL_HPP
#define ILE_PARALLEL_HPP

namespace ile {

/// Every data-parallel kernel in the library comes in two flavours: an
/// OpenMP version (the default) and a serial reference kept for testing
/// and benchmarking. Both produce bit-identical results because each
/// output element is computed by exactly one thread in a fixed order.
enum class Exec { Parallel, Serial };

/// Sets the OpenMP team size; values < 1 restore the runtime default.
void set_num_threads(int n);
int num_threads();

}  // namespace ile

#endif  // ILE_PARALLEL_HPP
