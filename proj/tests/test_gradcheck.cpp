// Copyright 2026 The ban-seg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <string>

#include "ban/gradcheck.hpp"
#include "doctest.h"

using namespace ban;

namespace {

std::size_t count_check(const std::vector<GradcheckEntry>& entries, const std::string& prefix) {
  std::size_t n = 0;
  for (const GradcheckEntry& e : entries) n += e.check.rfind(prefix, 0) == 0 ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("the default harness passes every check") {
  const auto entries = run_gradcheck({});
  for (const GradcheckEntry& e : entries) {
    INFO(e.check, " ", e.size, " seed ", e.seed);
    CHECK(e.pass());
  }
  CHECK(count_check(entries, "closed-form vs kronecker") == 6);
  CHECK(count_check(entries, "closed-form vs finite differences") == 20);
  const std::size_t tensors = SegModel(gradcheck_backbone(), {}, 0).parameters().size();
  CHECK(count_check(entries, "model:") == 5 * tensors);
}

TEST_CASE("the literal Kronecker comparison includes N = 2") {
  GradcheckOptions o;
  o.random_cases = 0;
  o.model_seeds = 0;
  const auto entries = run_gradcheck(o);
  bool seen = false;
  for (const GradcheckEntry& e : entries) seen = seen || e.size.rfind("N=2,", 0) == 0;
  CHECK(seen);
}

TEST_CASE("a corrupted gradient is reported as a failure") {
  GradcheckOptions o;
  o.random_cases = 3;
  o.model_seeds = 1;
  o.corrupt = 1e-3;
  const auto entries = run_gradcheck(o);
  std::size_t failed = 0;
  for (const GradcheckEntry& e : entries) failed += e.pass() ? 0 : 1;
  CHECK(failed == entries.size());
  CHECK(gradcheck_table(entries).find("FAIL") != std::string::npos);
}

TEST_CASE("the table has one row per entry and names the seed") {
  GradcheckOptions o;
  o.kronecker_sizes = {2};
  o.random_cases = 1;
  o.model_seeds = 0;
  const auto entries = run_gradcheck(o);
  const std::string table = gradcheck_table(entries);
  CHECK(std::count(table.begin(), table.end(), '\n') == static_cast<long>(entries.size() + 1));
  CHECK(table.rfind("result\terror\ttolerance\tseed\tcheck\tsize\n", 0) == 0);
}
