// Copyright 2026 The QCBB Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// The `qcbb` command line: gen, solve, baseline and report.
//
// Exit codes: 0 solved (optimal or gap reached), 1 usage/I-O/config error,
// 2 proven infeasible, 3 node or time limit hit.

#ifndef QCBB_CLI_H_
#define QCBB_CLI_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qcbb/engine.h"
#include "qcbb/metrics.h"

namespace qcbb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitLimit = 3;

int ExitCodeFor(SolveStatus status);

// Plot data for one trace: bound series on both axes, many-body fractions,
// expected cost per query, primal-dual integrals and the final bounds.
// Throws std::invalid_argument on an empty trace.
std::string ReportJson(const std::vector<TraceEvent>& trace,
                       const std::optional<std::vector<TraceEvent>>& baseline,
                       std::optional<double> worst_feasible);

// `args[0]` is the program name. Never throws.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace qcbb

#endif  // QCBB_CLI_H_
