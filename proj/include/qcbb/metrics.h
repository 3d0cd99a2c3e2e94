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

// Solve traces and the quality measures computed from them.

#ifndef QCBB_METRICS_H_
#define QCBB_METRICS_H_

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcbb/ising.h"

namespace qcbb {

enum class EventKind {
  kNodeStart,
  kBoundUpdate,
  kIncumbentUpdate,
  kOptimizerQuery,
  kPrune,
  kFathom,
  kBranch,
  kDone,
};

std::string_view EventKindName(EventKind kind);
// Throws ParseError for unknown names.
EventKind ParseEventKind(std::string_view name);

struct TraceEvent {
  double wall_time_s = 0.0;
  int64_t node_index = 0;  // nodes evaluated so far, counting the current one
  EventKind kind = EventKind::kNodeStart;
  std::optional<double> lb;
  std::optional<double> ub;
  std::optional<double> expectation;
  std::optional<int64_t> query_index;
  std::optional<double> many_body_fraction;
  std::optional<std::string> status;

  bool operator==(const TraceEvent&) const = default;
};

// How events are time-stamped. kLogical stamps the cumulative number of
// simulator queries, which keeps traces byte-for-byte reproducible.
enum class TraceClock { kWall, kLogical };

// Append-only, thread-safe event sink.
class TraceRecorder {
 public:
  explicit TraceRecorder(TraceClock clock = TraceClock::kLogical);

  TraceClock clock() const { return clock_; }

  // Stamps `event.wall_time_s` (never moving backwards) and appends it.
  void Record(TraceEvent event);

  // Logical time source; ignored with the wall clock.
  void AdvanceLogicalTime(double ticks);

  std::vector<TraceEvent> events() const;
  double ElapsedSeconds() const;

 private:
  TraceClock clock_;
  std::chrono::steady_clock::time_point start_;
  mutable std::mutex mu_;
  double logical_time_ = 0.0;
  double last_stamp_ = 0.0;
  std::vector<TraceEvent> events_;
};

struct BoundPoint {
  double t = 0.0;
  double ub = 0.0;
  double lb = 0.0;
  bool operator==(const BoundPoint&) const = default;
};

// Step functions: each point's values hold until the next point's t.
struct BoundSeries {
  std::vector<BoundPoint> points;
  bool operator==(const BoundSeries&) const = default;
};

enum class SeriesAxis { kNodes, kSeconds };

// Bound values from every event carrying both lb and ub; events at the same
// abscissa collapse onto the last one.
BoundSeries ExtractBoundSeries(const std::vector<TraceEvent>& events,
                               SeriesAxis axis);

// Exact integral of UB - LB over [t_first, t_last]. Throws
// std::invalid_argument on an empty series or when UB < LB somewhere.
double PrimalDualIntegral(const BoundSeries& series, double tol = 1e-9);

// Ratio of pairwise terms in `node` to those in `master`; 1.0 (with a warning
// on stderr) when the master has none.
double ManyBodyFraction(const IsingModel& node, const IsingModel& master);

enum class TraceFormat { kCsv, kJson };

// Infers the format from the extension (".json" is JSON, anything else CSV).
TraceFormat FormatForPath(const std::string& path);

std::string TraceToCsv(const std::vector<TraceEvent>& events);
std::string TraceToJson(const std::vector<TraceEvent>& events);
std::vector<TraceEvent> TraceFromCsv(const std::string& text);
std::vector<TraceEvent> TraceFromJson(const std::string& text);

void ExportTrace(const std::vector<TraceEvent>& events, const std::string& path,
                 TraceFormat format);
std::vector<TraceEvent> ImportTrace(const std::string& path);

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double value);

}  // namespace qcbb

#endif  // QCBB_METRICS_H_
