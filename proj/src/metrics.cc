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

#include "qcbb/metrics.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qcbb {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 8> kKindNames = {{
    {EventKind::kNodeStart, "node_start"},
    {EventKind::kBoundUpdate, "bound_update"},
    {EventKind::kIncumbentUpdate, "incumbent_update"},
    {EventKind::kOptimizerQuery, "optimizer_query"},
    {EventKind::kPrune, "prune"},
    {EventKind::kFathom, "fathom"},
    {EventKind::kBranch, "branch"},
    {EventKind::kDone, "done"},
}};

constexpr std::string_view kCsvHeader =
    "wall_time_s,node_index,kind,lb,ub,expectation,query_index,"
    "many_body_fraction,status";

double ParseDouble(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("bad number in trace: '" + std::string(text) + "'");
  }
  return value;
}

int64_t ParseInt(std::string_view text) {
  int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("bad integer in trace: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string_view EventKindName(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

EventKind ParseEventKind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ParseError("unknown trace event kind '" + std::string(name) + "'");
}

TraceRecorder::TraceRecorder(TraceClock clock)
    : clock_(clock), start_(std::chrono::steady_clock::now()) {}

void TraceRecorder::Record(TraceEvent event) {
  std::lock_guard<std::mutex> lock(mu_);
  double stamp = clock_ == TraceClock::kLogical ? logical_time_
                                                : ElapsedSeconds();
  stamp = std::max(stamp, last_stamp_);
  last_stamp_ = stamp;
  event.wall_time_s = stamp;
  events_.push_back(std::move(event));
}

void TraceRecorder::AdvanceLogicalTime(double ticks) {
  std::lock_guard<std::mutex> lock(mu_);
  logical_time_ += ticks;
}

std::vector<TraceEvent> TraceRecorder::events() const {
  std::lock_guard<std::mutex> lock(mu_);
  return events_;
}

double TraceRecorder::ElapsedSeconds() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start_)
      .count();
}

BoundSeries ExtractBoundSeries(const std::vector<TraceEvent>& events,
                               SeriesAxis axis) {
  BoundSeries series;
  for (const TraceEvent& e : events) {
    if (!e.lb || !e.ub) continue;
    const double t = axis == SeriesAxis::kNodes
                         ? static_cast<double>(e.node_index)
                         : e.wall_time_s;
    if (!series.points.empty() && series.points.back().t == t) {
      series.points.back() = {t, *e.ub, *e.lb};
    } else {
      series.points.push_back({t, *e.ub, *e.lb});
    }
  }
  return series;
}

double PrimalDualIntegral(const BoundSeries& series, double tol) {
  if (series.points.empty()) {
    throw std::invalid_argument("primal-dual integral of an empty series");
  }
  double area = 0.0;
  for (size_t i = 0; i < series.points.size(); ++i) {
    const BoundPoint& p = series.points[i];
    if (p.ub < p.lb - tol * std::max(1.0, std::abs(p.ub))) {
      throw std::invalid_argument("crossed bounds at t = " +
                                  FormatDouble(p.t) + ": UB " +
                                  FormatDouble(p.ub) + " < LB " +
                                  FormatDouble(p.lb));
    }
    if (i + 1 < series.points.size()) {
      const double width = series.points[i + 1].t - p.t;
      if (width < 0.0) {
        throw std::invalid_argument("series abscissae must be nondecreasing");
      }
      area += std::max(0.0, p.ub - p.lb) * width;
    }
  }
  return area;
}

double ManyBodyFraction(const IsingModel& node, const IsingModel& master) {
  const int master_count = ManyBodyCount(master);
  if (master_count == 0) {
    std::cerr << "warning: master model has no pairwise terms; "
                 "many-body fraction reported as 1\n";
    return 1.0;
  }
  return static_cast<double>(ManyBodyCount(node)) / master_count;
}

TraceFormat FormatForPath(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".json") {
    return TraceFormat::kJson;
  }
  return TraceFormat::kCsv;
}

std::string FormatDouble(double value) {
  std::array<char, 64> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(),
                                       value);
  return std::string(buf.data(), ptr);
}

std::string TraceToCsv(const std::vector<TraceEvent>& events) {
  std::string out(kCsvHeader);
  out += '\n';
  auto opt = [&out](const std::optional<double>& v) {
    if (v) out += FormatDouble(*v);
  };
  for (const TraceEvent& e : events) {
    out += FormatDouble(e.wall_time_s);
    out += ',';
    out += std::to_string(e.node_index);
    out += ',';
    out += EventKindName(e.kind);
    out += ',';
    opt(e.lb);
    out += ',';
    opt(e.ub);
    out += ',';
    opt(e.expectation);
    out += ',';
    if (e.query_index) out += std::to_string(*e.query_index);
    out += ',';
    opt(e.many_body_fraction);
    out += ',';
    if (e.status) out += *e.status;
    out += '\n';
  }
  return out;
}

std::vector<TraceEvent> TraceFromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError("trace CSV lacks the expected header");
  }
  std::vector<TraceEvent> events;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = SplitCsvLine(line);
    if (cells.size() != 9) {
      throw ParseError("trace CSV line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells");
    }
    auto opt_double = [](std::string_view cell) -> std::optional<double> {
      if (cell.empty()) return std::nullopt;
      return ParseDouble(cell);
    };
    TraceEvent e;
    e.wall_time_s = ParseDouble(cells[0]);
    e.node_index = ParseInt(cells[1]);
    e.kind = ParseEventKind(cells[2]);
    e.lb = opt_double(cells[3]);
    e.ub = opt_double(cells[4]);
    e.expectation = opt_double(cells[5]);
    if (!cells[6].empty()) e.query_index = ParseInt(cells[6]);
    e.many_body_fraction = opt_double(cells[7]);
    if (!cells[8].empty()) e.status = std::string(cells[8]);
    events.push_back(std::move(e));
  }
  return events;
}

std::string TraceToJson(const std::vector<TraceEvent>& events) {
  nlohmann::json out = nlohmann::json::array();
  auto opt = [](const auto& v) -> nlohmann::json {
    if (v) return nlohmann::json(*v);
    return nullptr;
  };
  for (const TraceEvent& e : events) {
    nlohmann::json j;
    j["wall_time_s"] = e.wall_time_s;
    j["node_index"] = e.node_index;
    j["kind"] = std::string(EventKindName(e.kind));
    j["lb"] = opt(e.lb);
    j["ub"] = opt(e.ub);
    j["expectation"] = opt(e.expectation);
    j["query_index"] = opt(e.query_index);
    j["many_body_fraction"] = opt(e.many_body_fraction);
    j["status"] = opt(e.status);
    out.push_back(std::move(j));
  }
  return out.dump(1);
}

std::vector<TraceEvent> TraceFromJson(const std::string& text) {
  nlohmann::json in;
  try {
    in = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed trace JSON: ") + e.what());
  }
  if (!in.is_array()) throw ParseError("trace JSON must be an array");
  std::vector<TraceEvent> events;
  try {
    for (const auto& j : in) {
      TraceEvent e;
      e.wall_time_s = j.at("wall_time_s").get<double>();
      e.node_index = j.at("node_index").get<int64_t>();
      e.kind = ParseEventKind(j.at("kind").get<std::string>());
      auto opt_double = [&j](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<double>();
      };
      e.lb = opt_double("lb");
      e.ub = opt_double("ub");
      e.expectation = opt_double("expectation");
      if (j.contains("query_index") && !j.at("query_index").is_null()) {
        e.query_index = j.at("query_index").get<int64_t>();
      }
      e.many_body_fraction = opt_double("many_body_fraction");
      if (j.contains("status") && !j.at("status").is_null()) {
        e.status = j.at("status").get<std::string>();
      }
      events.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad trace event: ") + e.what());
  }
  return events;
}

void ExportTrace(const std::vector<TraceEvent>& events, const std::string& path,
                 TraceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << (format == TraceFormat::kJson ? TraceToJson(events) + "\n"
                                       : TraceToCsv(events));
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<TraceEvent> ImportTrace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FormatForPath(path) == TraceFormat::kJson
             ? TraceFromJson(buffer.str())
             : TraceFromCsv(buffer.str());
}

}  // namespace qcbb
