#pragma once
// Training traces: long-format records ("# fedgame-trace v1") with one row
// per (round, epoch, agent, metric). agent_id -1 marks run-level metrics.

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedgame/core.hpp"

namespace fedgame::fltrain {

inline constexpr const char* kTraceHeader = "# fedgame-trace v1";

struct TraceRow {
  int round = 0;
  long epoch = 0;
  int agent = -1;  // -1 = run-level
  std::string metric;
  double value = 0.0;
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  long epochs = 0;  // number of recorded global epochs (contiguous from 0)

  void add(int round, long epoch, int agent, std::string metric, double value) {
    rows.push_back({round, epoch, agent, std::move(metric), value});
  }

  // All (epoch, value) pairs of one metric for one agent, in record order.
  std::vector<std::pair<long, double>> series(const std::string& metric, int agent = -1) const {
    std::vector<std::pair<long, double>> out;
    for (const auto& r : rows)
      if (r.agent == agent && r.metric == metric) out.emplace_back(r.epoch, r.value);
    return out;
  }

  double last(const std::string& metric, int agent = -1) const {
    for (auto it = rows.rbegin(); it != rows.rend(); ++it)
      if (it->agent == agent && it->metric == metric) return it->value;
    throw ConfigError("trace: metric not found: " + metric);
  }
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_trace_csv(std::ostream& os, const TrainingTrace& trace) {
  os << kTraceHeader << "\n";
  os << "round,epoch,agent_id,metric,value\n";
  for (const auto& r : trace.rows) {
    os << r.round << ',' << r.epoch << ',' << r.agent << ',' << r.metric << ','
       << format_double(r.value) << "\n";
  }
}

inline void write_trace_csv(const std::string& path, const TrainingTrace& trace) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_trace_csv(f, trace);
}

inline TrainingTrace read_trace_csv(std::istream& is) {
  TrainingTrace trace;
  std::string line;
  if (!std::getline(is, line) || line != kTraceHeader)
    throw FormatError("trace: missing '# fedgame-trace v1' header");
  if (!std::getline(is, line) || line != "round,epoch,agent_id,metric,value")
    throw FormatError("trace: bad column header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    TraceRow r;
    std::size_t pos = 0;
    auto next_field = [&line, &pos]() {
      std::size_t comma = line.find(',', pos);
      std::string f = (comma == std::string::npos) ? line.substr(pos)
                                                   : line.substr(pos, comma - pos);
      pos = (comma == std::string::npos) ? line.size() : comma + 1;
      return f;
    };
    r.round = std::stoi(next_field());
    r.epoch = std::stol(next_field());
    r.agent = std::stoi(next_field());
    r.metric = next_field();
    r.value = std::stod(next_field());
    trace.rows.push_back(std::move(r));
    trace.epochs = std::max(trace.epochs, trace.rows.back().epoch + 1);
  }
  return trace;
}

inline TrainingTrace read_trace_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for reading: " + path);
  return read_trace_csv(f);
}

}  // namespace fedgame::fltrain
