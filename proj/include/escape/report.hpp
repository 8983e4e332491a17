#pragma once

#include <optional>
#include <string>

#include "escape/escape.hpp"

namespace escape {

// Human- and machine-readable account of one decision run.
struct RunReport {
  Outcome outcome;
  double wall_seconds = 0.0;
  std::string certificate_path;  // empty when no certificate was written

  bool operator==(const RunReport& o) const;
};

std::string run_report_to_json(const RunReport& r);
RunReport run_report_from_json(const std::string& text);  // throws runtime_error

// One-per-line human log of the outcome and per-stage reasons.
std::string format_run_report(const RunReport& r);

}  // namespace escape
