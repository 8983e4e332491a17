#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "escape/report.hpp"
#include "escape/scan.hpp"
#include "escape/specfile.hpp"

namespace escape::cli {

// Exit-code contract, stable for scripting:
//   escape/linear: 0 trapped, 1 escapes, 2 budget exhausted, 64 parse error
//   verify:        0 certificate accepted, 1 rejected, 64 parse error
//   scan:          0 success, 64 parse error, 70 internal error
inline constexpr int kExitTrapped = 0;
inline constexpr int kExitEscapes = 1;
inline constexpr int kExitBudgetExhausted = 2;
inline constexpr int kExitVerifyAccepted = 0;
inline constexpr int kExitVerifyRejected = 1;
inline constexpr int kExitParseError = 64;
inline constexpr int kExitInternalError = 70;

struct EscapeArgs {
  std::string spec_path;
  int max_stage = 8;
  std::optional<long> max_iterations;          // default unlimited
  std::optional<std::size_t> max_cubes;        // default unlimited
  std::optional<double> timeout_seconds;
  std::string certificate_out;                 // empty = do not write
};

int cmd_escape(const EscapeArgs& args, std::ostream& out, std::ostream& err,
               RunReport* report_out = nullptr);

// Accepts a certificate iff (a) it parses and matches the system dimension,
// (b) the evidence re-check passes, and (c) reproducing the stage run at the
// certificate's stage yields exactly the recorded payload. (c) pins the
// certificate to its run, which the evidence alone cannot do for
// scale-invariant systems.
int cmd_verify(const std::string& cert_path, const std::string& spec_path, std::ostream& out,
               std::ostream& err);

struct LinearArgs {
  std::string affine_path;
  int max_stage = 8;
  std::optional<long> max_iterations;
  std::optional<std::size_t> max_cubes;
  std::optional<double> timeout_seconds;
  std::string certificate_out;
  double tolerance = 1e-9;
};

int cmd_linear(const LinearArgs& args, std::ostream& out, std::ostream& err,
               RunReport* report_out = nullptr, RobustnessClass* class_out = nullptr);

struct ScanArgs {
  ScanOptions options;
  std::string out_prefix;  // writes <prefix>.csv and <prefix>.pgm
  bool quiet = false;
};

int cmd_mandelbrot_scan(const ScanArgs& args, std::ostream& out, std::ostream& err,
                        ScanResult* result_out = nullptr);

}  // namespace escape::cli
