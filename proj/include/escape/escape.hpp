#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "escape/names.hpp"

namespace escape {

// Fuel for the outer stage loop. The stage search itself may legitimately
// never decide (boundary instances); a real tool needs a budget and reports
// it honestly instead of diverging.
struct EscapeConfig {
  int max_stage = 8;
  std::optional<long> max_iterations_per_stage;     // none = unlimited
  std::optional<std::size_t> max_cubes_per_stage;   // cap on any materialized set
  std::optional<double> wall_timeout_seconds;       // none = unlimited
};

enum class UnknownReason {
  OutOfWindow,              // an enclosure met the window complement
  OrbitClosureNotInterior,  // orbit closure stabilized but escapes the interior cubes
  PointUncertain,           // the point enclosure touches the window complement
  IterationCap,             // per-stage iteration budget exhausted
  WorkBudget,               // a cube set outgrew the per-stage materialization budget
};

std::string to_string(UnknownReason r);

// Evidence for a Trapped verdict: the stabilized orbit closure at one stage.
// Re-checkable without trusting the run: its image under the function name
// stays inside it and it sits compactly inside the set's interior cubes.
struct TrappedCertificate {
  int stage = 0;
  int dim = 1;
  std::vector<CubeCoords> invariant_cubes;  // sorted, nonempty, window cubes
};

// Evidence for an Escapes verdict: the survivor chain empties by step `steps`.
struct EscapeCertificate {
  int stage = 0;
  int steps = 1;
  int dim = 1;
};

struct StageStats {
  long iterations = 0;
  std::size_t function_evals = 0;   // distinct cubes pushed through F
  std::size_t orbit_cubes = 0;      // final |O|
};

struct StageVerdict {
  enum class Kind { Escapes, Trapped, Unknown };
  Kind kind = Kind::Unknown;
  int steps = 0;                                     // Escapes
  std::optional<TrappedCertificate> certificate;     // Trapped
  std::optional<UnknownReason> reason;               // Unknown
  bool timed_out = false;  // stage aborted by the wall clock, no verdict
  StageStats stats;
};

struct StageLimits {
  std::optional<long> iteration_cap;
  std::optional<std::size_t> cube_budget;
  const std::function<bool()>* deadline_hit = nullptr;
};

// One stage of the decision method on the level-`stage` grid. Faithful to
// the staged search: window test on the point enclosure, survivor chain
// filtered by the exterior cubes, orbit closure grown until it stabilizes.
// The survivor-emptiness test runs before the window test in each iteration,
// so an escape detected in the same iteration as a window exit still counts.
StageVerdict point_escape_stage(int stage, const FunctionName& f, const ClosedSetName& a,
                                const PointName& x, const StageLimits& limits = {});

struct Outcome {
  enum class Kind { Escapes, Trapped, BudgetExhausted };
  Kind kind = Kind::BudgetExhausted;
  std::optional<EscapeCertificate> escape_certificate;
  std::optional<TrappedCertificate> trapped_certificate;

  struct StageReport {
    int stage = 0;
    StageVerdict::Kind kind = StageVerdict::Kind::Unknown;
    std::optional<UnknownReason> reason;
    StageStats stats;
  };
  std::vector<StageReport> stages;
  int deciding_stage = -1;  // -1 when budget exhausted
  bool timed_out = false;
};

// Runs stages 0..max_stage and returns the first decisive verdict with its
// certificate, or BudgetExhausted with per-stage reasons.
Outcome point_escape(const FunctionName& f, const ClosedSetName& a, const PointName& x,
                     const EscapeConfig& config);

// ---- certificate checking ----------------------------------------------------

struct CheckResult {
  bool ok = false;
  std::string detail;                 // human-readable reason on failure
  std::optional<CubeCoords> witness;  // offending cube when applicable
};

// Re-derives the trapped premises: every invariant cube's image lies in the
// invariant (no out-of-window values) and the invariant sits compactly inside
// the interior cubes at the certificate's stage. Does NOT re-check that the
// point's image lies in the invariant; that pairing belongs to the run that
// emitted the certificate (cmd_verify re-establishes it by reproduction).
CheckResult check_trapped_certificate(const TrappedCertificate& cert, const FunctionName& f,
                                      const ClosedSetName& a);

// Replays the survivor chain at the certificate's stage and confirms it
// empties by the recorded step count without leaving the window.
CheckResult check_escape_certificate(const EscapeCertificate& cert, const FunctionName& f,
                                     const ClosedSetName& a, const PointName& x);

// ---- serialization -----------------------------------------------------------
// Textual record, integers only. Grammar:
//   kind trapped|escape
//   stage N
//   steps N           (escape only)
//   dimension d
//   cubes N           (trapped only; then N lines of d coordinates)
//   ...

struct CertificateFile {
  enum class Kind { Trapped, Escape };
  Kind kind = Kind::Trapped;
  TrappedCertificate trapped;
  EscapeCertificate escape;
};

std::string serialize_certificate(const TrappedCertificate& cert);
std::string serialize_certificate(const EscapeCertificate& cert);

// Throws ParseError on malformed input (unknown/missing/duplicate fields,
// non-integer tokens, wrong tuple arity).
CertificateFile parse_certificate(std::string_view text);

}  // namespace escape
