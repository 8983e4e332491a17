#include "escape/escape.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace escape {

std::string to_string(UnknownReason r) {
  switch (r) {
    case UnknownReason::OutOfWindow: return "out-of-window";
    case UnknownReason::OrbitClosureNotInterior: return "orbit-closure-not-interior";
    case UnknownReason::PointUncertain: return "point-uncertain";
    case UnknownReason::IterationCap: return "iteration-cap";
    case UnknownReason::WorkBudget: return "work-budget";
  }
  return "?";
}

namespace {

// Open-addressing cube-keyed cache; insert-only, no tombstones.
template <typename V>
class FlatCubeMap {
 public:
  FlatCubeMap() { reset(16); }

  V* find(const CubeCoords& c) {
    std::size_t i = slot(c);
    return keys_[i][0] == kEmpty ? nullptr : &vals_[i];
  }

  void put(const CubeCoords& c, V v) {
    std::size_t i = slot(c);
    if (keys_[i][0] == kEmpty) {
      keys_[i] = c;
      vals_[i] = std::move(v);
      if (++size_ * 10 >= keys_.size() * 7) grow();
    } else {
      vals_[i] = std::move(v);
    }
  }

 private:
  static constexpr std::int32_t kEmpty = INT32_MIN;

  void reset(std::size_t cap) {
    keys_.assign(cap, CubeCoords{kEmpty});
    vals_.assign(cap, V{});
    mask_ = cap - 1;
    size_ = 0;
  }

  std::size_t slot(const CubeCoords& c) const {
    std::size_t i = CubeCoordsHash{}(c)&mask_;
    while (keys_[i][0] != kEmpty && keys_[i] != c) i = (i + 1) & mask_;
    return i;
  }

  void grow() {
    std::vector<CubeCoords> old_keys = std::move(keys_);
    std::vector<V> old_vals = std::move(vals_);
    reset(old_keys.size() * 2);
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
      if (old_keys[i][0] != kEmpty) put(old_keys[i], std::move(old_vals[i]));
    }
  }

  std::vector<CubeCoords> keys_;
  std::vector<V> vals_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

// Stage-local evaluation caches. The name objects memoize too, but behind a
// mutex; the inner loop re-queries the same cubes across iterations and wants
// lock-free lookups.
class StageContext {
 public:
  StageContext(int stage, int dim, const FunctionName& f, const ClosedSetName& a)
      : stage_(stage), dim_(dim), f_(f), a_(a) {}

  const FunctionName::Value& fvalue(const CubeCoords& c) {
    if (const FunctionName::Value** hit = fvals_.find(c)) return **hit;
    const FunctionName::Value& v = f_.value(stage_, c);
    ++evals_;
    fvals_.put(c, &v);
    return v;
  }

  bool in_exterior(const CubeCoords& c) {
    if (std::uint8_t* hit = ext_.find(c)) return *hit == 2;
    bool v = a_.in_exterior(stage_, c);
    ext_.put(c, v ? 2 : 1);
    return v;
  }

  // closure(cube) inside int |E^A_n|: all 3^d coordinate neighbours exterior.
  bool compactly_in_exterior(const CubeCoords& c) {
    if (std::uint8_t* hit = cpt_.find(c)) return *hit == 2;
    bool ok = true;
    int total = 1;
    for (int i = 0; i < dim_; ++i) total *= 3;
    for (int idx = 0; idx < total && ok; ++idx) {
      CubeCoords n{};
      int rest = idx;
      for (int i = 0; i < dim_; ++i) {
        n[i] = c[i] + (rest % 3) - 1;
        rest /= 3;
      }
      if (!in_exterior(n)) ok = false;
    }
    cpt_.put(c, ok ? 2 : 1);
    return ok;
  }

  bool compactly_in_interior(const CubeCoords& c) {
    int total = 1;
    for (int i = 0; i < dim_; ++i) total *= 3;
    for (int idx = 0; idx < total; ++idx) {
      CubeCoords n{};
      int rest = idx;
      for (int i = 0; i < dim_; ++i) {
        n[i] = c[i] + (rest % 3) - 1;
        rest /= 3;
      }
      if (!a_.in_interior(stage_, n)) return false;
    }
    return true;
  }

  std::size_t evals() const { return evals_; }

 private:
  int stage_;
  int dim_;
  const FunctionName& f_;
  const ClosedSetName& a_;
  std::size_t evals_ = 0;
  FlatCubeMap<const FunctionName::Value*> fvals_;
  FlatCubeMap<std::uint8_t> ext_;   // 1 = no, 2 = yes
  FlatCubeMap<std::uint8_t> cpt_;
};

}  // namespace

namespace {

enum class StepOutcome { Ok, OutOfWindow, Budget, Deadline };

}  // namespace

StageVerdict point_escape_stage(int stage, const FunctionName& f, const ClosedSetName& a,
                                const PointName& x, const StageLimits& limits) {
  if (f.dimension() != a.dimension() || f.dimension() != x.dimension())
    throw std::invalid_argument("dimension mismatch between names");
  const int d = f.dimension();
  StageVerdict verdict;
  StageContext ctx(stage, d, f, a);
  const std::size_t budget =
      limits.cube_budget ? *limits.cube_budget : std::numeric_limits<std::size_t>::max();

  auto unknown = [&](UnknownReason r) {
    verdict.kind = StageVerdict::Kind::Unknown;
    verdict.reason = r;
    verdict.stats.function_evals = ctx.evals();
    return verdict;
  };
  auto timed_out = [&]() {
    verdict.kind = StageVerdict::Kind::Unknown;
    verdict.timed_out = true;
    verdict.stats.function_evals = ctx.evals();
    return verdict;
  };
  std::size_t deadline_tick = 0;
  auto deadline_fired = [&]() {
    return limits.deadline_hit && (++deadline_tick & 1023) == 0 && (*limits.deadline_hit)();
  };

  // Applies F across `src`, streaming the images into `dst`. `filter_exterior`
  // drops cubes compactly inside the exterior (the survivor chain);
  // `window_guard` aborts as soon as an image cube leaves the window, which is
  // decided before anything that could depend on the rest of the set.
  auto apply = [&](const CubeSet& src, CubeSet& dst, bool filter_exterior,
                   bool window_guard) {
    StepOutcome rc = StepOutcome::Ok;
    src.for_each([&](const CubeCoords& c) {
      if (rc != StepOutcome::Ok) return;
      if (deadline_fired()) {
        rc = StepOutcome::Deadline;
        return;
      }
      const auto& v = ctx.fvalue(c);
      if (v.out_of_window) {
        rc = StepOutcome::OutOfWindow;
        return;
      }
      for (const auto& img : v.cubes) {
        if (window_guard && !is_window_cube(stage, d, img)) {
          rc = StepOutcome::OutOfWindow;
          return;
        }
        if (filter_exterior && ctx.compactly_in_exterior(img)) continue;
        dst.insert(img);
        if (dst.size() > budget) {
          rc = StepOutcome::Budget;
          return;
        }
      }
    });
    return rc;
  };
  auto verdict_for = [&](StepOutcome rc) {
    switch (rc) {
      case StepOutcome::OutOfWindow: return unknown(UnknownReason::OutOfWindow);
      case StepOutcome::Budget: return unknown(UnknownReason::WorkBudget);
      default: return timed_out();
    }
  };

  // Window test on the point enclosure.
  const CubeSet& xs = x.stage(stage);
  bool x_uncertain = false;
  xs.for_each([&](const CubeCoords& c) {
    if (touches_window_complement(stage, d, c)) x_uncertain = true;
  });
  if (x_uncertain) return unknown(UnknownReason::PointUncertain);

  // Q_1 = F(X), aborting the stage if it meets the window complement;
  // P_1 = survivors of Q_1; O_1 = Q_1.
  CubeSet q_cur(stage, d);
  if (StepOutcome rc = apply(xs, q_cur, false, true); rc != StepOutcome::Ok)
    return verdict_for(rc);
  CubeSet p_cur(stage, d);
  q_cur.for_each([&](const CubeCoords& c) {
    if (!ctx.compactly_in_exterior(c)) p_cur.insert(c);
  });
  CubeSet orbit = q_cur;
  // While no orbit cube has been dropped by the exterior filter the two
  // chains coincide and one image pass feeds both. A window exit cannot be
  // outrun by an escape in that regime: the offending cube is never compactly
  // exterior, so the survivor set could not have emptied this iteration.
  bool p_equals_q = p_cur.size() == q_cur.size();

  for (long i = 1;; ++i) {
    if (limits.iteration_cap && i > *limits.iteration_cap)
      return unknown(UnknownReason::IterationCap);
    verdict.stats.iterations = i;

    CubeSet p_next(stage, d);
    CubeSet q_next(stage, d);
    if (p_equals_q) {
      // One pass feeds both chains. If the orbit image outgrows the budget,
      // stop materializing it but let the survivor side finish: the
      // survivor-emptiness verdict outranks every abort of this iteration.
      StepOutcome rc = StepOutcome::Ok;
      bool q_overflow = false;
      q_cur.for_each([&](const CubeCoords& c) {
        if (rc != StepOutcome::Ok) return;
        if (deadline_fired()) {
          rc = StepOutcome::Deadline;
          return;
        }
        const auto& v = ctx.fvalue(c);
        if (v.out_of_window) {
          rc = StepOutcome::OutOfWindow;
          return;
        }
        for (const auto& img : v.cubes) {
          if (!is_window_cube(stage, d, img)) {
            // The exit cube is never compactly exterior, so the survivor set
            // of this iteration could not have emptied; aborting is safe.
            rc = StepOutcome::OutOfWindow;
            return;
          }
          if (!q_overflow) {
            q_next.insert(img);
            if (q_next.size() > budget) q_overflow = true;
          }
          if (!ctx.compactly_in_exterior(img)) {
            p_next.insert(img);
            if (p_next.size() > budget) {
              rc = StepOutcome::Budget;
              return;
            }
          }
        }
      });
      if (rc != StepOutcome::Ok) return verdict_for(rc);
      if (p_next.empty()) {
        verdict.kind = StageVerdict::Kind::Escapes;
        verdict.steps = static_cast<int>(i + 1);
        verdict.stats.function_evals = ctx.evals();
        verdict.stats.orbit_cubes = orbit.size();
        return verdict;
      }
      if (q_overflow) return unknown(UnknownReason::WorkBudget);
    } else {
      // Survivor chain first: an escape witnessed in this iteration wins
      // even if the orbit image exits the window in the same iteration.
      if (StepOutcome rc = apply(p_cur, p_next, true, false); rc != StepOutcome::Ok)
        return verdict_for(rc);
      if (p_next.empty()) {
        verdict.kind = StageVerdict::Kind::Escapes;
        verdict.steps = static_cast<int>(i + 1);
        verdict.stats.function_evals = ctx.evals();
        verdict.stats.orbit_cubes = orbit.size();
        return verdict;
      }

      // Orbit image, then the window test on it.
      if (StepOutcome rc = apply(q_cur, q_next, false, true); rc != StepOutcome::Ok)
        return verdict_for(rc);
    }
    p_equals_q = p_next.size() == q_next.size();  // p_next subset q_next always

    // Grow the orbit closure; on stabilization decide or give up the stage.
    bool grew = false;
    bool over_budget = false;
    q_next.for_each([&](const CubeCoords& c) {
      if (over_budget) return;
      if (orbit.insert(c)) grew = true;
      if (orbit.size() > budget) over_budget = true;
    });
    if (over_budget) return unknown(UnknownReason::WorkBudget);
    verdict.stats.orbit_cubes = orbit.size();
    if (!grew) {
      bool inside = true;
      orbit.for_each([&](const CubeCoords& c) {
        if (inside && !ctx.compactly_in_interior(c)) inside = false;
      });
      if (!inside) return unknown(UnknownReason::OrbitClosureNotInterior);
      verdict.kind = StageVerdict::Kind::Trapped;
      TrappedCertificate cert;
      cert.stage = stage;
      cert.dim = d;
      cert.invariant_cubes = orbit.sorted();
      verdict.certificate = std::move(cert);
      verdict.stats.function_evals = ctx.evals();
      return verdict;
    }

    q_cur = std::move(q_next);
    p_cur = std::move(p_next);
  }
}

Outcome point_escape(const FunctionName& f, const ClosedSetName& a, const PointName& x,
                     const EscapeConfig& config) {
  Outcome out;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (config.wall_timeout_seconds)
    deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(*config.wall_timeout_seconds));
  std::function<bool()> deadline_hit = [&]() {
    return deadline && std::chrono::steady_clock::now() >= *deadline;
  };

  StageLimits limits;
  limits.iteration_cap = config.max_iterations_per_stage;
  limits.cube_budget = config.max_cubes_per_stage;
  if (deadline) limits.deadline_hit = &deadline_hit;

  for (int n = 0; n <= config.max_stage; ++n) {
    if (deadline_hit()) {
      out.timed_out = true;
      break;
    }
    StageVerdict v = point_escape_stage(n, f, a, x, limits);
    out.stages.push_back({n, v.kind, v.reason, v.stats});
    if (v.timed_out) {
      out.timed_out = true;
      break;
    }
    if (v.kind == StageVerdict::Kind::Escapes) {
      out.kind = Outcome::Kind::Escapes;
      out.escape_certificate = EscapeCertificate{n, v.steps, f.dimension()};
      out.deciding_stage = n;
      return out;
    }
    if (v.kind == StageVerdict::Kind::Trapped) {
      out.kind = Outcome::Kind::Trapped;
      out.trapped_certificate = std::move(v.certificate);
      out.deciding_stage = n;
      return out;
    }
  }
  out.kind = Outcome::Kind::BudgetExhausted;
  return out;
}

// ---- checkers ------------------------------------------------------------------

CheckResult check_trapped_certificate(const TrappedCertificate& cert, const FunctionName& f,
                                      const ClosedSetName& a) {
  CheckResult res;
  if (cert.dim != f.dimension() || cert.dim != a.dimension()) {
    res.detail = "certificate dimension does not match the system";
    return res;
  }
  if (cert.stage < 0 || cert.stage > kMaxLevel) {
    res.detail = "certificate stage outside the supported range";
    return res;
  }
  if (cert.invariant_cubes.empty()) {
    res.detail = "empty invariant";
    return res;
  }
  CubeSet inv(cert.stage, cert.dim);
  for (const auto& c : cert.invariant_cubes) {
    if (!is_window_cube(cert.stage, cert.dim, c)) {
      res.detail = "invariant cube outside the stage window";
      res.witness = c;
      return res;
    }
    inv.insert(c);
  }

  StageContext ctx(cert.stage, cert.dim, f, a);
  for (const auto& c : cert.invariant_cubes) {
    const auto& v = ctx.fvalue(c);
    if (v.out_of_window) {
      res.detail = "image of an invariant cube leaves the window";
      res.witness = c;
      return res;
    }
    for (const auto& img : v.cubes) {
      if (!inv.contains(img)) {
        res.detail = "image of an invariant cube escapes the invariant";
        res.witness = c;
        return res;
      }
    }
  }
  for (const auto& c : cert.invariant_cubes) {
    if (!ctx.compactly_in_interior(c)) {
      res.detail = "invariant not compactly inside the interior cubes";
      res.witness = c;
      return res;
    }
  }
  res.ok = true;
  return res;
}

CheckResult check_escape_certificate(const EscapeCertificate& cert, const FunctionName& f,
                                     const ClosedSetName& a, const PointName& x) {
  CheckResult res;
  if (cert.dim != f.dimension() || cert.dim != a.dimension() || cert.dim != x.dimension()) {
    res.detail = "certificate dimension does not match the system";
    return res;
  }
  if (cert.stage < 0 || cert.stage > kMaxLevel) {
    res.detail = "certificate stage outside the supported range";
    return res;
  }
  if (cert.steps < 1) {
    res.detail = "step count must be at least 1";
    return res;
  }
  const int d = cert.dim;
  StageContext ctx(cert.stage, d, f, a);

  const CubeSet& xs = x.stage(cert.stage);
  bool x_uncertain = false;
  xs.for_each([&](const CubeCoords& c) {
    if (touches_window_complement(cert.stage, d, c)) x_uncertain = true;
  });
  if (x_uncertain) {
    res.detail = "point enclosure touches the window complement at this stage";
    return res;
  }

  CubeSet p(cert.stage, d);
  {
    bool oow = false;
    xs.for_each([&](const CubeCoords& c) {
      if (oow) return;
      const auto& v = ctx.fvalue(c);
      if (v.out_of_window) {
        oow = true;
        return;
      }
      for (const auto& img : v.cubes) {
        if (!ctx.compactly_in_exterior(img)) p.insert(img);
      }
    });
    if (oow) {
      res.detail = "point image leaves the window";
      return res;
    }
  }

  for (int k = 1; k < cert.steps && !p.empty(); ++k) {
    CubeSet next(cert.stage, d);
    bool failed = false;
    p.for_each([&](const CubeCoords& c) {
      if (failed) return;
      if (!is_window_cube(cert.stage, d, c)) {
        res.detail = "survivor chain leaves the window";
        res.witness = c;
        failed = true;
        return;
      }
      const auto& v = ctx.fvalue(c);
      if (v.out_of_window) {
        res.detail = "survivor image leaves the window";
        res.witness = c;
        failed = true;
        return;
      }
      for (const auto& img : v.cubes) {
        if (!ctx.compactly_in_exterior(img)) next.insert(img);
      }
    });
    if (failed) return res;
    p = std::move(next);
  }

  if (!p.empty()) {
    res.detail = "survivor chain still nonempty after the recorded step count";
    res.witness = *p.sorted().begin();
    return res;
  }
  res.ok = true;
  return res;
}

// ---- serialization ---------------------------------------------------------------

std::string serialize_certificate(const TrappedCertificate& cert) {
  std::ostringstream os;
  os << "kind trapped\n";
  os << "stage " << cert.stage << "\n";
  os << "dimension " << cert.dim << "\n";
  os << "cubes " << cert.invariant_cubes.size() << "\n";
  std::vector<CubeCoords> sorted = cert.invariant_cubes;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& c : sorted) {
    for (int i = 0; i < cert.dim; ++i) os << (i ? " " : "") << c[i];
    os << "\n";
  }
  return os.str();
}

std::string serialize_certificate(const EscapeCertificate& cert) {
  std::ostringstream os;
  os << "kind escape\n";
  os << "stage " << cert.stage << "\n";
  os << "steps " << cert.steps << "\n";
  os << "dimension " << cert.dim << "\n";
  return os.str();
}

namespace {

long parse_integer_field(SexprParser& p, const std::string& field) {
  std::string tok = p.next_token();
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ParseError{p.line(), p.column(), "field '" + field + "' needs an integer, got '" + tok + "'"};
  }
}

}  // namespace

CertificateFile parse_certificate(std::string_view text) {
  SexprParser p(text);
  CertificateFile out;
  bool saw_kind = false, saw_stage = false, saw_steps = false, saw_dim = false,
       saw_cubes = false;
  long stage = 0, steps = 0, dim = 0;
  std::vector<CubeCoords> cubes;

  while (!p.at_end()) {
    std::string key = p.next_token();
    if (key == "kind") {
      if (saw_kind) throw ParseError{p.line(), p.column(), "duplicate field 'kind'"};
      std::string v = p.next_token();
      if (v == "trapped") out.kind = CertificateFile::Kind::Trapped;
      else if (v == "escape") out.kind = CertificateFile::Kind::Escape;
      else throw ParseError{p.line(), p.column(), "unknown certificate kind '" + v + "'"};
      saw_kind = true;
    } else if (key == "stage") {
      if (saw_stage) throw ParseError{p.line(), p.column(), "duplicate field 'stage'"};
      stage = parse_integer_field(p, key);
      saw_stage = true;
    } else if (key == "steps") {
      if (saw_steps) throw ParseError{p.line(), p.column(), "duplicate field 'steps'"};
      steps = parse_integer_field(p, key);
      saw_steps = true;
    } else if (key == "dimension") {
      if (saw_dim) throw ParseError{p.line(), p.column(), "duplicate field 'dimension'"};
      dim = parse_integer_field(p, key);
      if (dim < 1 || dim > kMaxDim)
        throw ParseError{p.line(), p.column(), "dimension out of supported range"};
      saw_dim = true;
    } else if (key == "cubes") {
      if (saw_cubes) throw ParseError{p.line(), p.column(), "duplicate field 'cubes'"};
      if (!saw_dim)
        throw ParseError{p.line(), p.column(), "field 'cubes' must follow 'dimension'"};
      long count = parse_integer_field(p, key);
      if (count < 0) throw ParseError{p.line(), p.column(), "negative cube count"};
      for (long i = 0; i < count; ++i) {
        CubeCoords c{};
        for (long j = 0; j < dim; ++j) {
          long v = parse_integer_field(p, "cubes");
          if (v < INT32_MIN || v > INT32_MAX)
            throw ParseError{p.line(), p.column(), "cube coordinate out of range"};
          c[j] = static_cast<std::int32_t>(v);
        }
        cubes.push_back(c);
      }
      saw_cubes = true;
    } else {
      throw ParseError{p.line(), p.column(), "unknown certificate field '" + key + "'"};
    }
  }

  if (!saw_kind) throw ParseError{0, 0, "missing field 'kind'"};
  if (!saw_stage) throw ParseError{0, 0, "missing field 'stage'"};
  if (!saw_dim) throw ParseError{0, 0, "missing field 'dimension'"};
  if (out.kind == CertificateFile::Kind::Trapped) {
    if (saw_steps) throw ParseError{0, 0, "field 'steps' not allowed for kind trapped"};
    if (!saw_cubes) throw ParseError{0, 0, "missing field 'cubes'"};
    out.trapped.stage = static_cast<int>(stage);
    out.trapped.dim = static_cast<int>(dim);
    out.trapped.invariant_cubes = std::move(cubes);
  } else {
    if (saw_cubes) throw ParseError{0, 0, "field 'cubes' not allowed for kind escape"};
    if (!saw_steps) throw ParseError{0, 0, "missing field 'steps'"};
    out.escape.stage = static_cast<int>(stage);
    out.escape.steps = static_cast<int>(steps);
    out.escape.dim = static_cast<int>(dim);
  }
  return out;
}

}  // namespace escape
