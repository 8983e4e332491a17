// Acceptance suite: end-to-end checks of the decision method, reductions,
// certificates and the parameter scan against independent oracles. Prints one
// PASS/FAIL line per criterion; exit code 0 only if every criterion passes.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <algorithm>
#include <random>
#include <sstream>

#include "escape/cli_commands.hpp"
#include "escape/report.hpp"
#include "escape/scan.hpp"
#include "escape/specfile.hpp"
#include "test_support.hpp"

using namespace escape;
namespace fs = std::filesystem;

namespace {

// Work bound for divergence fan-out instances (the parabolic c = 1/4 run
// would materialize ~10^8 cubes in one iteration at stage 9 without it). A
// budget exhaustion is exactly the verdict those fixtures assert.
constexpr std::size_t kFanOutBudget = std::size_t(1) << 17;

struct CriterionResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

std::vector<CriterionResult> g_results;

void run_criterion(const std::string& name, const std::function<bool(std::string&)>& body) {
  CriterionResult r;
  r.name = name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    r.pass = body(r.detail);
  } catch (const ParseError& e) {
    r.pass = false;
    r.detail = "parse error: " + e.message;
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  (" << std::fixed
            << std::setprecision(1) << r.seconds << " s)"
            << (r.detail.empty() ? "" : "  " + r.detail) << "\n"
            << std::flush;
  g_results.push_back(std::move(r));
}

fs::path work_dir() {
  fs::path p = fs::temp_directory_path() / "pointescape-acceptance";
  fs::create_directories(p);
  return p;
}

std::string write_file(const std::string& name, const std::string& text) {
  fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << text;
  return p.string();
}

// ---- random expression generator (criterion 1) -------------------------------

ExprPtr random_expr(std::mt19937_64& rng, int dim, int depth) {
  std::uniform_int_distribution<int> leaf(0, 2);
  std::uniform_int_distribution<int> node(0, 8);
  std::uniform_int_distribution<int> var(1, dim);
  std::uniform_int_distribution<long> num(-8, 8);
  std::uniform_int_distribution<long> den(1, 4);
  if (depth == 0 || leaf(rng) == 0) {
    if (leaf(rng) != 0) return ex::var(var(rng));
    return ex::constant(make_rational(num(rng), den(rng)));
  }
  switch (node(rng)) {
    case 0: return ex::neg(random_expr(rng, dim, depth - 1));
    case 1: return ex::abs(random_expr(rng, dim, depth - 1));
    case 2: return ex::add(random_expr(rng, dim, depth - 1), random_expr(rng, dim, depth - 1));
    case 3: return ex::sub(random_expr(rng, dim, depth - 1), random_expr(rng, dim, depth - 1));
    case 4: return ex::mul(random_expr(rng, dim, depth - 1), random_expr(rng, dim, depth - 1));
    case 5:
      return ex::min({random_expr(rng, dim, depth - 1), random_expr(rng, dim, depth - 1)});
    case 6:
      return ex::max({random_expr(rng, dim, depth - 1), random_expr(rng, dim, depth - 1)});
    case 7: {
      long c = num(rng);
      if (c == 0) c = 3;
      return ex::div(random_expr(rng, dim, depth - 1), ex::constant(make_rational(c, den(rng))));
    }
    default:
      return ex::div(random_expr(rng, dim, depth - 1),
                     ex::add(ex::constant(1), ex::abs(random_expr(rng, dim, depth - 1))));
  }
}

// ---- affine fixtures (criteria 3 and 7) ---------------------------------------

AffineSystem make_system(int dim, std::vector<std::vector<mpq_class>> a,
                         std::vector<mpq_class> b, std::vector<Halfspace> hs,
                         std::vector<mpq_class> x0) {
  AffineSystem s;
  s.dim = dim;
  s.a = std::move(a);
  s.b = std::move(b);
  s.halfspaces = std::move(hs);
  s.x0 = std::move(x0);
  s.validate();
  return s;
}

AffineSystem doubling_system() {
  return make_system(1, {{mpq_class(2)}}, {mpq_class(0)}, {{{mpq_class(-1)}, mpq_class(0)}},
                     {mpq_class(1)});
}

SystemSpec spec_from_instance(int dim, std::vector<ExprPtr> map, std::vector<ExprPtr> set,
                              std::vector<mpq_class> point) {
  SystemSpec s;
  s.dim = dim;
  s.map_components = std::move(map);
  s.set_constraints = std::move(set);
  s.point = std::move(point);
  return s;
}

std::vector<ExprPtr> ball3_constraints() {
  return {ex::sub(ex::max({ex::abs(ex::var(1)), ex::abs(ex::var(2))}), ex::constant(3))};
}

SystemSpec quadratic_spec(const QuadraticParameter& c) {
  return spec_from_instance(2, quadratic_map_components(c), ball3_constraints(),
                            {mpq_class(0), mpq_class(0)});
}

// ---- criteria -----------------------------------------------------------------

bool criterion_name_contracts(std::string& detail) {
  std::mt19937_64 rng(20260808);
  int total_samples = 0;
  int skipped = 0;
  for (int i = 0; i < 20; ++i) {
    int dim = 1 + (i % 2);
    std::vector<ExprPtr> comps;
    for (int k = 0; k < dim; ++k) comps.push_back(random_expr(rng, dim, 5));
    auto frep = validate_function_name(FunctionName::from_components(comps), 6, 60, rng());
    total_samples += frep.samples_checked;
    skipped += frep.out_of_window_skipped;
    if (!frep.ok) {
      detail = "function name violation: " + frep.issues.front().condition;
      return false;
    }
    auto srep = validate_closed_set_name(
        ClosedSetName::from_constraints(dim, {random_expr(rng, dim, 5)}), 6, 60, rng());
    total_samples += srep.samples_checked;
    if (!srep.ok) {
      detail = "set name violation: " + srep.issues.front().condition;
      return false;
    }
    std::uniform_int_distribution<long> num(-64, 64);
    std::vector<mpq_class> pt;
    for (int k = 0; k < dim; ++k) pt.push_back(make_rational(num(rng), 32));
    auto prep = validate_point_name(PointName(pt), 8);
    if (!prep.ok) {
      detail = "point name violation: " + prep.issues.front().condition;
      return false;
    }
  }
  if (total_samples < 1000) {
    detail = "only " + std::to_string(total_samples) + " exact samples";
    return false;
  }
  detail = std::to_string(total_samples) + " exact samples, " + std::to_string(skipped) +
           " out-of-window skips";
  return true;
}

bool criterion_containment_oracle(std::string& detail) {
  std::mt19937_64 rng(97531);
  for (int i = 0; i < 1000; ++i) {
    int dim = 1 + (i % 2);
    int level = i % 4;
    CubeSet a = escape::testing::random_cube_set(rng, level, dim, 10);
    CubeSet b = escape::testing::random_cube_set(rng, level, dim, 30);
    if (i % 2 == 0) b = escape::testing::fatten(set_union(b, a));
    if (compactly_contained(a, b) != escape::testing::compactly_contained_oracle(a, b)) {
      detail = "criterion/oracle disagreement at pair " + std::to_string(i);
      return false;
    }
  }
  detail = "1000 pairs";
  return true;
}

bool criterion_doubling(std::string& detail) {
  AffineSystem sys = doubling_system();
  EscapeConfig cfg;
  cfg.max_stage = 8;

  ReducedInstance raw = raw_affine_instance(sys);
  Outcome raw_out = point_escape(raw.function, raw.set, raw.point, cfg);
  if (raw_out.kind != Outcome::Kind::BudgetExhausted) {
    detail = "raw run decided; expected budget exhaustion";
    return false;
  }

  ReducedInstance red = reduce_affine(sys);
  Outcome out = point_escape(red.function, red.set, red.point, cfg);
  if (out.kind != Outcome::Kind::Trapped) {
    detail = "compactified run did not certify trapped";
    return false;
  }
  const TrappedCertificate& cert = *out.trapped_certificate;
  for (const auto& c : cert.invariant_cubes) {
    Dyadic lo = Dyadic::from_parts(c[0], -cert.stage);
    Dyadic hi = Dyadic::from_parts(c[0] + 1, -cert.stage);
    if (lo < Dyadic::from_parts(1, -2) || hi > Dyadic(2)) {
      detail = "invariant cube outside [1/4, 2]";
      return false;
    }
  }

  SystemSpec spec = spec_from_instance(1, compactified_map_components(sys),
                                       compactified_polyhedron_constraints(sys),
                                       compactify_point(sys.x0));
  std::string spec_path = write_file("doubling.esc", serialize_system_spec(spec));
  std::string cert_path = write_file("doubling.cert", serialize_certificate(cert));
  std::ostringstream null_out, null_err;
  if (cli::cmd_verify(cert_path, spec_path, null_out, null_err) != cli::kExitVerifyAccepted) {
    detail = "cmd_verify rejected the emitted certificate";
    return false;
  }
  detail = "trapped at stage " + std::to_string(cert.stage) + ", " +
           std::to_string(cert.invariant_cubes.size()) + " cubes";
  return true;
}

bool criterion_quadratic_fixtures(std::string& detail) {
  EscapeConfig cfg;
  cfg.max_stage = 9;

  auto c1 = mandelbrot_reduce(QuadraticParameter{mpq_class(1), mpq_class(0)});
  Outcome o1 = point_escape(c1.function, c1.set, c1.point, cfg);
  if (o1.kind != Outcome::Kind::Escapes || o1.escape_certificate->steps != 3) {
    detail = "c=1 expected escape at exactly step 3";
    return false;
  }

  for (long re : {0L, -1L}) {
    auto inst = mandelbrot_reduce(QuadraticParameter{mpq_class(re), mpq_class(0)});
    Outcome o = point_escape(inst.function, inst.set, inst.point, cfg);
    if (o.kind != Outcome::Kind::Trapped) {
      detail = "c=" + std::to_string(re) + " expected trapped";
      return false;
    }
    if (o.trapped_certificate->stage > 9) {
      detail = "certificate stage exceeds 9";
      return false;
    }
    CheckResult chk = check_trapped_certificate(*o.trapped_certificate, inst.function, inst.set);
    if (!chk.ok) {
      detail = "c=" + std::to_string(re) + " certificate re-check failed: " + chk.detail;
      return false;
    }
  }

  EscapeConfig budget = cfg;
  budget.max_cubes_per_stage = kFanOutBudget;
  auto c14 = mandelbrot_reduce(QuadraticParameter{make_rational(1, 4), mpq_class(0)});
  Outcome o14 = point_escape(c14.function, c14.set, c14.point, budget);
  if (o14.kind != Outcome::Kind::BudgetExhausted) {
    detail = "c=1/4 expected budget exhaustion at max stage 9";
    return false;
  }
  detail = "c=1 steps 3; c=0, c=-1 verified trapped; c=1/4 undecided";
  return true;
}

bool criterion_scan(std::string& detail) {
  cli::ScanArgs args;
  args.options.re0 = make_rational(-9, 4);
  args.options.re1 = make_rational(3, 4);
  args.options.im0 = make_rational(-3, 2);
  args.options.im1 = make_rational(3, 2);
  args.options.width = 48;
  args.options.height = 48;
  args.options.max_stage = 9;
  args.options.jobs = 4;
  args.out_prefix = (work_dir() / "scan48").string();
  args.quiet = true;
  std::ostringstream out, err;
  ScanResult res;
  if (cli::cmd_mandelbrot_scan(args, out, err, &res) != 0) {
    detail = "scan command failed: " + err.str();
    return false;
  }

  int trapped = 0, escapes = 0, undecided = 0;
  for (const auto& cell : res.cells) {
    QuadraticParameter c{cell.re, cell.im};
    const std::string where =
        " at re=" + format_rational(cell.re) + " im=" + format_rational(cell.im);
    mpq_class norm2 = cell.re * cell.re + cell.im * cell.im;
    auto cyc = attracting_cycle_oracle(c);

    if (cell.verdict == Outcome::Kind::Escapes) {
      ++escapes;
      if (!certified_escape_step(c, 1000)) {
        detail = "escape verdict not confirmed by the orbit simulation" + where;
        return false;
      }
    } else if (cell.verdict == Outcome::Kind::Trapped) {
      ++trapped;
      if (!cyc || cyc->multiplier >= 1.0) {
        detail = "trapped verdict without an attracting cycle" + where;
        return false;
      }
    } else {
      ++undecided;
    }

    if (norm2 > 4 && cell.verdict != Outcome::Kind::Escapes) {
      detail = "|c| > 2 cell not classified as escaping" + where;
      return false;
    }
    if (cyc && cyc->period <= 3 && cyc->multiplier < 0.8 &&
        cell.verdict != Outcome::Kind::Trapped) {
      detail = "strongly attracting cell not classified as trapped" + where;
      return false;
    }
  }
  detail = std::to_string(escapes) + " escaped, " + std::to_string(trapped) + " trapped, " +
           std::to_string(undecided) + " undecided";
  return true;
}

bool criterion_tamper(std::string& detail) {
  // Certificates for the acceptance fixtures, then every applicable mutation
  // of each must be rejected by cmd_verify.
  struct Emitted {
    std::string name;
    SystemSpec spec;
    int max_stage;
  };
  AffineSystem dbl = doubling_system();
  std::vector<Emitted> fixtures;
  fixtures.push_back({"doubling",
                      spec_from_instance(1, compactified_map_components(dbl),
                                         compactified_polyhedron_constraints(dbl),
                                         compactify_point(dbl.x0)),
                      8});
  fixtures.push_back({"c0", quadratic_spec(QuadraticParameter{mpq_class(0), mpq_class(0)}), 9});
  fixtures.push_back(
      {"cm1", quadratic_spec(QuadraticParameter{mpq_class(-1), mpq_class(0)}), 9});
  fixtures.push_back({"c1", quadratic_spec(QuadraticParameter{mpq_class(1), mpq_class(0)}), 9});

  std::ostringstream null_out, null_err;
  int mutations_checked = 0;
  for (const auto& fx : fixtures) {
    std::string spec_path = write_file(fx.name + ".esc", serialize_system_spec(fx.spec));
    std::string cert_path = (work_dir() / (fx.name + ".cert")).string();
    cli::EscapeArgs eargs;
    eargs.spec_path = spec_path;
    eargs.max_stage = fx.max_stage;
    eargs.certificate_out = cert_path;
    int rc = cli::cmd_escape(eargs, null_out, null_err);
    if (rc != cli::kExitTrapped && rc != cli::kExitEscapes) {
      detail = fx.name + ": no certificate emitted";
      return false;
    }
    if (cli::cmd_verify(cert_path, spec_path, null_out, null_err) !=
        cli::kExitVerifyAccepted) {
      detail = fx.name + ": emitted certificate did not verify";
      return false;
    }

    CertificateFile cert = parse_certificate(read_text_file(cert_path));
    auto expect_rejected = [&](const std::string& label, const std::string& text) {
      std::string path = write_file(fx.name + "." + label + ".cert", text);
      if (cli::cmd_verify(path, spec_path, null_out, null_err) == cli::kExitVerifyAccepted) {
        detail = fx.name + ": mutation '" + label + "' was accepted";
        return false;
      }
      ++mutations_checked;
      return true;
    };

    if (cert.kind == CertificateFile::Kind::Trapped) {
      TrappedCertificate t = cert.trapped;
      // Delete a cube the image maps into, so the evidence itself breaks.
      ReducedInstance inst = instance_from_spec(fx.spec);
      std::optional<CubeCoords> victim;
      CubeSet inv(t.stage, t.dim);
      for (const auto& c : t.invariant_cubes) inv.insert(c);
      for (const auto& c : t.invariant_cubes) {
        const auto& v = inst.function.value(t.stage, c);
        for (const auto& img : v.cubes) {
          if (!(img == c)) {
            victim = img;
            break;
          }
        }
        if (victim) break;
      }
      if (!victim) {
        detail = fx.name + ": no deletable image cube found";
        return false;
      }
      TrappedCertificate dropped = t;
      std::erase(dropped.invariant_cubes, *victim);
      if (!expect_rejected("delete", serialize_certificate(dropped))) return false;

      TrappedCertificate shifted = t;
      shifted.stage += 1;
      if (!expect_rejected("stage", serialize_certificate(shifted))) return false;

      std::string swapped = serialize_certificate(t);
      swapped.replace(swapped.find("trapped"), 7, "escape");
      if (!expect_rejected("kind", swapped)) return false;

      TrappedCertificate wrong_dim = t;
      wrong_dim.dim = t.dim == 1 ? 2 : 1;
      if (!expect_rejected("dimension", serialize_certificate(wrong_dim))) return false;

      // Steps decrement does not apply to trapped certificates; adding a
      // steps field must itself be rejected as malformed.
      if (!expect_rejected("steps", "kind trapped\nstage " + std::to_string(t.stage) +
                                        "\nsteps 3\ndimension " + std::to_string(t.dim) +
                                        "\ncubes 0\n"))
        return false;
    } else {
      EscapeCertificate e = cert.escape;
      EscapeCertificate fewer = e;
      fewer.steps -= 1;
      if (!expect_rejected("steps", serialize_certificate(fewer))) return false;

      EscapeCertificate shifted = e;
      shifted.stage += 1;
      if (!expect_rejected("stage", serialize_certificate(shifted))) return false;

      std::string swapped = serialize_certificate(e);
      swapped.replace(swapped.find("escape"), 6, "trapped");
      if (!expect_rejected("kind", swapped)) return false;

      EscapeCertificate wrong_dim = e;
      wrong_dim.dim = 1;
      if (!expect_rejected("dimension", serialize_certificate(wrong_dim))) return false;

      // Cube deletion does not apply; a cubes field on an escape
      // certificate must be rejected as malformed.
      if (!expect_rejected("cubes", "kind escape\nstage " + std::to_string(e.stage) +
                                        "\nsteps " + std::to_string(e.steps) +
                                        "\ndimension 2\ncubes 0\n"))
        return false;
    }
  }
  detail = std::to_string(mutations_checked) + " mutations rejected";
  return true;
}

bool criterion_classifier(std::string& detail) {
  struct Labeled {
    std::string name;
    AffineSystem sys;
    int expected_case;  // 0 = not robust, -1 = escaping
  };
  std::vector<Labeled> suite;

  // Case 1: contractions with interior fixed points.
  suite.push_back({"contraction-2d",
                   make_system(2,
                               {{make_rational(1, 2), mpq_class(0)},
                                {mpq_class(0), make_rational(1, 2)}},
                               {mpq_class(1), mpq_class(0)},
                               {{{mpq_class(1), mpq_class(0)}, mpq_class(10)},
                                {{mpq_class(-1), mpq_class(0)}, mpq_class(0)},
                                {{mpq_class(0), mpq_class(1)}, mpq_class(1)},
                                {{mpq_class(0), mpq_class(-1)}, mpq_class(1)}},
                               {mpq_class(1), mpq_class(0)}),
                   1});
  suite.push_back({"contraction-1d",
                   make_system(1, {{make_rational(1, 2)}}, {mpq_class(1)},
                               {{{mpq_class(1)}, mpq_class(10)},
                                {{mpq_class(-1)}, mpq_class(0)}},
                               {mpq_class(1)}),
                   1});
  suite.push_back({"contraction-mixed",
                   make_system(2,
                               {{make_rational(1, 2), mpq_class(0)},
                                {mpq_class(0), make_rational(-1, 3)}},
                               {mpq_class(1), mpq_class(1)},
                               {{{mpq_class(1), mpq_class(0)}, mpq_class(10)},
                                {{mpq_class(-1), mpq_class(0)}, mpq_class(10)},
                                {{mpq_class(0), mpq_class(1)}, mpq_class(10)},
                                {{mpq_class(0), mpq_class(-1)}, mpq_class(10)}},
                               {mpq_class(0), mpq_class(0)}),
                   1});

  // Case 2: strictly dominant expansion along an interior direction.
  suite.push_back({"doubling", doubling_system(), 2});
  suite.push_back({"expand-contract",
                   make_system(2,
                               {{mpq_class(2), mpq_class(0)},
                                {mpq_class(0), make_rational(1, 2)}},
                               {mpq_class(0), mpq_class(0)},
                               {{{mpq_class(-1), mpq_class(0)}, mpq_class(0)}},
                               {mpq_class(1), mpq_class(1)}),
                   2});
  suite.push_back({"upper-triangular",
                   make_system(2, {{mpq_class(3), mpq_class(1)}, {mpq_class(0), mpq_class(1)}},
                               {mpq_class(0), mpq_class(0)},
                               {{{mpq_class(-1), mpq_class(0)}, mpq_class(0)}},
                               {mpq_class(1), mpq_class(1)}),
                   2});

  // Case 3: unit eigenvalue with positive drift.
  suite.push_back({"unit-drift-1d",
                   make_system(1, {{mpq_class(1)}}, {mpq_class(1)},
                               {{{mpq_class(-1)}, mpq_class(0)}}, {mpq_class(1)}),
                   3});
  suite.push_back({"unit-drift-2d",
                   make_system(2,
                               {{mpq_class(1), mpq_class(0)},
                                {mpq_class(0), make_rational(1, 2)}},
                               {mpq_class(1), mpq_class(0)},
                               {{{mpq_class(-1), mpq_class(0)}, mpq_class(0)}},
                               {mpq_class(1), mpq_class(1)}),
                   3});
  suite.push_back({"unit-drift-alternating",
                   make_system(2,
                               {{mpq_class(1), mpq_class(0)},
                                {mpq_class(0), make_rational(-1, 2)}},
                               {mpq_class(2), mpq_class(1)},
                               {{{mpq_class(-1), mpq_class(0)}, mpq_class(0)}},
                               {mpq_class(1), mpq_class(0)}),
                   3});

  // Not robust: unit-modulus complex spectrum.
  suite.push_back({"rotation",
                   make_system(2, {{mpq_class(0), mpq_class(-1)}, {mpq_class(1), mpq_class(0)}},
                               {mpq_class(0), mpq_class(0)},
                               {{{mpq_class(1), mpq_class(0)}, mpq_class(10)},
                                {{mpq_class(-1), mpq_class(0)}, mpq_class(10)},
                                {{mpq_class(0), mpq_class(1)}, mpq_class(10)},
                                {{mpq_class(0), mpq_class(-1)}, mpq_class(10)}},
                               {mpq_class(1), mpq_class(0)}),
                   0});
  // Not robust: dominant eigenvector decisively outside the cone interior.
  suite.push_back({"eigenvector-outside",
                   make_system(2,
                               {{mpq_class(2), mpq_class(0)},
                                {mpq_class(0), make_rational(1, 2)}},
                               {mpq_class(0), mpq_class(0)},
                               {{{mpq_class(1), mpq_class(-1)}, mpq_class(1)},
                                {{mpq_class(-1), mpq_class(-1)}, mpq_class(1)}},
                               {mpq_class(0), mpq_class(1)}),
                   0});
  // Escaping with the exit invisible below stage 9 (negative eigencomponent
  // along the only cone-interior eigenvector).
  suite.push_back({"slow-exit",
                   make_system(1, {{mpq_class(2)}}, {mpq_class(0)},
                               {{{mpq_class(1)}, mpq_class(1000)}}, {mpq_class(1)}),
                   -1});

  EscapeConfig cfg;
  cfg.max_stage = 8;
  EscapeConfig negative_cfg = cfg;
  negative_cfg.max_cubes_per_stage = std::size_t(1) << 16;

  for (const auto& item : suite) {
    RobustnessClass cls = classify_affine(item.sys);
    ReducedInstance red = reduce_affine(item.sys);
    if (item.expected_case >= 1) {
      if (cls.kind != RobustnessClass::Kind::RobustTrapped ||
          cls.trapped_case != item.expected_case) {
        detail = item.name + ": classifier disagreed (" + cls.detail + ")";
        return false;
      }
      Outcome out = point_escape(red.function, red.set, red.point, cfg);
      if (out.kind != Outcome::Kind::Trapped) {
        detail = item.name + ": decision run did not certify trapped";
        return false;
      }
    } else {
      RobustnessClass::Kind want = item.expected_case == 0
                                       ? RobustnessClass::Kind::NotRobust
                                       : RobustnessClass::Kind::Escaping;
      if (cls.kind != want) {
        detail = item.name + ": classifier disagreed (" + cls.detail + ")";
        return false;
      }
      Outcome out = point_escape(red.function, red.set, red.point, negative_cfg);
      if (out.kind != Outcome::Kind::BudgetExhausted) {
        detail = item.name + ": decision run decided a non-robust instance";
        return false;
      }
    }
  }
  detail = "12 systems concordant";
  return true;
}

bool criterion_perturbation(std::string& detail) {
  auto base = quadratic_map_components(QuadraticParameter{make_rational(1, 4), mpq_class(0)});
  auto pert = perturb_toward(base, {make_rational(1, 2), mpq_class(0)}, make_rational(1, 8),
                             {mpq_class(4), mpq_class(0)});

  // First half: the blend genuinely makes the origin escape (exact orbit).
  int exact_exit = -1;
  std::vector<mpq_class> z{mpq_class(0), mpq_class(0)};
  for (int step = 1; step <= 25 && exact_exit < 0; ++step) {
    auto next = eval_vector_exact(pert, z);
    if (!next) break;
    z = *next;
    if (rational_sup_norm(z) > 3) exact_exit = step;
  }
  if (exact_exit < 0) {
    detail = "exact orbit of the perturbed map did not leave the ball";
    return false;
  }

  ReducedInstance inst{FunctionName::from_components(pert),
                       ClosedSetName::from_constraints(2, ball3_constraints()),
                       PointName({mpq_class(0), mpq_class(0)})};
  EscapeConfig cfg;
  cfg.max_stage = 9;
  cfg.max_cubes_per_stage = kFanOutBudget;
  Outcome out = point_escape(inst.function, inst.set, inst.point, cfg);
  if (out.kind != Outcome::Kind::Escapes) {
    // Known limitation, reported honestly rather than loosened: the orbit
    // only grazes the bump edge (blend weight ~0.1), so the enclosure of the
    // edge slice (never thinner than two grid cubes) is stretched ~5*10^3
    // fold by the blend gradient and the subsequent squarings, and its fast
    // edge leaves the stage window before its slow edge clears the ball.
    // Every stage up to 9 therefore ends with a window exit or a work-budget
    // stop; detection needs stages around 13 with multi-gigabyte budgets.
    detail = "exact orbit exits at step " + std::to_string(exact_exit) +
             ", but no stage <= 9 can certify it (bump-edge enclosure outruns the window)";
    return false;
  }
  detail = "escapes at stage " + std::to_string(out.deciding_stage) + " by step " +
           std::to_string(out.escape_certificate->steps);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion filter for development: `acceptance 6 8` runs only
  // those numbers. The registered ctest invocation passes no arguments and
  // runs everything.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto wanted = [&](int n) {
    return only.empty() || std::find(only.begin(), only.end(), n) != only.end();
  };

  std::cout << "acceptance suite\n";
  if (wanted(1))
    run_criterion("1. name-contract suite (soundness/nesting/hereditary)",
                  criterion_name_contracts);
  if (wanted(2))
    run_criterion("2. compact-containment oracle equivalence", criterion_containment_oracle);
  if (wanted(3))
    run_criterion("3. doubling system: raw stalls, compactified certifies",
                  criterion_doubling);
  if (wanted(4))
    run_criterion("4. quadratic fixtures (c = 1, 0, -1, 1/4)", criterion_quadratic_fixtures);
  if (wanted(5))
    run_criterion("5. Mandelbrot scan soundness (48x48, stage 9)", criterion_scan);
  if (wanted(6)) run_criterion("6. certificate tamper suite", criterion_tamper);
  if (wanted(7)) run_criterion("7. affine classifier concordance", criterion_classifier);
  if (wanted(8)) run_criterion("8. bump perturbation makes c=1/4 escape",
                               criterion_perturbation);

  bool all = true;
  for (const auto& r : g_results) all = all && r.pass;
  std::cout << (all ? "all criteria passed\n" : "SOME CRITERIA FAILED\n");
  return all ? 0 : 1;
}
