#include "escape/cli_commands.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

namespace escape::cli {

namespace {

int print_parse_error(std::ostream& err, const std::string& path, const ParseError& e) {
  err << path << ":" << e.line << ":" << e.column << ": error: " << e.message << "\n";
  return kExitParseError;
}

int outcome_exit_code(const Outcome& out) {
  switch (out.kind) {
    case Outcome::Kind::Trapped: return kExitTrapped;
    case Outcome::Kind::Escapes: return kExitEscapes;
    case Outcome::Kind::BudgetExhausted: return kExitBudgetExhausted;
  }
  return kExitInternalError;
}

// Runs the instance, prints the report, writes the certificate if asked.
int run_and_report(const ReducedInstance& inst, int max_stage, std::optional<long> max_iters,
                   std::optional<std::size_t> max_cubes, std::optional<double> timeout,
                   const std::string& cert_out, std::ostream& out, std::ostream& err,
                   RunReport* report_out) {
  EscapeConfig cfg;
  cfg.max_stage = max_stage;
  cfg.max_iterations_per_stage = max_iters;
  cfg.max_cubes_per_stage = max_cubes;
  cfg.wall_timeout_seconds = timeout;

  auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.outcome = point_escape(inst.function, inst.set, inst.point, cfg);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cert_out.empty()) {
    if (report.outcome.trapped_certificate) {
      write_text_file(cert_out, serialize_certificate(*report.outcome.trapped_certificate));
      report.certificate_path = cert_out;
    } else if (report.outcome.escape_certificate) {
      write_text_file(cert_out, serialize_certificate(*report.outcome.escape_certificate));
      report.certificate_path = cert_out;
    } else {
      err << "no certificate to write (budget exhausted)\n";
    }
  }
  out << format_run_report(report);
  if (report_out) *report_out = report;
  return outcome_exit_code(report.outcome);
}

}  // namespace

int cmd_escape(const EscapeArgs& args, std::ostream& out, std::ostream& err,
               RunReport* report_out) {
  std::string text;
  try {
    text = read_text_file(args.spec_path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitParseError;
  }
  SystemSpec spec;
  try {
    spec = parse_system_spec(text);
  } catch (const ParseError& e) {
    return print_parse_error(err, args.spec_path, e);
  }
  try {
    ReducedInstance inst = instance_from_spec(spec);
    return run_and_report(inst, args.max_stage, args.max_iterations, args.max_cubes,
                          args.timeout_seconds, args.certificate_out, out, err, report_out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

int cmd_verify(const std::string& cert_path, const std::string& spec_path, std::ostream& out,
               std::ostream& err) {
  std::string cert_text, spec_text;
  try {
    cert_text = read_text_file(cert_path);
    spec_text = read_text_file(spec_path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitParseError;
  }
  CertificateFile cert;
  try {
    cert = parse_certificate(cert_text);
  } catch (const ParseError& e) {
    return print_parse_error(err, cert_path, e);
  }
  SystemSpec spec;
  try {
    spec = parse_system_spec(spec_text);
  } catch (const ParseError& e) {
    return print_parse_error(err, spec_path, e);
  }

  try {
    ReducedInstance inst = instance_from_spec(spec);
    auto reject = [&](const std::string& why, const std::optional<CubeCoords>& witness,
                      int dim) {
      err << "certificate rejected: " << why;
      if (witness) {
        err << " (witness cube";
        for (int i = 0; i < dim; ++i) err << " " << (*witness)[i];
        err << ")";
      }
      err << "\n";
      return kExitVerifyRejected;
    };

    // Evidence re-check first (best witnesses), then reproduction: the
    // canonical stage sweep up to the recorded stage must decide at exactly
    // that stage with exactly the recorded payload. Checking a single stage
    // would not pin the stage field: many systems yield valid evidence at
    // any fine enough stage. The sweep carries a generous work budget so a
    // fabricated certificate for a fan-out system cannot run the verifier
    // out of memory; certificates from runs that needed more than that are
    // rejected with the message below.
    EscapeConfig repro;
    repro.max_cubes_per_stage = std::size_t(1) << 22;
    if (cert.kind == CertificateFile::Kind::Trapped) {
      CheckResult chk = check_trapped_certificate(cert.trapped, inst.function, inst.set);
      if (!chk.ok) return reject(chk.detail, chk.witness, cert.trapped.dim);
      repro.max_stage = cert.trapped.stage;
      Outcome o = point_escape(inst.function, inst.set, inst.point, repro);
      if (o.kind != Outcome::Kind::Trapped || o.deciding_stage != cert.trapped.stage)
        return reject("stage sweep does not decide trapped at the recorded stage",
                      std::nullopt, cert.trapped.dim);
      std::vector<CubeCoords> recorded = cert.trapped.invariant_cubes;
      std::sort(recorded.begin(), recorded.end());
      if (o.trapped_certificate->invariant_cubes != recorded)
        return reject("stage sweep produced a different invariant", std::nullopt,
                      cert.trapped.dim);
    } else {
      CheckResult chk =
          check_escape_certificate(cert.escape, inst.function, inst.set, inst.point);
      if (!chk.ok) return reject(chk.detail, chk.witness, cert.escape.dim);
      repro.max_stage = cert.escape.stage;
      Outcome o = point_escape(inst.function, inst.set, inst.point, repro);
      if (o.kind != Outcome::Kind::Escapes || o.deciding_stage != cert.escape.stage ||
          o.escape_certificate->steps != cert.escape.steps)
        return reject("stage sweep does not reproduce the recorded stage and steps",
                      std::nullopt, cert.escape.dim);
    }
    out << "certificate verified\n";
    return kExitVerifyAccepted;
  } catch (const std::exception& e) {
    err << "certificate rejected: " << e.what() << "\n";
    return kExitVerifyRejected;
  }
}

int cmd_linear(const LinearArgs& args, std::ostream& out, std::ostream& err,
               RunReport* report_out, RobustnessClass* class_out) {
  std::string text;
  try {
    text = read_text_file(args.affine_path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitParseError;
  }
  AffineSystem sys;
  try {
    sys = parse_affine_file(text);
  } catch (const ParseError& e) {
    return print_parse_error(err, args.affine_path, e);
  }

  try {
    RobustnessClass cls = classify_affine(sys, args.tolerance);
    out << "advisory classification: ";
    switch (cls.kind) {
      case RobustnessClass::Kind::RobustTrapped:
        out << "robust-trapped (case " << cls.trapped_case << ")";
        break;
      case RobustnessClass::Kind::Escaping: out << "escaping"; break;
      case RobustnessClass::Kind::NotRobust: out << "not-robust"; break;
      case RobustnessClass::Kind::Undetermined: out << "undetermined"; break;
    }
    out << ": " << cls.detail << "\n";
    if (class_out) *class_out = cls;

    ReducedInstance inst = reduce_affine(sys);
    return run_and_report(inst, args.max_stage, args.max_iterations, args.max_cubes,
                          args.timeout_seconds, args.certificate_out, out, err, report_out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

int cmd_mandelbrot_scan(const ScanArgs& args, std::ostream& out, std::ostream& err,
                        ScanResult* result_out) {
  try {
    std::function<void(int, int)> progress;
    if (!args.quiet) {
      progress = [&err](int done, int total) {
        err << "\rscanned " << done << "/" << total << std::flush;
        if (done == total) err << "\n";
      };
    }
    ScanResult res = run_mandelbrot_scan(args.options, progress);
    write_text_file(args.out_prefix + ".csv", scan_to_csv(res));
    write_text_file(args.out_prefix + ".pgm", scan_to_pgm(res));
    out << "wrote " << args.out_prefix << ".csv and " << args.out_prefix << ".pgm\n";
    if (result_out) *result_out = std::move(res);
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace escape::cli
