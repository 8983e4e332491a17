#include <iostream>

#include "CLI11.hpp"
#include "escape/cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "pointescape: decides whether a point escapes a closed set under iteration,\n"
      "with machine-checkable certificates.\n"
      "Exit codes: escape/linear report 0=trapped 1=escapes 2=budget-exhausted;\n"
      "verify reports 0=accepted 1=rejected; 64=parse error on any subcommand."};
  app.require_subcommand(1);

  escape::cli::EscapeArgs eargs;
  long e_iters = 0;
  std::size_t e_cubes = 0;
  double e_timeout = 0.0;
  auto* esc = app.add_subcommand("escape", "run the decision method on a system spec file");
  esc->add_option("spec", eargs.spec_path, "system spec file")->required();
  esc->add_option("--max-stage", eargs.max_stage, "stage budget (default 8)");
  auto* e_it = esc->add_option("--max-iters", e_iters, "per-stage iteration cap (default unlimited)");
  auto* e_cu = esc->add_option("--max-cubes", e_cubes, "per-stage cube-set budget (default unlimited)");
  auto* e_to = esc->add_option("--timeout", e_timeout, "wall timeout in seconds");
  esc->add_option("--cert", eargs.certificate_out, "write the certificate here on a decisive verdict");

  std::string v_cert, v_spec;
  auto* ver = app.add_subcommand("verify", "re-check a certificate against a system spec file");
  ver->add_option("certificate", v_cert, "certificate file")->required();
  ver->add_option("spec", v_spec, "system spec file")->required();

  escape::cli::LinearArgs largs;
  long l_iters = 0;
  std::size_t l_cubes = 0;
  double l_timeout = 0.0;
  auto* lin = app.add_subcommand(
      "linear", "classify an affine system, compactify it, and run the decision method");
  lin->add_option("system", largs.affine_path, "affine system file")->required();
  lin->add_option("--max-stage", largs.max_stage, "stage budget (default 8)");
  auto* l_it = lin->add_option("--max-iters", l_iters, "per-stage iteration cap (default unlimited)");
  auto* l_cu = lin->add_option("--max-cubes", l_cubes, "per-stage cube-set budget (default unlimited)");
  auto* l_to = lin->add_option("--timeout", l_timeout, "wall timeout in seconds");
  lin->add_option("--cert", largs.certificate_out, "write the certificate here on a decisive verdict");
  lin->add_option("--tolerance", largs.tolerance, "classifier tolerance band (default 1e-9)");

  escape::cli::ScanArgs sargs;
  std::vector<std::string> box;
  std::vector<int> res{48, 48};
  auto* scan = app.add_subcommand("mandelbrot-scan",
                                  "classify quadratic parameters over a grid of cell centers");
  scan->add_option("--box", box, "re0 re1 im0 im1 (rationals or decimals)")
      ->expected(4)
      ->required();
  scan->add_option("--res", res, "grid width and height")->expected(2);
  scan->add_option("--max-stage", sargs.options.max_stage, "stage budget per cell (default 9)");
  scan->add_option("--max-iters", sargs.options.max_iterations_per_stage,
                   "per-stage iteration cap per cell (default 2000)");
  scan->add_option("--max-cubes", sargs.options.max_cubes_per_stage,
                   "per-stage cube-set budget per cell (default 8192)");
  scan->add_option("--jobs", sargs.options.jobs, "worker threads (output is identical for any value)");
  scan->add_option("--out", sargs.out_prefix, "output prefix for .csv and .pgm")->required();
  scan->add_flag("--quiet", sargs.quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);

  if (esc->parsed()) {
    if (*e_it) eargs.max_iterations = e_iters;
    if (*e_cu) eargs.max_cubes = e_cubes;
    if (*e_to) eargs.timeout_seconds = e_timeout;
    return escape::cli::cmd_escape(eargs, std::cout, std::cerr);
  }
  if (ver->parsed()) {
    return escape::cli::cmd_verify(v_cert, v_spec, std::cout, std::cerr);
  }
  if (lin->parsed()) {
    if (*l_it) largs.max_iterations = l_iters;
    if (*l_cu) largs.max_cubes = l_cubes;
    if (*l_to) largs.timeout_seconds = l_timeout;
    return escape::cli::cmd_linear(largs, std::cout, std::cerr);
  }
  if (scan->parsed()) {
    try {
      sargs.options.re0 = escape::parse_rational_token(box[0]);
      sargs.options.re1 = escape::parse_rational_token(box[1]);
      sargs.options.im0 = escape::parse_rational_token(box[2]);
      sargs.options.im1 = escape::parse_rational_token(box[3]);
    } catch (const escape::ParseError& e) {
      std::cerr << "error: " << e.message << "\n";
      return escape::cli::kExitParseError;
    }
    sargs.options.width = res[0];
    sargs.options.height = res[1];
    return escape::cli::cmd_mandelbrot_scan(sargs, std::cout, std::cerr);
  }
  return escape::cli::kExitInternalError;
}
