#pragma once

#include <functional>
#include <string>
#include <vector>

#include "escape/systems.hpp"

namespace escape {

// Parameter-plane scan of the quadratic family over a box, classifying every
// cell center with the decision run. Cells are centers (re0 + (i+1/2) d), not
// corners, so exact dyadic boundary artifacts are never sampled. Output is
// deterministic and independent of the job count: workers fill a preallocated
// grid and the files are written once, in row-major order, top row first.
struct ScanOptions {
  mpq_class re0, re1, im0, im1;
  int width = 48;
  int height = 48;
  int max_stage = 9;
  long max_iterations_per_stage = 2000;
  std::size_t max_cubes_per_stage = 1u << 13;  // bounds divergence fan-out per cell
  int jobs = 1;
};

struct ScanCell {
  mpq_class re, im;
  Outcome::Kind verdict = Outcome::Kind::BudgetExhausted;
  int stage = -1;  // deciding stage, -1 when the budget ran out
  int steps = 0;   // escape step count, 0 otherwise
};

struct ScanResult {
  int width = 0;
  int height = 0;
  std::vector<ScanCell> cells;  // row-major, row 0 = top (largest im)
};

ScanResult run_mandelbrot_scan(const ScanOptions& opt,
                               const std::function<void(int done, int total)>& progress = {});

// Exact decimal when the denominator is 2^a 5^b, "p/q" otherwise.
std::string format_rational(const mpq_class& v);

std::string scan_to_csv(const ScanResult& r);
std::string scan_to_pgm(const ScanResult& r);  // P5, 0 escaped / 128 budget / 255 trapped

}  // namespace escape
