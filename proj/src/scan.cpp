#include "escape/scan.hpp"

#include <atomic>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace escape {

ScanResult run_mandelbrot_scan(const ScanOptions& opt,
                               const std::function<void(int, int)>& progress) {
  if (opt.width < 1 || opt.height < 1) throw std::invalid_argument("scan resolution must be positive");
  if (opt.re1 <= opt.re0 || opt.im1 <= opt.im0)
    throw std::invalid_argument("scan box must have positive extent");

  ScanResult res;
  res.width = opt.width;
  res.height = opt.height;
  res.cells.resize(static_cast<std::size_t>(opt.width) * opt.height);

  const mpq_class dre = mpq_class((opt.re1 - opt.re0) / opt.width);
  const mpq_class dim_ = mpq_class((opt.im1 - opt.im0) / opt.height);
  const int total = opt.width * opt.height;

  // The target set and initial point are identical for every cell; their
  // memoized stage data is shared across the workers.
  ExprPtr ball = ex::sub(ex::max({ex::abs(ex::var(1)), ex::abs(ex::var(2))}), ex::constant(3));
  ClosedSetName shared_set = ClosedSetName::from_constraints(2, {ball});
  PointName shared_origin({mpq_class(0), mpq_class(0)});

  std::atomic<int> next{0};
  std::atomic<int> done{0};

  auto worker = [&]() {
    while (true) {
      int idx = next.fetch_add(1);
      if (idx >= total) return;
      int row = idx / opt.width;   // 0 = top
      int col = idx % opt.width;
      ScanCell& cell = res.cells[idx];
      cell.re = opt.re0 + mpq_class((2 * col + 1) * dre / 2);
      cell.im = opt.im1 - mpq_class((2 * row + 1) * dim_ / 2);

      FunctionName f = FunctionName::from_components(
          quadratic_map_components(QuadraticParameter{cell.re, cell.im}));
      EscapeConfig cfg;
      cfg.max_stage = opt.max_stage;
      cfg.max_iterations_per_stage = opt.max_iterations_per_stage;
      cfg.max_cubes_per_stage = opt.max_cubes_per_stage;
      Outcome out = point_escape(f, shared_set, shared_origin, cfg);
      cell.verdict = out.kind;
      cell.stage = out.deciding_stage;
      cell.steps = out.escape_certificate ? out.escape_certificate->steps : 0;

      int d = done.fetch_add(1) + 1;
      if (progress && (d % 64 == 0 || d == total)) progress(d, total);
    }
  };

  int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return res;
}

std::string format_rational(const mpq_class& v) {
  mpz_class den = v.get_den();
  int twos = 0, fives = 0;
  mpz_class rest = den;
  while (mpz_divisible_ui_p(rest.get_mpz_t(), 2)) {
    mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), 2);
    ++twos;
  }
  while (mpz_divisible_ui_p(rest.get_mpz_t(), 5)) {
    mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), 5);
    ++fives;
  }
  if (rest != 1) return v.get_num().get_str() + "/" + den.get_str();

  // Terminating decimal with exactly max(twos, fives) fractional digits.
  int digits = std::max(twos, fives);
  mpz_class scale(1);
  for (int i = 0; i < digits; ++i) scale *= 10;
  mpz_class scaled = v.get_num() * scale / den;  // exact by construction
  bool neg = sgn(scaled) < 0;
  mpz_class mag = neg ? mpz_class(-scaled) : scaled;
  std::string s = mag.get_str();
  if (digits == 0) return (neg ? "-" : "") + s;
  while (static_cast<int>(s.size()) <= digits) s.insert(s.begin(), '0');
  s.insert(s.end() - digits, '.');
  return (neg ? "-" : "") + s;
}

std::string scan_to_csv(const ScanResult& r) {
  std::ostringstream os;
  os << "re,im,verdict,stage,steps\n";
  for (const auto& c : r.cells) {
    os << format_rational(c.re) << "," << format_rational(c.im) << ",";
    switch (c.verdict) {
      case Outcome::Kind::Escapes: os << "escapes," << c.stage << "," << c.steps; break;
      case Outcome::Kind::Trapped: os << "trapped," << c.stage << ","; break;
      case Outcome::Kind::BudgetExhausted: os << "budget-exhausted,,"; break;
    }
    os << "\n";
  }
  return os.str();
}

std::string scan_to_pgm(const ScanResult& r) {
  std::ostringstream os;
  os << "P5\n" << r.width << " " << r.height << "\n255\n";
  for (const auto& c : r.cells) {
    unsigned char v = 128;
    if (c.verdict == Outcome::Kind::Escapes) v = 0;
    if (c.verdict == Outcome::Kind::Trapped) v = 255;
    os.put(static_cast<char>(v));
  }
  return os.str();
}

}  // namespace escape
