#include "escape/report.hpp"

#include <sstream>

#include "json.hpp"

namespace escape {

namespace {

using nlohmann::json;

std::string kind_str(Outcome::Kind k) {
  switch (k) {
    case Outcome::Kind::Escapes: return "escapes";
    case Outcome::Kind::Trapped: return "trapped";
    case Outcome::Kind::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

Outcome::Kind kind_from(const std::string& s) {
  if (s == "escapes") return Outcome::Kind::Escapes;
  if (s == "trapped") return Outcome::Kind::Trapped;
  if (s == "budget-exhausted") return Outcome::Kind::BudgetExhausted;
  throw std::runtime_error("unknown outcome kind: " + s);
}

std::string stage_kind_str(StageVerdict::Kind k) {
  switch (k) {
    case StageVerdict::Kind::Escapes: return "escapes";
    case StageVerdict::Kind::Trapped: return "trapped";
    case StageVerdict::Kind::Unknown: return "unknown";
  }
  return "?";
}

StageVerdict::Kind stage_kind_from(const std::string& s) {
  if (s == "escapes") return StageVerdict::Kind::Escapes;
  if (s == "trapped") return StageVerdict::Kind::Trapped;
  if (s == "unknown") return StageVerdict::Kind::Unknown;
  throw std::runtime_error("unknown stage kind: " + s);
}

UnknownReason reason_from(const std::string& s) {
  if (s == "out-of-window") return UnknownReason::OutOfWindow;
  if (s == "orbit-closure-not-interior") return UnknownReason::OrbitClosureNotInterior;
  if (s == "point-uncertain") return UnknownReason::PointUncertain;
  if (s == "iteration-cap") return UnknownReason::IterationCap;
  if (s == "work-budget") return UnknownReason::WorkBudget;
  throw std::runtime_error("unknown stage reason: " + s);
}

}  // namespace

bool RunReport::operator==(const RunReport& o) const {
  auto cert_eq = [&]() {
    if (outcome.trapped_certificate.has_value() != o.outcome.trapped_certificate.has_value())
      return false;
    if (outcome.trapped_certificate &&
        (outcome.trapped_certificate->stage != o.outcome.trapped_certificate->stage ||
         outcome.trapped_certificate->dim != o.outcome.trapped_certificate->dim ||
         outcome.trapped_certificate->invariant_cubes !=
             o.outcome.trapped_certificate->invariant_cubes))
      return false;
    if (outcome.escape_certificate.has_value() != o.outcome.escape_certificate.has_value())
      return false;
    if (outcome.escape_certificate &&
        (outcome.escape_certificate->stage != o.outcome.escape_certificate->stage ||
         outcome.escape_certificate->steps != o.outcome.escape_certificate->steps ||
         outcome.escape_certificate->dim != o.outcome.escape_certificate->dim))
      return false;
    return true;
  };
  if (outcome.kind != o.outcome.kind || outcome.deciding_stage != o.outcome.deciding_stage ||
      outcome.timed_out != o.outcome.timed_out || wall_seconds != o.wall_seconds ||
      certificate_path != o.certificate_path)
    return false;
  if (outcome.stages.size() != o.outcome.stages.size()) return false;
  for (std::size_t i = 0; i < outcome.stages.size(); ++i) {
    const auto& a = outcome.stages[i];
    const auto& b = o.outcome.stages[i];
    if (a.stage != b.stage || a.kind != b.kind || a.reason != b.reason ||
        a.stats.iterations != b.stats.iterations ||
        a.stats.function_evals != b.stats.function_evals ||
        a.stats.orbit_cubes != b.stats.orbit_cubes)
      return false;
  }
  return cert_eq();
}

std::string run_report_to_json(const RunReport& r) {
  json j;
  j["kind"] = kind_str(r.outcome.kind);
  j["deciding_stage"] = r.outcome.deciding_stage;
  j["timed_out"] = r.outcome.timed_out;
  j["wall_seconds"] = r.wall_seconds;
  j["certificate_path"] = r.certificate_path;
  if (r.outcome.escape_certificate) {
    j["escape_certificate"] = {{"stage", r.outcome.escape_certificate->stage},
                               {"steps", r.outcome.escape_certificate->steps},
                               {"dimension", r.outcome.escape_certificate->dim}};
  }
  if (r.outcome.trapped_certificate) {
    json cubes = json::array();
    for (const auto& c : r.outcome.trapped_certificate->invariant_cubes) {
      json tup = json::array();
      for (int i = 0; i < r.outcome.trapped_certificate->dim; ++i) tup.push_back(c[i]);
      cubes.push_back(tup);
    }
    j["trapped_certificate"] = {{"stage", r.outcome.trapped_certificate->stage},
                                {"dimension", r.outcome.trapped_certificate->dim},
                                {"cubes", cubes}};
  }
  json stages = json::array();
  for (const auto& s : r.outcome.stages) {
    json js = {{"stage", s.stage},
               {"verdict", stage_kind_str(s.kind)},
               {"iterations", s.stats.iterations},
               {"function_evals", s.stats.function_evals},
               {"orbit_cubes", s.stats.orbit_cubes}};
    if (s.reason) js["reason"] = to_string(*s.reason);
    stages.push_back(js);
  }
  j["stages"] = stages;
  return j.dump(2) + "\n";
}

RunReport run_report_from_json(const std::string& text) {
  json j = json::parse(text);
  RunReport r;
  r.outcome.kind = kind_from(j.at("kind").get<std::string>());
  r.outcome.deciding_stage = j.at("deciding_stage").get<int>();
  r.outcome.timed_out = j.at("timed_out").get<bool>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.certificate_path = j.at("certificate_path").get<std::string>();
  if (j.contains("escape_certificate")) {
    const auto& e = j["escape_certificate"];
    r.outcome.escape_certificate =
        EscapeCertificate{e.at("stage").get<int>(), e.at("steps").get<int>(),
                          e.at("dimension").get<int>()};
  }
  if (j.contains("trapped_certificate")) {
    const auto& t = j["trapped_certificate"];
    TrappedCertificate cert;
    cert.stage = t.at("stage").get<int>();
    cert.dim = t.at("dimension").get<int>();
    for (const auto& tup : t.at("cubes")) {
      CubeCoords c{};
      int i = 0;
      for (const auto& v : tup) c[i++] = v.get<std::int32_t>();
      cert.invariant_cubes.push_back(c);
    }
    r.outcome.trapped_certificate = std::move(cert);
  }
  for (const auto& js : j.at("stages")) {
    Outcome::StageReport s;
    s.stage = js.at("stage").get<int>();
    s.kind = stage_kind_from(js.at("verdict").get<std::string>());
    s.stats.iterations = js.at("iterations").get<long>();
    s.stats.function_evals = js.at("function_evals").get<std::size_t>();
    s.stats.orbit_cubes = js.at("orbit_cubes").get<std::size_t>();
    if (js.contains("reason")) s.reason = reason_from(js["reason"].get<std::string>());
    r.outcome.stages.push_back(s);
  }
  return r;
}

std::string format_run_report(const RunReport& r) {
  std::ostringstream os;
  os << "outcome: " << kind_str(r.outcome.kind);
  if (r.outcome.kind == Outcome::Kind::Escapes)
    os << " (stage " << r.outcome.escape_certificate->stage << ", steps "
       << r.outcome.escape_certificate->steps << ")";
  if (r.outcome.kind == Outcome::Kind::Trapped)
    os << " (stage " << r.outcome.trapped_certificate->stage << ", "
       << r.outcome.trapped_certificate->invariant_cubes.size() << " invariant cubes)";
  if (r.outcome.timed_out) os << " [timed out]";
  os << "\n";
  for (const auto& s : r.outcome.stages) {
    os << "  stage " << s.stage << ": " << stage_kind_str(s.kind);
    if (s.reason) os << " (" << to_string(*s.reason) << ")";
    os << ", iterations " << s.stats.iterations << ", evals " << s.stats.function_evals
       << ", orbit cubes " << s.stats.orbit_cubes << "\n";
  }
  os << "wall seconds: " << r.wall_seconds << "\n";
  if (!r.certificate_path.empty()) os << "certificate: " << r.certificate_path << "\n";
  return os.str();
}

}  // namespace escape
