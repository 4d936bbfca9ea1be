// Acceptance run: every suite at its stated tolerance, one line per criterion.
// Exit status is nonzero if any criterion fails.

#include <cstdio>
#include <iostream>

#include "nchs/verify.hpp"

using namespace nchs;

namespace {

struct Line {
  int id;
  std::string name;
  bool passed;
  double seconds;
  double budget;
  std::string detail;
};

void print(const Line& l) {
  std::printf("[%s] C%-2d %-48s %7.2fs (budget %gs)%s%s\n", l.passed ? "PASS" : "FAIL", l.id, l.name.c_str(), l.seconds,
              l.budget, l.detail.empty() ? "" : "  ", l.detail.c_str());
}

std::string metric_text(const SuiteResult& r) {
  std::ostringstream os;
  os << "instances " << r.instances << ", failures " << r.failures;
  for (const auto& [k, v] : r.metrics.items())
    if (v.is_number()) os << ", " << k << " " << std::setprecision(3) << v.get<double>();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  VerifyConfig cfg;
  if (argc > 1) cfg.jobs = std::max(1, std::atoi(argv[1]));
  const std::filesystem::path base = std::filesystem::temp_directory_path() / "nchs_acceptance";
  std::filesystem::remove_all(base);

  const auto t0 = std::chrono::steady_clock::now();
  const VerifyRun first = run_verify(cfg, (base / "run1").string());
  const double full = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool all = true;
  int id = 1;
  for (const SuiteResult& s : first.suites) {
    const bool ok = s.passed && s.seconds < s.budget_seconds;
    std::string detail = metric_text(s);
    for (const std::string& n : s.notes) detail += "\n       " + n;
    if (s.passed && !ok) detail += "\n       over runtime budget";
    print({id++, s.title, ok, s.seconds, s.budget_seconds, detail});
    all = all && ok;
  }

  const auto t1 = std::chrono::steady_clock::now();
  const VerifyRun second = run_verify(cfg, (base / "run2").string());
  const double again = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  bool identical = true;
  for (const char* f : {"summary.json", "margins_histogram.csv"})
    identical = identical && read_file((base / "run1" / f).string()) == read_file((base / "run2" / f).string());
  const bool ok12 = identical && second.passed == first.passed && again < 2.0 * full && full < 360.0;
  print({12, "determinism (byte-identical summaries)", ok12, again, 2.0 * full,
         std::string(identical ? "summary and histogram identical" : "outputs differ") + ", full suite " +
             std::to_string(full).substr(0, 5) + "s"});
  all = all && ok12;

  std::printf("%s\n", all ? "all acceptance criteria passed" : "acceptance criteria FAILED");
  return all ? 0 : 1;
}
