// Acceptance harness: one PASS/FAIL line per criterion.  Tolerances, sizes and
// runtime limits are pinned here rather than taken from library defaults.
// Usage: acceptance [criterion ids...]   (no arguments runs all nine)

#include "qsphere/session.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>

using namespace qsphere;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
};

struct Criterion {
  int id;
  std::string title;
  double limitSeconds;  // 0 = no runtime limit
  std::function<Outcome()> run;
};

SessionConfig configFor(const std::string& q) {
  SessionConfig cfg;
  cfg.q = q;
  cfg.scalarMode = "exact";
  cfg.truncation = 200;
  return cfg;
}

SuiteOptions pinnedOptions(const SessionConfig& cfg) {
  SuiteOptions opt;
  opt.seed = 2024;
  opt.hopfDegree = 5;
  opt.derivationPairs = 100;
  opt.derivationDegree = 3;
  opt.projectionLevel = 5;
  opt.berezinElements = 50;
  opt.berezinDegree = 4;
  opt.berezinMaxN = 3;
  opt.lipElements = 50;
  opt.lipDegree = 4;
  opt.lipMaxN = 5;
  opt.contractionTol = 1e-6;
  opt.oracleElements = 20;
  opt.oracleDegree = 3;
  opt.oracleTol = 1e-4;
  opt.sliceTriples = 20;
  opt.sliceDegree = 2;
  opt.sliceTol = 1e-4;
  opt.truncation = 200;
  opt.distMinN = 1;
  opt.distMaxN = 5;
  opt.distance = cfg.distanceProblem(1);
  opt.gap = 1e-3;
  opt.trendTol = 1e-3;
  opt.spectrumMaxN = 5;
  opt.spectrumSpins = 2;
  return opt;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string describe(const SuiteReport& r) {
  std::string s;
  for (const auto& c : r.checks) {
    if (!s.empty()) s += "; ";
    s += c.name + " " + toString(c.status) + " (" + std::to_string(c.cases) + " cases, residual " + fmt(c.residual);
    if (c.flagged > 0) s += ", " + std::to_string(c.flagged) + " flagged at " + c.detail;
    s += ")";
  }
  return s;
}

// identities must hold with zero residual
Outcome exactSuite(const std::string& q, const std::string& suite) {
  Session<ExactScalar> session(configFor(q));
  auto r = session.verifier(pinnedOptions(session.config())).run(suite);
  bool zero = std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.residual == 0; });
  return {r.clean() && zero, describe(r)};
}

// numerical suites: no failures and no unconverged estimates
Outcome cleanSuite(const std::string& q, const std::string& suite) {
  Session<ExactScalar> session(configFor(q));
  auto r = session.verifier(pinnedOptions(session.config())).run(suite);
  return {r.clean(), describe(r)};
}

Outcome contraction() {
  Outcome out{true, {}};
  for (std::string q : {"1/2", "9/10"}) {
    auto o = cleanSuite(q, "contraction");
    out.pass = out.pass && o.pass;
    out.summary += (out.summary.empty() ? "" : " | ") + ("q = " + q + ": " + o.summary);
  }
  return out;
}

Outcome theoremB() {
  Session<ExactScalar> session(configFor("1/2"));
  auto r = session.verifier(pinnedOptions(session.config())).run("theoremB");
  std::string rows;
  for (const auto& row : r.table)
    rows += " N=" + std::to_string(row.at("N").get<int>()) + " d_lb=" + fmt(row.at("dist_lb").get<double>()) +
            " heur=" + fmt(row.at("heuristic").get<double>()) + " r_max=" + fmt(row.at("max_probe_ratio").get<double>());
  return {r.clean(), describe(r) + " |" + rows};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all = {
      {1, "Hopf and Haar identities, q = 1/2, all monomials of degree <= 5", 60, [] { return exactSuite("1/2", "hopf"); }},
      {2, "derivation identities on 100 random pairs of degree <= 3", 120, [] { return exactSuite("1/2", "derivations"); }},
      {3, "adjoint patterns and projection commutation, levels <= 5", 0, [] { return exactSuite("1/2", "projections"); }},
      {4, "Berezin routes agree on 50 elements of degree <= 4, N = 1..3", 0, [] { return exactSuite("1/2", "berezin"); }},
      {5, "Lip contraction, q in {1/2, 9/10}, N = 1..5, 50 elements, M = 200", 600, contraction},
      {6, "block and Gram norm oracles agree to 1e-4, M = 200", 0, [] { return cleanSuite("1/2", "oracles"); }},
      {7, "distance trend at q = 1/2, N = 1..5, gap 1e-3", 1200, theoremB},
      {8, "slice estimate on 20 triples of degree <= 2", 0, [] { return cleanSuite("1/2", "slice"); }},
      {9, "classical spectrum at q = 1 in [0, 1] and increasing for n <= 2", 0, [] { return cleanSuite("1", "spectrum"); }},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool inTime = c.limitSeconds == 0 || secs < c.limitSeconds;
    bool pass = o.pass && inTime;
    std::string timing = fmt(secs) + " s" + (c.limitSeconds > 0 ? " (limit " + fmt(c.limitSeconds) + " s)" : "");
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << " -- " << timing << "\n"
              << "       " << o.summary << std::endl;
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
