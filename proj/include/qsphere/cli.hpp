#pragma once

// The `qsphere` command line.  runCommand is the whole program; main() only
// forwards argv, which keeps the command surface testable in-process.
//
// exit codes: 0 success, 2 a check failed, 1 usage or input error

#include "qsphere/session.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace qsphere {

namespace cli {

enum ExitCode { ok = 0, usage = 1, checkFailed = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "3" or "1..5"
inline std::pair<int, int> parseRange(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      int v = std::stoi(text);
      return {v, v};
    }
    int lo = std::stoi(text.substr(0, dots)), hi = std::stoi(text.substr(dots + 2));
    if (lo > hi) throw UsageError("empty range '" + text + "'");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError("bad range '" + text + "'");
  }
}

inline std::vector<std::string> splitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::string csvNumber(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline nlohmann::json normJson(const NormEstimate& e) {
  return {{"lowerBound", e.lowerBound},      {"upperBound", e.upperBound}, {"gap", e.gap()},
          {"converged", e.converged},        {"solverConverged", e.solverConverged},
          {"mLadder", e.mLadder},            {"ladderValues", e.ladderValues},
          {"perTheta", e.perTheta},          {"thetaGridSize", e.thetaGridSize},
          {"mUsed", e.mUsed}};
}

template <class S>
nlohmann::json scalarReport(const S& v) {
  auto z = v.toComplex();
  return {{"exact", scalarToJson(v)}, {"display", v.str()}, {"re", z.real()}, {"im", z.imag()}};
}

struct Request {
  std::string command;
  std::string expr;
  std::string levels;
  std::string searchLevels;
  std::string qList;
  std::string label;
  std::string generator;
  std::string suite;
  std::string csvPath;
  std::string oracle = "block";
  int maxSpin = -1;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"computations on the quantum 2-sphere and its fuzzy approximations", "qsphere"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    SessionConfig flags;
    std::vector<std::function<void(SessionConfig&)>> apply;
    auto setting = [&](const std::string& name, auto member, const std::string& help) {
      auto* opt = app.add_option(name, flags.*member, help);
      apply.push_back([opt, member, &flags](SessionConfig& c) {
        if (opt->count() > 0) c.*member = flags.*member;
      });
      return opt;
    };
    setting("--q", &SessionConfig::q, "deformation parameter, rational p/r (exact) or decimal (float)");
    setting("--scalar-mode", &SessionConfig::scalarMode, "exact, float or auto");
    setting("--precision", &SessionConfig::precision, "decimal digits in float mode");
    setting("--trunc", &SessionConfig::truncation, "shift-representation truncation M");
    setting("--theta-grid", &SessionConfig::thetaGrid, "theta grid size for weighted elements");
    setting("--doublings", &SessionConfig::doublings, "truncation doublings in the convergence ladder");
    setting("--rel-tol", &SessionConfig::relTol, "relative change accepted as converged");
    setting("--solver-tol", &SessionConfig::solverTol, "singular value solver tolerance");
    setting("--classical-grid", &SessionConfig::classicalGrid, "points per axis of the q = 1 grid");
    setting("--seed", &SessionConfig::seed, "random seed");
    setting("--M", &SessionConfig::searchM, "fuzzy level of the distance search space");
    setting("--mode", &SessionConfig::distMode, "distance mode: certified or heuristic");
    setting("--restarts", &SessionConfig::restarts, "optimizer restarts");
    setting("--max-iters", &SessionConfig::maxIters, "optimizer iterations per restart");
    setting("--gap", &SessionConfig::gap, "estimator gap for probe reports");
    setting("--cache-dir", &SessionConfig::cacheDir, "cache directory (default: $QSPHERE_CACHE)");
    setting("--basis-cache", &SessionConfig::basisCache, "fuzzy basis cache file");
    setting("--pairing-table", &SessionConfig::pairingTable, "pairing table JSON replacing the built-in one");
    setting("--format", &SessionConfig::format, "json or csv");
    auto* timingFlag = app.add_flag("--timings", flags.timings, "add wall-clock timings to reports");
    apply.push_back([timingFlag, &flags](SessionConfig& c) {
      if (timingFlag->count() > 0) c.timings = flags.timings;
    });
    std::string configFile;
    app.add_option("--config", configFile, "start from a saved SessionConfig JSON");
    bool printConfig = false;
    app.add_flag("--print-config", printConfig, "print the resolved configuration and exit");

    Request req;
    auto sub = [&](const char* name, const char* help) {
      auto* s = app.add_subcommand(name, help);
      s->callback([&req, name] { req.command = name; });
      return s;
    };
    auto* expand = sub("expand", "normal form of an expression");
    auto* haar = sub("haar", "Haar state of an expression");
    auto* coproduct = sub("coproduct", "coproduct of an expression");
    auto* act = sub("act", "apply a derivation or a Hopf action");
    auto* berezin = sub("berezin", "Berezin transform and its spectrum");
    auto* spectrum = sub("spectrum", "Berezin eigenvalues per spin");
    auto* lipnorm = sub("lipnorm", "Lip-norm estimate");
    auto* dist = sub("dist", "lower bound for the distance between h_N and the counit");
    auto* verify = sub("verify", "verification suites");
    auto* sweep = sub("sweep", "grid of distance, probe and spectrum data");
    for (auto* s : {expand, haar, coproduct, act, berezin, lipnorm})
      s->add_option("--expr", req.expr, "expression, e.g. \"A*B + Bs\"")->required();
    act->add_option("--label", req.label, "delta1, delta2, delta3, delta4, deltaK, deltaKinv, partialE, partialF, partialK");
    act->add_option("--generator", req.generator, "left action of e, f, k, kinv or h");
    for (auto* s : {berezin, dist}) s->add_option("--N", req.levels, "Berezin level")->required();
    spectrum->add_option("--N", req.levels, "Berezin level or range a..b")->required();
    spectrum->add_option("--max-spin", req.maxSpin, "largest spin listed (default N + 1)");
    berezin->add_option("--csv", req.csvPath, "also write the spectrum table here");
    lipnorm->add_option("--oracle", req.oracle, "block, gram or both");
    verify->add_option("--suite", req.suite, "suite name or 'all' (default theoremB)");
    verify->add_option("--N", req.levels, "Berezin levels a..b for theoremB");
    verify->add_option("--csv", req.csvPath, "also write the theoremB table here");
    sweep->add_option("--qs", req.qList, "comma separated q values")->required();
    sweep->add_option("--N", req.levels, "Berezin levels a..b")->required();
    sweep->add_option("--Ms", req.searchLevels, "search levels a..b (default --M)");

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return ok;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << '\n';
      return usage;
    }

    try {
      SessionConfig cfg;
      if (!configFile.empty()) {
        std::ifstream in(configFile);
        if (!in) throw UsageError("cannot open config " + configFile);
        auto j = nlohmann::json::parse(in);
        if (j.contains("config")) j = j.at("config");
        cfg = SessionConfig::fromJson(j);
      }
      if (cfg.cacheDir.empty())
        if (const char* env = std::getenv("QSPHERE_CACHE")) cfg.cacheDir = env;
      for (auto& f : apply) f(cfg);
      cfg.validate();
      if (printConfig) {
        out_ << nlohmann::json{{"schema", kSchema}, {"config", cfg.toJson()}}.dump(2) << '\n';
        return ok;
      }
      if (req.command.empty()) {
        out_ << app.help();
        return usage;
      }
      if (req.command == "sweep") return sweepCommand(cfg, req);
      return cfg.resolvedMode() == "exact" ? dispatch<ExactScalar>(cfg, req) : dispatch<FloatScalar>(cfg, req);
    } catch (const ParseError& e) {
      err_ << "parse error: " << e.what() << '\n';
      return usage;
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << '\n';
      return usage;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return usage;
    }
  }

 private:
  nlohmann::json envelope(const std::string& command, const SessionConfig& cfg) const {
    return {{"schema", kSchema}, {"command", command}, {"config", cfg.toJson()}};
  }

  void emit(const nlohmann::json& j) { out_ << j.dump(2) << '\n'; }

  template <class S>
  int dispatch(const SessionConfig& cfg, const Request& req) {
    Session<S> session(cfg);
    auto t0 = std::chrono::steady_clock::now();
    auto doc = envelope(req.command, cfg);
    int code = ok;
    const auto& alg = session.alg;
    if (req.command == "expand") {
      auto x = session.parse(req.expr);
      doc["input"] = req.expr;
      doc["result"] = {{"expression", toExpressionString(x)}, {"element", elementToJson(x)}};
    } else if (req.command == "haar") {
      auto x = session.parse(req.expr);
      doc["input"] = req.expr;
      doc["result"] = scalarReport(alg.haarState(x));
    } else if (req.command == "coproduct") {
      auto x = session.parse(req.expr);
      doc["input"] = req.expr;
      doc["result"] = {{"tensor", tensorToJson(alg.coproduct(x))}};
    } else if (req.command == "act") {
      auto x = session.parse(req.expr);
      if (req.label.empty() == req.generator.empty()) throw UsageError("act needs exactly one of --label, --generator");
      Element<S> y = req.label.empty() ? session.actions.leftAction(parseUqGenerator(req.generator), x)
                                       : session.actions.twistedDerivation(parseDerivationLabel(req.label), x);
      doc["input"] = req.expr;
      doc["operator"] = req.label.empty() ? req.generator : req.label;
      doc["result"] = {{"expression", toExpressionString(y)}, {"element", elementToJson(y)}};
    } else if (req.command == "berezin") {
      code = berezinCommand(session, req, doc);
      if (cfg.format == "csv") return code;
    } else if (req.command == "spectrum") {
      code = spectrumCommand(session, req, doc);
      if (cfg.format == "csv") return code;
    } else if (req.command == "lipnorm") {
      auto x = session.parse(req.expr);
      doc["input"] = req.expr;
      nlohmann::json r;
      if (req.oracle == "block" || req.oracle == "both") r["lipNorm"] = normJson(session.norms.lipNorm(x).value);
      if (req.oracle == "gram" || req.oracle == "both") r["gramOracle"] = normJson(session.norms.lipNormGramOracle(x));
      if (r.empty()) throw UsageError("--oracle must be block, gram or both");
      doc["result"] = r;
    } else if (req.command == "dist") {
      auto [N, hi] = parseRange(req.levels);
      if (N != hi) throw UsageError("dist takes a single --N");
      auto est = session.distance.estimate(cfg.distanceProblem(N));
      doc["result"] = {{"kind", "lower bound"},
                       {"value", est.value},
                       {"optimizerValue", est.optimizerValue},
                       {"mode", toString(est.mode)},
                       {"N", est.N},
                       {"M", est.M},
                       {"normTruncation", est.normTruncation},
                       {"bestRestart", est.bestRestart},
                       {"degraded", est.degraded},
                       {"witness", elementToJson(est.witness)},
                       {"witnessExpression", toExpressionString(est.witness)},
                       {"trace", est.trace}};
    } else if (req.command == "verify") {
      code = verifyCommand(session, req, doc);
      if (cfg.format == "csv") return code;
    }
    if (cfg.timings) doc["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit(doc);
    return code;
  }

  template <class S>
  int berezinCommand(Session<S>& session, const Request& req, nlohmann::json& doc) {
    auto [N, hi] = parseRange(req.levels);
    if (N != hi || N < 0) throw UsageError("berezin takes a single --N >= 0");
    auto x = session.parse(req.expr);
    if (!x.hasOnlyRightDegreeZero()) throw UsageError("the Berezin transform needs an element of the sphere");
    auto y = session.berezin.viaCoproduct(x, N);
    auto spec = session.berezin.spectrum(N, N + 1);
    std::ostringstream csv;
    csv << "n,c\n";
    nlohmann::json rows = nlohmann::json::array();
    for (int n = 0; n <= N + 1; ++n) {
      S c = spec.at(n);
      csv << n << ',' << csvNumber(c.toComplex().real()) << '\n';
      rows.push_back({{"n", n}, {"c", scalarReport(c)}});
    }
    if (!req.csvPath.empty()) writeFile(req.csvPath, csv.str());
    if (session.config().format == "csv") {
      out_ << csv.str();
      return ok;
    }
    doc["input"] = req.expr;
    doc["N"] = N;
    doc["result"] = {{"expression", toExpressionString(y)}, {"element", elementToJson(y)}, {"spectrum", rows}};
    return ok;
  }

  template <class S>
  int spectrumCommand(Session<S>& session, const Request& req, nlohmann::json& doc) {
    auto [lo, hi] = parseRange(req.levels);
    if (lo < 1) throw UsageError("spectrum needs N >= 1");
    std::ostringstream csv;
    csv << "N,n,c\n";
    nlohmann::json rows = nlohmann::json::array();
    for (int N = lo; N <= hi; ++N) {
      int top = req.maxSpin >= 0 ? std::max(req.maxSpin, N) : N + 1;
      auto spec = session.berezin.spectrum(N, top);
      nlohmann::json cs = nlohmann::json::array();
      for (int n = 0; n <= top; ++n) {
        csv << N << ',' << n << ',' << csvNumber(spec.at(n).toComplex().real()) << '\n';
        cs.push_back(scalarReport(spec.at(n)));
      }
      rows.push_back({{"N", N}, {"c", cs}});
    }
    if (session.config().format == "csv") {
      out_ << csv.str();
      return ok;
    }
    doc["result"] = rows;
    return ok;
  }

  template <class S>
  int verifyCommand(Session<S>& session, const Request& req, nlohmann::json& doc) {
    const auto& cfg = session.config();
    SuiteOptions opt;
    opt.seed = cfg.seed;
    opt.truncation = cfg.truncation;
    opt.distance = cfg.distanceProblem(1);
    opt.gap = cfg.gap;
    std::tie(opt.distMinN, opt.distMaxN) = parseRange(req.levels.empty() ? "1..5" : req.levels);
    if (opt.distMinN < 1) throw UsageError("verify needs N >= 1");
    std::vector<std::string> names;
    if (req.suite.empty() || req.suite == "theoremB")
      names = {"theoremB"};
    else if (req.suite == "all")
      names = Verifier<S>::suiteNames();
    else
      names = splitList(req.suite);
    auto verifier = session.verifier(opt);
    nlohmann::json suites = nlohmann::json::array();
    bool passed = true;
    std::string csv;
    for (const auto& name : names) {
      auto report = verifier.run(name);
      passed = passed && report.passed();
      suites.push_back(report.toJson(cfg.timings));
      if (name == "theoremB") csv = theoremBCsv(report);
    }
    if (!req.csvPath.empty() && !csv.empty()) writeFile(req.csvPath, csv);
    if (cfg.format == "csv") {
      if (csv.empty()) throw UsageError("csv output exists only for the theoremB suite");
      out_ << csv;
    } else {
      doc["result"] = {{"passed", passed}, {"suites", suites}};
    }
    return passed ? ok : checkFailed;
  }

  // one row per (q, N, M); cells are cached when a cache directory is configured
  int sweepCommand(const SessionConfig& base, const Request& req) {
    auto qs = splitList(req.qList);
    if (qs.empty()) throw UsageError("--qs is empty");
    auto [nLo, nHi] = parseRange(req.levels);
    auto [mLo, mHi] = req.searchLevels.empty() ? std::pair{base.searchM, base.searchM} : parseRange(req.searchLevels);
    if (nLo < 1 || mLo < 1) throw UsageError("sweep needs N >= 1 and M >= 1");
    std::ostringstream csv;
    csv << "q,N,M,status,dist_lb,heuristic,max_probe_ratio,mean_lipSlack";
    for (int n = 0; n <= nHi + 1; ++n) csv << ",c_" << n;
    csv << '\n';
    nlohmann::json rows = nlohmann::json::array();
    bool clean = true;
    for (const auto& q : qs) {
      SessionConfig cfg = base;
      cfg.q = q;
      for (int N = nLo; N <= nHi; ++N)
        for (int M = mLo; M <= mHi; ++M) {
          cfg.searchM = M;
          nlohmann::json row = sweepCell(cfg, N, nHi + 1);
          clean = clean && row.at("status") == "ok";
          csv << q << ',' << N << ',' << M << ',' << row.at("status").get<std::string>();
          for (const char* key : {"dist_lb", "heuristic", "max_probe_ratio", "mean_lipSlack"})
            csv << ',' << (row.contains(key) ? csvNumber(row.at(key).get<double>()) : "");
          for (int n = 0; n <= nHi + 1; ++n)
            csv << ',' << (row.contains("c") ? csvNumber(row.at("c").at(n).get<double>()) : "");
          csv << '\n';
          rows.push_back(row);
        }
    }
    if (base.format == "csv") {
      out_ << csv.str();
    } else {
      auto doc = envelope("sweep", base);
      doc["result"] = rows;
      emit(doc);
    }
    return clean ? ok : checkFailed;
  }

  nlohmann::json sweepCell(const SessionConfig& cfg, int N, int maxSpin) {
    std::string cachePath;
    if (!cfg.cacheDir.empty()) {
      auto key = cfg.toJson();
      key["cell"] = {N, cfg.searchM, maxSpin};
      key.erase("timings");
      key.erase("format");
      std::ostringstream name;
      name << std::hex << std::hash<std::string>{}(key.dump());
      cachePath = (std::filesystem::path(cfg.cacheDir) / "sweep" / (name.str() + ".json")).string();
      if (std::filesystem::exists(cachePath)) {
        std::ifstream in(cachePath);
        auto cached = nlohmann::json::parse(in, nullptr, false);
        if (!cached.is_discarded() && cached.value("key", nlohmann::json()) == key) return cached.at("row");
      }
      auto row = computeCell(cfg, N, maxSpin);
      if (row.at("status") == "ok") {
        std::filesystem::create_directories(std::filesystem::path(cachePath).parent_path());
        std::ofstream(cachePath) << nlohmann::json{{"key", key}, {"row", row}}.dump() << '\n';
      }
      return row;
    }
    return computeCell(cfg, N, maxSpin);
  }

  nlohmann::json computeCell(const SessionConfig& cfg, int N, int maxSpin) {
    nlohmann::json row = {{"q", cfg.q}, {"N", N}, {"M", cfg.searchM}};
    try {
      if (cfg.resolvedMode() == "exact")
        fillCell<ExactScalar>(cfg, N, maxSpin, row);
      else
        fillCell<FloatScalar>(cfg, N, maxSpin, row);
    } catch (const std::exception& e) {
      row["status"] = std::string("error: ") + e.what();
    }
    return row;
  }

  template <class S>
  void fillCell(const SessionConfig& cfg, int N, int maxSpin, nlohmann::json& row) {
    Session<S> session(cfg);
    SuiteOptions opt;
    opt.seed = cfg.seed;
    opt.truncation = cfg.truncation;
    opt.distance = cfg.distanceProblem(N);
    opt.gap = cfg.gap;
    opt.distMinN = opt.distMaxN = N;
    auto report = session.verifier(opt).run("theoremB");
    const auto& t = report.table.at(0);
    for (const char* key : {"dist_lb", "heuristic", "max_probe_ratio", "mean_lipSlack", "probe_ratios"}) row[key] = t.at(key);
    auto spec = session.berezin.spectrum(N, std::max(N, maxSpin));
    std::vector<double> c;
    for (int n = 0; n <= maxSpin; ++n) c.push_back(spec.at(n).toComplex().real());
    row["c"] = c;
    row["status"] = report.passed() ? "ok" : "flagged";
  }

  static void writeFile(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write " + path);
    f << text;
  }

  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace cli

inline int runCommand(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return cli::Runner(out, err).run(argc, argv);
}

inline int runCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"qsphere"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return runCommand(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace qsphere
