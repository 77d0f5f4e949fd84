#pragma once

// Run configuration and the object graph built from it.  Every numeric default
// the command line can touch lives in SessionConfig so a run can be replayed
// from its printed config alone.

#include "qsphere/verify.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>

namespace qsphere {

inline constexpr const char* kSchema = "qsphere/1";

struct SessionConfig {
  std::string q = "1/2";
  std::string scalarMode = "auto";  // exact | float | auto (decimal q means float)
  int precision = 50;               // decimal digits in float mode
  int truncation = 200;
  int thetaGrid = 16;
  int doublings = 4;
  double relTol = 1e-10;
  double solverTol = 1e-12;
  int solverMaxMatvecs = 100000;
  int classicalGrid = 64;
  std::uint64_t seed = 7;
  int searchM = 4;
  std::string distMode = "certified";
  int restarts = 8;
  int maxIters = 300;
  double gap = 1e-3;
  std::string cacheDir;  // QSPHERE_CACHE
  std::string basisCache;
  std::string pairingTable;
  std::string format = "json";
  bool timings = false;

  std::string resolvedMode() const {
    if (scalarMode != "auto") return scalarMode;
    return q.find_first_of(".eE") == std::string::npos ? "exact" : "float";
  }

  NormConfig normConfig() const {
    NormConfig c;
    c.truncation = truncation;
    c.doublings = doublings;
    c.relTol = relTol;
    c.thetaGrid = thetaGrid;
    c.classicalGrid = classicalGrid;
    c.solver.tol = solverTol;
    c.solver.maxMatvecs = solverMaxMatvecs;
    return c;
  }

  DistanceProblem distanceProblem(int N) const {
    DistanceProblem p;
    p.N = N;
    p.M = searchM;
    p.normTruncation = truncation;
    p.mode = parseDistanceMode(distMode);
    p.restarts = restarts;
    p.maxIters = maxIters;
    p.seed = seed;
    return p;
  }

  // file holding the fuzzy basis for this q, or empty when caching is off
  std::string basisCachePath() const {
    if (!basisCache.empty()) return basisCache;
    if (cacheDir.empty()) return {};
    std::string tag = q;
    for (char& c : tag)
      if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return (std::filesystem::path(cacheDir) / ("basis-" + resolvedMode() + "-q" + tag + ".json")).string();
  }

  void validate() const {
    auto mode = resolvedMode();
    if (mode != "exact" && mode != "float") throw std::invalid_argument("scalar mode must be exact, float or auto");
    if (format != "json" && format != "csv") throw std::invalid_argument("format must be json or csv");
    if (truncation < 1 || thetaGrid < 1 || precision < 10 || doublings < 0)
      throw std::invalid_argument("truncation, theta grid, precision and doublings must be positive");
    if (searchM < 1 || restarts < 1 || maxIters < 0) throw std::invalid_argument("invalid optimizer settings");
    parseDistanceMode(distMode);
  }

  nlohmann::json toJson() const {
    return {{"q", q},
            {"scalarMode", resolvedMode()},
            {"precision", precision},
            {"truncation", truncation},
            {"thetaGrid", thetaGrid},
            {"doublings", doublings},
            {"relTol", relTol},
            {"solverTol", solverTol},
            {"solverMaxMatvecs", solverMaxMatvecs},
            {"classicalGrid", classicalGrid},
            {"seed", seed},
            {"searchM", searchM},
            {"distMode", distMode},
            {"restarts", restarts},
            {"maxIters", maxIters},
            {"gap", gap},
            {"cacheDir", cacheDir},
            {"basisCache", basisCache},
            {"pairingTable", pairingTable},
            {"format", format},
            {"timings", timings}};
  }

  static SessionConfig fromJson(const nlohmann::json& j) {
    SessionConfig c;
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("q", c.q);
    get("scalarMode", c.scalarMode);
    get("precision", c.precision);
    get("truncation", c.truncation);
    get("thetaGrid", c.thetaGrid);
    get("doublings", c.doublings);
    get("relTol", c.relTol);
    get("solverTol", c.solverTol);
    get("solverMaxMatvecs", c.solverMaxMatvecs);
    get("classicalGrid", c.classicalGrid);
    get("seed", c.seed);
    get("searchM", c.searchM);
    get("distMode", c.distMode);
    get("restarts", c.restarts);
    get("maxIters", c.maxIters);
    get("gap", c.gap);
    get("cacheDir", c.cacheDir);
    get("basisCache", c.basisCache);
    get("pairingTable", c.pairingTable);
    get("format", c.format);
    get("timings", c.timings);
    return c;
  }
};

template <class S>
ScalarContext<S> makeContext(const SessionConfig& cfg) {
  if constexpr (isExact<S>)
    return ScalarContext<S>(parseRational(cfg.q));
  else
    return ScalarContext<S>(cfg.q, cfg.precision);
}

// Owns the module objects; they refer to one another, so the session is pinned in place.
template <class S>
class Session {
 public:
  explicit Session(SessionConfig cfg)
      : cfg_(std::move(cfg)),
        alg(makeContext<S>(cfg_)),
        actions(alg, cfg_.pairingTable.empty() ? PairingTable::standard() : PairingTable::load(cfg_.pairingTable),
                cfg_.pairingTable.empty() ? 0 : 4),
        gns(actions),
        berezin(gns),
        norms(actions, cfg_.normConfig()),
        distance(berezin, norms) {
    loadBasisCache();
  }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ~Session() {
    try {
      saveBasisCache();
    } catch (...) {
      // a cache that cannot be written only costs time on the next run
    }
  }

  const SessionConfig& config() const { return cfg_; }
  const ScalarContext<S>& scalars() const { return alg.scalars(); }

  Verifier<S> verifier(SuiteOptions opt) const { return Verifier<S>(distance, berezin, norms, std::move(opt)); }

  Element<S> parse(const std::string& text) const { return parseExpression(alg, text); }

 private:
  SessionConfig cfg_;

 public:
  Algebra<S> alg;
  UqActions<S> actions;
  Gns<S> gns;
  Berezin<S> berezin;
  SpectralNorms<S> norms;
  DistanceEstimator<S> distance;

 private:
  // the level-L basis restricted to spin <= N is the level-N basis, so one file serves every level
  void loadBasisCache() {
    auto path = cfg_.basisCachePath();
    if (path.empty() || !std::filesystem::exists(path)) return;
    std::ifstream in(path);
    auto full = basisFromJson(nlohmann::json::parse(in), alg.scalars());
    for (int N = 0; N <= full.level; ++N) {
      FuzzyBasis<S> b;
      b.level = N;
      b.ordering = full.ordering;
      b.gramCertificate = alg.scalars().zero();
      for (const auto& v : full.vectors)
        if (v.spin <= N) b.vectors.push_back(v);
      gns.adoptBasis(std::move(b));
    }
    loadedLevel_ = full.level;
  }

  void saveBasisCache() const {
    auto path = cfg_.basisCachePath();
    int level = gns.cachedLevel();
    if (path.empty() || level <= loadedLevel_) return;
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp);
      out << basisToJson(gns.basis(level), alg.scalars().qString()).dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
  }

  int loadedLevel_ = -1;
};

}  // namespace qsphere
