#ifndef FPTEST_HARNESS_HPP
#define FPTEST_HARNESS_HPP

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fptest/bl_metric.hpp"
#include "fptest/fp_tests.hpp"
#include "fptest/hypotheses.hpp"
#include "fptest/kernels.hpp"
#include "fptest/sampling.hpp"

namespace fptest {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> keys,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) known = true;
    if (!known) throw ConfigError("unknown field '" + it.key() + "' in " + where);
  }
}

inline Rat rat_from_json(const Json& v, const std::string& what) {
  try {
    if (v.is_string()) return rat_parse(v.get<std::string>());
    if (v.is_number_integer()) return rat(v.get<long>());
    if (v.is_number_float()) return rat_of_double(v.get<double>());
  } catch (const std::exception& e) {
    throw ConfigError("bad rational for " + what + ": " + e.what());
  }
  throw ConfigError("bad rational for " + what);
}

inline std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace detail

/// Declarative Monte-Carlo run description, mirrored one-to-one by the JSON
/// config files; unknown fields are rejected.
struct SimConfig {
  int pair_id = 3;
  std::optional<Rat> pair_eps;

  std::string test_name = "subbasis";  // subbasis | amplify | combine | clopen |
                                       // fsigma | bl_separated
  double alpha = 0.05;
  double eps = 0.1;                    // amplification margin
  double gamma = 0.0;                  // BL margin (0 = default)
  size_t shift_index = 1;
  double log_base = 2.718281828459045;
  std::optional<size_t> truncate;      // cap on lazily enumerated pieces

  BernParam truth{rat(1, 2), rat(0)};
  std::vector<size_t> n_grid{100};
  size_t reps = 1000;
  uint64_t seed = 1;
  std::string out_path;
  size_t threads = 0;  // 0 = hardware concurrency

  static SimConfig from_json(const Json& j) {
    SimConfig cfg;
    detail::reject_unknown_keys(
        j, {"pair", "test", "truth", "n_grid", "reps", "seed", "out", "threads"}, "config");
    if (j.contains("pair")) {
      const Json& p = j.at("pair");
      detail::reject_unknown_keys(p, {"id", "eps"}, "pair");
      cfg.pair_id = p.at("id").get<int>();
      if (p.contains("eps")) cfg.pair_eps = detail::rat_from_json(p.at("eps"), "pair.eps");
    }
    if (j.contains("test")) {
      const Json& t = j.at("test");
      detail::reject_unknown_keys(
          t, {"name", "alpha", "eps", "gamma", "N", "log_base", "truncate"}, "test");
      if (t.contains("name")) cfg.test_name = t.at("name").get<std::string>();
      if (t.contains("alpha")) cfg.alpha = t.at("alpha").get<double>();
      if (t.contains("eps")) cfg.eps = t.at("eps").get<double>();
      if (t.contains("gamma")) cfg.gamma = t.at("gamma").get<double>();
      if (t.contains("N")) cfg.shift_index = t.at("N").get<size_t>();
      if (t.contains("log_base")) cfg.log_base = t.at("log_base").get<double>();
      if (t.contains("truncate")) cfg.truncate = t.at("truncate").get<size_t>();
    }
    if (j.contains("truth")) {
      const Json& t = j.at("truth");
      detail::reject_unknown_keys(t, {"p", "a", "b"}, "truth");
      if (t.contains("p")) {
        cfg.truth = BernParam{detail::rat_from_json(t.at("p"), "truth.p"), rat(0)};
        if (t.contains("a") || t.contains("b"))
          throw ConfigError("truth takes either p or the (a,b) token, not both");
      } else {
        Rat a = t.contains("a") ? detail::rat_from_json(t.at("a"), "truth.a") : rat(0);
        Rat b = t.contains("b") ? detail::rat_from_json(t.at("b"), "truth.b") : rat(0);
        cfg.truth = BernParam{a, b};
      }
    }
    if (j.contains("n_grid")) {
      cfg.n_grid.clear();
      for (const Json& v : j.at("n_grid")) cfg.n_grid.push_back(v.get<size_t>());
      if (cfg.n_grid.empty()) throw ConfigError("n_grid must be nonempty");
      for (size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
          throw ConfigError("n_grid must be strictly increasing");
    }
    if (j.contains("reps")) cfg.reps = j.at("reps").get<size_t>();
    if (cfg.reps < 1) throw ConfigError("reps must be >= 1");
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("out")) cfg.out_path = j.at("out").get<std::string>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<size_t>();
    return cfg;
  }

  Json to_json() const {
    Json j{{"pair", Json{{"id", pair_id}}},
           {"test",
            Json{{"name", test_name},
                 {"alpha", alpha},
                 {"eps", eps},
                 {"gamma", gamma},
                 {"N", shift_index},
                 {"log_base", log_base}}},
           {"truth", Json{{"a", rat_str(truth.a)}, {"b", rat_str(truth.b)}}},
           {"n_grid", n_grid},
           {"reps", reps},
           {"seed", seed}};
    if (pair_eps) j["pair"]["eps"] = rat_str(*pair_eps);
    if (truncate) j["test"]["truncate"] = *truncate;
    return j;
  }
};

struct SimRow {
  std::string pair_label;
  std::string test_label;
  size_t n = 0;
  size_t reps = 0;
  double true_param = 0;
  double freq[3] = {0, 0, 0};
  double mc_se = 0;
  std::optional<double> bound;
  uint64_t seed = 0;
  std::optional<int> expected_verdict;
  bool flagged = false;
  std::string flag_note;
};

struct SimResult {
  std::vector<SimRow> rows;
  Json provenance;
  std::vector<std::string> flags;

  std::string csv() const {
    std::ostringstream os;
    os << "pair,test,n,reps,true_param,freq0,freq1,freq2,mc_se,bound,seed\n";
    for (const SimRow& r : rows) {
      os << r.pair_label << ',' << r.test_label << ',' << r.n << ',' << r.reps << ','
         << detail::fmt12(r.true_param) << ',' << detail::fmt12(r.freq[0]) << ','
         << detail::fmt12(r.freq[1]) << ',' << detail::fmt12(r.freq[2]) << ','
         << detail::fmt12(r.mc_se) << ',' << (r.bound ? detail::fmt12(*r.bound) : "") << ','
         << r.seed << '\n';
    }
    return os.str();
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << csv();
    std::ofstream p(path + ".provenance.json", std::ios::binary);
    Json side{{"provenance", provenance}, {"flags", flags}};
    p << side.dump(2) << "\n";
  }
};

namespace detail {

inline PieceProvider truncated(PieceProvider inner, std::optional<size_t> cap) {
  if (!inner || !cap) return inner;
  size_t c = *cap;
  return [inner, c](size_t i) -> std::optional<ClosedPiece> {
    if (i >= c) return std::nullopt;
    return inner(i);
  };
}

inline SubbasisAtom single_atom_of(const HypothesisRegion& region) {
  if (!region.open_rep) throw ConfigError("hypothesis region has no open representation");
  auto clause = region.open_rep->clause_at(0);
  if (!clause || clause->size() != 1)
    throw ConfigError("test needs a single-atom open representation");
  return (*clause)[0];
}

}  // namespace detail

/// Builds the named test construction for a catalogue pair.
inline FpTest make_test(const HypothesisPair& pair, const SimConfig& cfg) {
  TestThresholds th;
  th.alpha = cfg.alpha;
  th.eps = cfg.eps;
  th.shift_index = cfg.shift_index;
  th.log_base = cfg.log_base;
  th.validate();
  if (cfg.test_name == "subbasis") {
    return subbasis_test(detail::single_atom_of(pair.h1), cfg.alpha);
  }
  if (cfg.test_name == "amplify") {
    return amplify(subbasis_test(detail::single_atom_of(pair.h1), cfg.alpha), cfg.log_base);
  }
  if (cfg.test_name == "combine") {
    if (!pair.h1.open_rep) throw ConfigError("pair's alternative has no open representation");
    return region_union_test(*pair.h1.open_rep, cfg.alpha, pair.space, pair.h1.label);
  }
  if (cfg.test_name == "clopen") {
    if (!pair.h0.open_rep || !pair.h1.open_rep)
      throw ConfigError("clopen construction needs open representations on both sides");
    FpTest t0 = region_union_test(*pair.h1.open_rep, cfg.alpha, pair.space, pair.h1.label);
    FpTest t1 =
        swap_verdicts(region_union_test(*pair.h0.open_rep, cfg.alpha, pair.space, pair.h0.label));
    return clopen_test(t0, t1);
  }
  if (cfg.test_name == "fsigma") {
    PieceProvider p0 = detail::truncated(pair.h0.fsigma_pieces, cfg.truncate);
    PieceProvider p1 = detail::truncated(pair.h1.fsigma_pieces, cfg.truncate);
    if (!p0) throw ConfigError("pair's null has no F-sigma pieces");
    if (!p1) {
      // alternatives without representations contribute no pieces: the
      // designed demonstration of untestability for catalogue pair 1
      p1 = [](size_t) -> std::optional<ClosedPiece> { return std::nullopt; };
    }
    return fsigma_test(p0, p1, cfg.alpha, pair.space);
  }
  if (cfg.test_name == "bl_separated") {
    return bl_separated_test(pair.h0, pair.h1, pair.space, cfg.gamma);
  }
  throw ConfigError("unknown test constructor '" + cfg.test_name + "'");
}

namespace detail {

struct TallyOutcome {
  long counts[3] = {0, 0, 0};
};

/// Runs `reps` replicates at sample size n, fanned over a worker pool;
/// replicate r draws from stream (seed, n, r), so the tally is independent
/// of the schedule.
inline TallyOutcome run_replicates(const FpTest& test, const Measure& truth, size_t n,
                                   size_t reps, uint64_t seed, size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, reps);
  std::vector<TallyOutcome> partial(threads);
  auto worker = [&](size_t t) {
    TallyOutcome local;
    for (size_t r = t; r < reps; r += threads) {
      RngStream rng = RngStream::for_replicate(seed, n, r);
      Sample x = sample_iid(truth, n, rng);
      EvalContext ctx(x);
      Verdict v = test.eval(ctx);
      ++local.counts[v.value];
    }
    partial[t] = local;
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  TallyOutcome total;
  for (const TallyOutcome& p : partial)
    for (int i = 0; i < 3; ++i) total.counts[i] += p.counts[i];
  return total;
}

inline std::optional<double> bound_for(const SimConfig& cfg, size_t n) {
  constexpr double pi = 3.14159265358979323846;
  if (cfg.test_name == "subbasis" || cfg.test_name == "combine")
    return 6.0 * cfg.alpha / (pi * pi * double(n) * double(n));
  if (cfg.test_name == "amplify") {
    auto [k, m] = amplify_block_sizes(n, cfg.log_base);
    if (m == 0) return std::nullopt;
    return 2.0 * std::exp(-2.0 * double(m) * cfg.eps * cfg.eps);
  }
  return std::nullopt;
}

}  // namespace detail

/// Full Monte-Carlo table for a config: verdict frequencies per n with the
/// matching theoretical bound column.
inline SimResult run_simulation(const SimConfig& cfg) {
  HypothesisPair pair = catalogue(cfg.pair_id, cfg.pair_eps);
  FpTest test = make_test(pair, cfg);
  Measure truth = Measure::bernoulli_token(cfg.truth, pair.space);
  std::optional<int> expected;
  switch (member(pair, truth)) {
    case Membership::H0: expected = 0; break;
    case Membership::H1: expected = 1; break;
    case Membership::Neither: break;
  }
  SimResult result;
  result.provenance =
      Json{{"config", cfg.to_json()}, {"test_tree", test.provenance()}, {"pair", pair.desc}};
  for (size_t n : cfg.n_grid) {
    detail::TallyOutcome tally =
        detail::run_replicates(test, truth, n, cfg.reps, cfg.seed, cfg.threads);
    SimRow row;
    row.pair_label = std::to_string(cfg.pair_id);
    row.test_label = cfg.test_name;
    row.n = n;
    row.reps = cfg.reps;
    row.true_param = cfg.truth.value();
    for (int i = 0; i < 3; ++i) row.freq[i] = double(tally.counts[i]) / double(cfg.reps);
    double err = expected ? 1.0 - row.freq[*expected] : row.freq[2];
    row.mc_se = std::sqrt(std::max(0.0, err * (1.0 - err) / double(cfg.reps)));
    row.bound = detail::bound_for(cfg, n);
    row.seed = cfg.seed;
    row.expected_verdict = expected;
    result.rows.push_back(std::move(row));
  }
  return result;
}

/// Consistency sweep: the correct-verdict frequency curve over the n-grid,
/// with rows flagged when the curve dips beyond 3 sigma of noise.
inline SimResult sweep_consistency(const SimConfig& cfg) {
  SimResult result = run_simulation(cfg);
  const auto& rows = result.rows;
  if (!rows.empty() && !rows.front().expected_verdict) {
    result.flags.push_back("true distribution lies in neither hypothesis");
  }
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    if (!rows[i].expected_verdict) continue;
    int v = *rows[i].expected_verdict;
    double f0 = rows[i].freq[v], f1 = rows[i + 1].freq[v];
    double se = std::sqrt(std::max(1e-12, f0 * (1 - f0) + f1 * (1 - f1)) / double(cfg.reps));
    if (f1 < f0 - 3 * se) {
      result.flags.push_back("correct-verdict frequency drops beyond noise between n=" +
                             std::to_string(rows[i].n) + " and n=" + std::to_string(rows[i + 1].n));
    }
  }
  return result;
}

struct BlCheckReport {
  size_t instances = 0;
  size_t failures = 0;
  double max_oracle_dev = 0;
  double max_axiom_violation = 0;
  std::vector<std::string> messages;
  bool pass() const { return failures == 0; }
};

/// Randomized verification batch: LP vs brute-force oracle on small
/// instances, metric axioms on random triples, and the Bernoulli closed
/// form. `tol` is the slack granted on top of each check's own bound.
inline BlCheckReport bl_check(size_t instances, double tol, uint64_t seed = 2024) {
  BlCheckReport rep;
  rep.instances = instances;
  auto fail = [&](const std::string& msg) {
    ++rep.failures;
    if (rep.messages.size() < 20) rep.messages.push_back(msg);
  };

  for (size_t inst = 0; inst < instances; ++inst) {
    RngStream rng = RngStream::for_replicate(seed, 7, inst);
    bool discrete = rng.bernoulli(0.5);
    SpacePtr space;
    std::vector<Point> pts;
    size_t m = 2 + rng.uniform_index(3);  // 2..4 support points
    if (discrete) {
      double base = 0.5 + 0.5 * rng.uniform01();
      std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
      for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j) {
          // all pairwise distances inside [base, 2*base]: triangle-safe
          double d = base * (1.0 + rng.uniform01());
          dist[i][j] = dist[j][i] = d;
        }
      std::vector<std::string> labels;
      for (size_t i = 0; i < m; ++i) labels.push_back("x" + std::to_string(i));
      space = SampleSpace::discrete(labels, dist);
      for (size_t i = 0; i < m; ++i) pts.emplace_back(int(i));
    } else {
      space = SampleSpace::real_line();
      for (size_t i = 0; i < m; ++i) pts.emplace_back(3.0 * rng.uniform01());
    }
    auto random_measure = [&]() {
      std::vector<double> w(m);
      double s = 0;
      for (double& x : w) {
        x = 0.05 + rng.uniform01();
        s += x;
      }
      for (double& x : w) x /= s;
      return Measure::finite_support(space, pts, w);
    };
    Measure P = random_measure(), Q = random_measure(), R = random_measure();

    double resolution = m <= 2 ? 1e-3 : (m == 3 ? 1e-2 : 5e-2);
    double lp = d_bl(P, Q);
    double oracle = d_bl_bruteforce(P, Q, resolution);
    double sum_abs = 0;
    for (size_t i = 0; i < m; ++i) sum_abs += std::abs(P.weights()[i] - Q.weights()[i]);
    double allowed = resolution * sum_abs + tol;
    rep.max_oracle_dev = std::max(rep.max_oracle_dev, std::abs(lp - oracle));
    if (std::abs(lp - oracle) > allowed)
      fail("oracle deviation " + std::to_string(std::abs(lp - oracle)) + " beyond " +
           std::to_string(allowed));

    double dpq = lp, dqp = d_bl(Q, P), dqr = d_bl(Q, R), dpr = d_bl(P, R);
    if (dpq < 0 || dpq > 2 + 1e-12) fail("d_bl outside [0,2]");
    if (std::abs(dpq - dqp) > 1e-9 + tol) fail("asymmetry beyond 1e-9");
    if (dpr > dpq + dqr + 1e-8 + tol) fail("triangle inequality violated beyond 1e-8");
    if (d_bl(P, P) > 1e-12) fail("d_bl(P,P) != 0");
    rep.max_axiom_violation =
        std::max({rep.max_axiom_violation, std::abs(dpq - dqp), dpr - dpq - dqr});
  }

  // Bernoulli closed form on an even split of the instance budget
  SpacePtr coin = SampleSpace::coin();
  for (size_t inst = 0; inst < std::max<size_t>(instances / 2, 50); ++inst) {
    RngStream rng = RngStream::for_replicate(seed, 11, inst);
    double p = rng.uniform01(), q = rng.uniform01();
    double lp = d_bl(Measure::bernoulli(p), Measure::bernoulli(q));
    if (std::abs(lp - std::abs(p - q)) > 1e-9 + tol)
      fail("Bernoulli closed form off by " + std::to_string(std::abs(lp - std::abs(p - q))));
  }
  return rep;
}

struct CiBenchRow {
  std::string mode;
  size_t n = 0;
  size_t reps = 0;
  double freq[3] = {0, 0, 0};
  double statistic = 0;  // LP-computed reference distance where applicable
  size_t pass_count = 0;
  size_t total = 0;
};

/// Uniform product law on {0,1}^3 (the independent fixture).
inline Measure ci_independent_fixture(SpacePtr* space_out = nullptr) {
  SpacePtr space = SampleSpace::product(
      {SampleSpace::coin(), SampleSpace::coin(), SampleSpace::coin()});
  std::vector<Point> atoms;
  std::vector<double> w;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        atoms.emplace_back(Tuple{Point(x), Point(y), Point(z)});
        w.push_back(0.125);
      }
  if (space_out) *space_out = space;
  return Measure::finite_support(space, std::move(atoms), std::move(w));
}

/// Perfectly dependent fixture: X = Y fair coin, Z constant.
inline Measure ci_dependent_fixture(SpacePtr* space_out = nullptr) {
  SpacePtr space = SampleSpace::product(
      {SampleSpace::coin(), SampleSpace::coin(), SampleSpace::discrete_uniform({"z0"})});
  std::vector<Point> atoms{Point(Tuple{Point(0), Point(0), Point(0)}),
                           Point(Tuple{Point(1), Point(1), Point(0)})};
  if (space_out) *space_out = space;
  return Measure::finite_support(space, std::move(atoms), {0.5, 0.5});
}

struct CiBenchParams {
  size_t n = 2000;
  size_t reps = 1000;
  double eps = 0.2;
  double gamma = 0.0;  // 0 = eps/4
  uint64_t seed = 7;
  size_t threads = 0;
  size_t fixtures = 100;  // densify mode
};

inline CiBenchRow ci_bench(const std::string& mode, const CiBenchParams& params) {
  CiBenchRow row;
  row.mode = mode;
  row.n = params.n;
  row.reps = params.reps;
  if (mode == "independent" || mode == "dependent") {
    SpacePtr space;
    Measure truth =
        mode == "independent" ? ci_independent_fixture(&space) : ci_dependent_fixture(&space);
    double eps = params.eps;
    if (mode == "dependent") {
      row.statistic = ci_distance(truth);  // LP-computed d*
      eps = row.statistic / 2.0;
    }
    FpTest test = ci_test(space, eps, params.gamma);
    detail::TallyOutcome tally =
        detail::run_replicates(test, truth, params.n, params.reps, params.seed, params.threads);
    for (int i = 0; i < 3; ++i) row.freq[i] = double(tally.counts[i]) / double(params.reps);
    row.total = params.reps;
    return row;
  }
  if (mode == "densify") {
    row.total = params.fixtures;
    for (size_t f = 0; f < params.fixtures; ++f) {
      RngStream rng = RngStream::for_replicate(params.seed, 13, f);
      SpacePtr space = SampleSpace::product({SampleSpace::coin(), SampleSpace::coin(),
                                             SampleSpace::real_interval(rat(0), rat(10))});
      size_t atoms_n = 2 + rng.uniform_index(5);
      std::vector<Point> atoms;
      std::vector<double> w;
      double s = 0;
      std::vector<double> zvals{1.0, 2.5, 4.0};
      for (size_t i = 0; i < atoms_n; ++i) {
        Point z(zvals[rng.uniform_index(zvals.size())]);  // deliberate duplicates
        atoms.emplace_back(
            Tuple{Point(int(rng.uniform_index(2))), Point(int(rng.uniform_index(2))), z});
        w.push_back(0.1 + rng.uniform01());
        s += w.back();
      }
      for (double& x : w) x /= s;
      // merge duplicate atoms so the fixture is a valid measure
      std::unordered_map<Point, size_t, PointHash> idx;
      std::vector<Point> uatoms;
      std::vector<double> uw;
      for (size_t i = 0; i < atoms.size(); ++i) {
        auto [it, fresh] = idx.try_emplace(atoms[i], uatoms.size());
        if (fresh) {
          uatoms.push_back(atoms[i]);
          uw.push_back(0);
        }
        uw[it->second] += w[i];
      }
      Measure P = Measure::finite_support(space, uatoms, uw);
      double eps = 0.05 + 0.25 * rng.uniform01();
      Measure Pp = densify_ci(P, eps);
      bool ok = true;
      std::unordered_map<Point, int, PointHash> zs;
      for (const Point& a : Pp.atoms())
        if (!zs.try_emplace(a.tuple()[2], 0).second) ok = false;
      if (ci_distance(Pp) > 1e-12) ok = false;
      if (!(d_bl(P, Pp) < eps)) ok = false;
      if (ok) ++row.pass_count;
    }
    return row;
  }
  throw ConfigError("unknown ci mode '" + mode + "'");
}

}  // namespace fptest

#endif  // FPTEST_HARNESS_HPP
