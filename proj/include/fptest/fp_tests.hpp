#ifndef FPTEST_FP_TESTS_HPP
#define FPTEST_FP_TESTS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fptest/bl_metric.hpp"
#include "fptest/hypotheses.hpp"
#include "fptest/measure.hpp"

namespace fptest {

using Json = nlohmann::json;

/// A failed runtime invariant (e.g. both decision cases simultaneously
/// true); maps to exit code 3 in the CLI.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Verdict of an FP-test evaluation. For verdicts 0/1, margin is a radius:
/// moving every sample point by strictly less than it cannot change the
/// verdict (infinity when the verdict is constant under any perturbation).
struct Verdict {
  int value = 2;
  double margin = 0.0;
};

/// Evaluation view of a sample with lazy counting caches. Blocks (for the
/// amplification construction) are sub-views with their own caches.
class EvalContext {
 public:
  EvalContext(const SpacePtr& space, std::span<const Point> pts) : space_(space), pts_(pts) {}

  explicit EvalContext(const Sample& x) : EvalContext(x.space(), x.points()) {}

  size_t n() const { return pts_.size(); }
  const SpacePtr& space() const { return space_; }
  std::span<const Point> points() const { return pts_; }

  EvalContext block(size_t offset, size_t len) const {
    return EvalContext(space_, pts_.subspan(offset, len));
  }

  long count_in(const OpenSet& S) const {
    if (space_->is_discrete()) {
      ensure_hist();
      long c = 0;
      for (size_t i = 0; i < hist_.size(); ++i)
        if (S.mask()[i]) c += hist_[i];
      return c;
    }
    if (space_->is_real()) {
      ensure_sorted();
      long c = 0;
      for (const RealIv& iv : S.intervals()) c += count_in_interval(iv);
      return c;
    }
    long c = 0;
    for (const Point& p : pts_)
      if (S.contains(p)) c += 1;
    return c;
  }

  /// Distances of the in-set points to the set's complement, as sorted
  /// (distance, multiplicity) pairs; drives the openness margins.
  std::vector<std::pair<double, long>> inside_boundary_distances(const OpenSet& S) const {
    std::vector<std::pair<double, long>> out;
    if (space_->is_discrete()) {
      ensure_hist();
      for (size_t i = 0; i < hist_.size(); ++i)
        if (hist_[i] > 0 && S.mask()[i])
          out.emplace_back(S.dist_to_complement(Point(int(i))), hist_[i]);
    } else {
      for (const Point& p : pts_)
        if (S.contains(p)) out.emplace_back(S.dist_to_complement(p), 1);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Empirical measure of this view.
  Measure empirical() const {
    if (n() == 0) throw std::invalid_argument("empirical measure of empty sample");
    std::vector<Point> pts(pts_.begin(), pts_.end());
    return empirical_measure(Sample(space_, std::move(pts)));
  }

 private:
  void ensure_hist() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!hist_.empty() || pts_.empty()) {
      if (hist_.empty()) hist_.assign(space_->point_count(), 0);
      return;
    }
    hist_.assign(space_->point_count(), 0);
    for (const Point& p : pts_) ++hist_[p.index()];
  }

  void ensure_sorted() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (sorted_ready_) return;
    sorted_.reserve(pts_.size());
    for (const Point& p : pts_) sorted_.push_back(p.real());
    std::sort(sorted_.begin(), sorted_.end());
    sorted_ready_ = true;
  }

  long count_in_interval(const RealIv& iv) const {
    // first index inside from the left
    size_t lo = 0, hi = sorted_.size();
    if (iv.a) {
      lo = std::partition_point(sorted_.begin(), sorted_.end(),
                                [&](double x) {
                                  int c = cmp_double_rat(x, *iv.a);
                                  return iv.a_closed ? c < 0 : c <= 0;
                                }) -
           sorted_.begin();
    }
    if (iv.b) {
      hi = std::partition_point(sorted_.begin(), sorted_.end(),
                                [&](double x) {
                                  int c = cmp_double_rat(x, *iv.b);
                                  return iv.b_closed ? c <= 0 : c < 0;
                                }) -
           sorted_.begin();
    }
    return hi > lo ? long(hi - lo) : 0;
  }

  SpacePtr space_;
  std::span<const Point> pts_;
  mutable std::mutex mu_;
  mutable std::vector<long> hist_;
  mutable std::vector<double> sorted_;
  mutable bool sorted_ready_ = false;
};

/// An FP-test: n-indexed family of maps sample -> {0,1,2} whose verdict-0
/// and verdict-1 regions are open. Values are cheap shared handles.
class FpTest {
 public:
  using Evaluator = std::function<Verdict(const EvalContext&)>;

  FpTest() = default;
  FpTest(Evaluator eval, Json provenance, SpacePtr space,
         std::optional<double> alpha = std::nullopt)
      : impl_(std::make_shared<Impl>(
            Impl{std::move(eval), std::move(provenance), std::move(space), alpha})) {}

  bool valid() const { return impl_ != nullptr; }
  Verdict eval(const EvalContext& ctx) const { return impl_->eval(ctx); }
  const Json& provenance() const { return impl_->provenance; }
  const SpacePtr& space() const { return impl_->space; }
  std::optional<double> alpha() const { return impl_->alpha; }

 private:
  struct Impl {
    Evaluator eval;
    Json provenance;
    SpacePtr space;
    std::optional<double> alpha;
  };
  std::shared_ptr<const Impl> impl_;
};

inline Verdict evaluate(const FpTest& t, const Sample& x) {
  if (t.space()) require_same_space(t.space(), x.space(), "evaluate");
  EvalContext ctx(x);
  return t.eval(ctx);
}

/// Hoeffding threshold t_n = sqrt(ln(pi^2 n^2 / (6 alpha)) / (2n)); makes
/// the subbasis test's summed type-I error at most alpha.
inline double hoeffding_threshold(size_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("threshold needs n >= 1");
  double nn = double(n);
  constexpr double pi = 3.14159265358979323846;
  return std::sqrt(std::log(pi * pi * nn * nn / (6.0 * alpha)) / (2.0 * nn));
}

/// Threshold/parameter bag shared by the constructors.
struct TestThresholds {
  double alpha = 0.05;       // error budget
  double eps = 0.1;          // amplification margin, in (0, 1/2)
  double gamma = 0.0;        // BL margin (0 = derive from separation)
  size_t shift_index = 1;    // N
  double log_base = 2.718281828459045;  // base of k_n = floor(log n)

  void validate() const {
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
    if (!(eps > 0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0,1/2)");
    if (shift_index < 1) throw std::invalid_argument("shift index must be >= 1");
    if (!(log_base > 1)) throw std::invalid_argument("log base must exceed 1");
  }

  double t_n(size_t n) const { return hoeffding_threshold(n, alpha); }
};

namespace detail {

/// Smallest integer count satisfying `count > threshold`.
inline long min_count_strict(double threshold) {
  double f = std::floor(threshold);
  long k = long(f) + 1;
  if (double(k - 1) > threshold) --k;  // guard floor rounding
  return k;
}

/// Smallest integer count satisfying `count >= threshold`.
inline long min_count_weak(double threshold) {
  double c = std::ceil(threshold);
  long k = long(c);
  if (double(k) < threshold) ++k;
  return k;
}

/// Margin for a condition of the form count_in(S) (>|>=) threshold: the
/// verdict survives as long as enough counted points stay inside S, so we
/// may sacrifice the L = count - min_needed closest-to-boundary ones.
inline double count_condition_margin(const EvalContext& ctx, const OpenSet& S, long count,
                                     long min_needed) {
  long losable = count - min_needed;
  if (losable < 0) return 0.0;
  auto dists = ctx.inside_boundary_distances(S);
  long cum = 0;
  for (const auto& [d, mult] : dists) {
    cum += mult;
    if (cum > losable) return d;
  }
  return std::numeric_limits<double>::infinity();
}

/// Same pattern over a set of sub-verdicts: keep enough votes for `value`.
inline double vote_margin(const std::vector<Verdict>& votes, int value, long min_needed) {
  std::vector<double> margins;
  for (const Verdict& v : votes)
    if (v.value == value) margins.push_back(v.margin);
  long losable = long(margins.size()) - min_needed;
  if (losable < 0) return 0.0;
  std::sort(margins.begin(), margins.end());
  if (size_t(losable) >= margins.size()) return std::numeric_limits<double>::infinity();
  return margins[losable];
}

inline Json open_set_json(const OpenSet& S) { return Json(S.str()); }

inline Json atom_json(const SubbasisAtom& atom) {
  return Json{{"A", open_set_json(atom.A)}, {"q", rat_str(atom.q)}};
}

}  // namespace detail

/// Lemma-style threshold test for one subbasis atom {P(A) > q}:
///   verdict 0  iff  freq(A^c_{1/n}) > 1 - q - t_n        (evidence P(A) <= q)
///   verdict 1  iff  freq(ext(A^c_{1/n})) >= q + t_n      (evidence P(A) > q)
/// The two sets are disjoint and the thresholds sum to 1, so the cases are
/// mutually exclusive; both counting conditions define open regions.
inline FpTest subbasis_test(const SubbasisAtom& atom, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  auto cache = std::make_shared<std::pair<std::mutex, std::map<size_t, std::pair<OpenSet, OpenSet>>>>();
  OpenSet A = atom.A;
  double q = rat_to_double(atom.q);
  Json prov{{"op", "subbasis_test"}, {"atom", detail::atom_json(atom)}, {"alpha", alpha}};
  auto eval = [A, q, alpha, cache](const EvalContext& ctx) -> Verdict {
    size_t n = ctx.n();
    if (n == 0) return {2, 0.0};
    const std::pair<OpenSet, OpenSet>* sets;
    {
      std::lock_guard<std::mutex> lock(cache->first);
      auto it = cache->second.find(n);
      if (it == cache->second.end()) {
        OpenSet comp_nbhd = A.neighborhood_of_complement(rat(1, long(n)));
        OpenSet ext = comp_nbhd.exterior();
        it = cache->second.emplace(n, std::make_pair(std::move(comp_nbhd), std::move(ext))).first;
      }
      sets = &it->second;
    }
    double t = hoeffding_threshold(n, alpha);
    double nn = double(n);
    long c0 = ctx.count_in(sets->first);
    long c1 = ctx.count_in(sets->second);
    bool cond0 = double(c0) > nn * (1.0 - q - t);
    bool cond1 = double(c1) >= nn * (q + t);
    if (cond0 && cond1)
      throw InvariantViolation("subbasis test: accept and reject cases both hold");
    if (cond0) {
      long need = detail::min_count_strict(nn * (1.0 - q - t));
      return {0, detail::count_condition_margin(ctx, sets->first, c0, need)};
    }
    if (cond1) {
      long need = detail::min_count_weak(nn * (q + t));
      return {1, detail::count_condition_margin(ctx, sets->second, c1, need)};
    }
    return {2, 0.0};
  };
  return FpTest(std::move(eval), std::move(prov), A.space(), alpha);
}

/// Block sizes of the amplification construction: k = floor(log n) in the
/// given base and m = floor(n / k).
inline std::pair<size_t, size_t> amplify_block_sizes(size_t n, double log_base = 2.718281828459045) {
  if (n < 3) return {0, 0};
  size_t k = size_t(std::floor(std::log(double(n)) / std::log(log_base)));
  if (k < 1) return {0, 0};
  return {k, n / k};
}

/// Majority-of-blocks amplification: split the sample into m disjoint blocks
/// of k observations, run the base test on each, and follow the strict
/// majority of 0-votes or 1-votes. Samples with n < 3 yield verdict 2.
inline FpTest amplify(const FpTest& base, double log_base = 2.718281828459045) {
  if (!(log_base > 1)) throw std::invalid_argument("log base must exceed 1");
  Json prov{{"op", "amplify"}, {"log_base", log_base}, {"base", base.provenance()}};
  FpTest inner = base;
  auto eval = [inner, log_base](const EvalContext& ctx) -> Verdict {
    auto [k, m] = amplify_block_sizes(ctx.n(), log_base);
    if (k == 0 || m == 0) return {2, 0.0};
    std::vector<Verdict> votes;
    votes.reserve(m);
    long c0 = 0, c1 = 0;
    for (size_t j = 0; j < m; ++j) {
      votes.push_back(inner.eval(ctx.block(j * k, k)));
      if (votes.back().value == 0) ++c0;
      if (votes.back().value == 1) ++c1;
    }
    bool cond0 = 2 * c0 > long(m);
    bool cond1 = 2 * c1 > long(m);
    if (cond0 && cond1)
      throw InvariantViolation("amplified test: both majorities hold");
    long need = long(m) / 2 + 1;
    if (cond0) return {0, detail::vote_margin(votes, 0, need)};
    if (cond1) return {1, detail::vote_margin(votes, 1, need)};
    return {2, 0.0};
  };
  return FpTest(std::move(eval), std::move(prov), base.space(), base.alpha());
}

/// Provider of the lazily enumerable union terms of `combine`.
using TermProvider = std::function<std::optional<std::vector<FpTest>>(size_t)>;

/// Union/intersection combinator: at stage n, using terms i = 1..n,
///   verdict 0 iff every term has some member voting 0;
///   verdict 1 iff some term has all members voting 1.
/// Each member of term i must carry budget alpha/2^i, so the type-I budgets
/// sum to at most alpha.
inline FpTest combine(TermProvider terms, double alpha, SpacePtr space,
                      Json terms_provenance = Json::array()) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  if (!terms) throw std::invalid_argument("combine needs a term provider");
  struct Cache {
    std::mutex mu;
    std::vector<std::vector<FpTest>> terms;
    bool ended = false;
  };
  auto cache = std::make_shared<Cache>();
  auto term_at = [terms, alpha, cache](size_t i) -> const std::vector<FpTest>* {
    std::lock_guard<std::mutex> lock(cache->mu);
    while (cache->terms.size() <= i && !cache->ended) {
      auto next = terms(cache->terms.size());
      if (!next) {
        cache->ended = true;
        break;
      }
      if (next->empty()) throw std::invalid_argument("combine term with no members");
      double budget = alpha / std::pow(2.0, double(cache->terms.size() + 1));
      for (const FpTest& t : *next)
        if (t.alpha() && *t.alpha() > budget * (1 + 1e-9))
          throw std::invalid_argument("combine sub-test exceeds its alpha/2^i budget");
      cache->terms.push_back(std::move(*next));
    }
    return i < cache->terms.size() ? &cache->terms[i] : nullptr;
  };
  Json prov{{"op", "combine"}, {"alpha", alpha}, {"terms", std::move(terms_provenance)}};
  auto eval = [term_at](const EvalContext& ctx) -> Verdict {
    size_t n = ctx.n();
    if (n == 0) return {2, 0.0};
    bool all_terms_have_zero = true;
    double margin0 = std::numeric_limits<double>::infinity();
    bool some_term_all_one = false;
    double margin1 = 0.0;
    size_t considered = 0;
    for (size_t i = 0; i < n; ++i) {
      const std::vector<FpTest>* term = term_at(i);
      if (!term) break;
      ++considered;
      double best_zero = -1.0;
      double worst_one = std::numeric_limits<double>::infinity();
      bool has_zero = false, all_one = true;
      for (const FpTest& t : *term) {
        Verdict v = t.eval(ctx);
        if (v.value == 0) {
          has_zero = true;
          best_zero = std::max(best_zero, v.margin);
        }
        if (v.value == 1)
          worst_one = std::min(worst_one, v.margin);
        else
          all_one = false;
      }
      if (has_zero)
        margin0 = std::min(margin0, best_zero);
      else
        all_terms_have_zero = false;
      if (all_one) {
        some_term_all_one = true;
        margin1 = std::max(margin1, worst_one);
      }
    }
    if (considered == 0) return {2, 0.0};  // empty term list: constant suspension
    bool cond0 = all_terms_have_zero;
    bool cond1 = some_term_all_one;
    if (cond0 && cond1)
      throw InvariantViolation("combine: union and intersection cases both hold");
    if (cond0) return {0, margin0};
    if (cond1) return {1, margin1};
    return {2, 0.0};
  };
  return FpTest(std::move(eval), std::move(prov), std::move(space), alpha);
}

inline FpTest combine(std::vector<std::vector<FpTest>> fixed_terms, double alpha, SpacePtr space) {
  auto shared = std::make_shared<std::vector<std::vector<FpTest>>>(std::move(fixed_terms));
  Json tp = Json::array();
  for (const auto& term : *shared) {
    Json members = Json::array();
    for (const FpTest& t : term) members.push_back(t.provenance());
    tp.push_back(std::move(members));
  }
  TermProvider provider = [shared](size_t i) -> std::optional<std::vector<FpTest>> {
    if (i >= shared->size()) return std::nullopt;
    return (*shared)[i];
  };
  return combine(std::move(provider), alpha, std::move(space), std::move(tp));
}

/// Swaps verdicts 0 and 1 (margins carried over).
inline FpTest swap_verdicts(const FpTest& t) {
  Json prov{{"op", "swap"}, {"base", t.provenance()}};
  FpTest inner = t;
  auto eval = [inner](const EvalContext& ctx) -> Verdict {
    Verdict v = inner.eval(ctx);
    if (v.value == 0) return {1, v.margin};
    if (v.value == 1) return {0, v.margin};
    return v;
  };
  return FpTest(std::move(eval), std::move(prov), t.space(), t.alpha());
}

/// One-sided test for a closed set given the subbasis representation of its
/// open complement U = union of clauses: verdict 0 is evidence for the
/// closed set, verdict 1 evidence for U. Clause i's atoms get budget
/// alpha/2^i.
inline FpTest region_union_test(const UnionOfClauses& complement, double alpha, SpacePtr space,
                                const std::string& label = "") {
  auto clause_at = complement.clause_at;
  double a = alpha;
  TermProvider provider = [clause_at, a](size_t i) -> std::optional<std::vector<FpTest>> {
    auto clause = clause_at(i);
    if (!clause) return std::nullopt;
    double budget = a / std::pow(2.0, double(i + 1));
    std::vector<FpTest> members;
    for (const SubbasisAtom& atom : *clause) members.push_back(subbasis_test(atom, budget));
    return members;
  };
  Json tp = Json{{"region", label}};
  return combine(std::move(provider), alpha, std::move(space), std::move(tp));
}

/// Two one-sided tests welded into a two-sided one (clopen construction):
/// verdict i iff both sub-tests vote i.
inline FpTest clopen_test(const FpTest& t0, const FpTest& t1) {
  Json prov{{"op", "clopen_test"}, {"t0", t0.provenance()}, {"t1", t1.provenance()}};
  FpTest a = t0, b = t1;
  auto eval = [a, b](const EvalContext& ctx) -> Verdict {
    Verdict v0 = a.eval(ctx);
    Verdict v1 = b.eval(ctx);
    bool cond0 = v0.value == 0 && v1.value == 0;
    bool cond1 = v0.value == 1 && v1.value == 1;
    if (cond0 && cond1) throw InvariantViolation("clopen test: both cases hold");
    if (cond0) return {0, std::min(v0.margin, v1.margin)};
    if (cond1) return {1, std::min(v0.margin, v1.margin)};
    return {2, 0.0};
  };
  return FpTest(std::move(eval), std::move(prov), t0.space(), t0.alpha());
}

using PieceProvider = std::function<std::optional<ClosedPiece>(size_t)>;

/// F-sigma construction: H0 = union of closed pieces H0^m, H1 = union of
/// closed pieces H1^m, each piece given through its open complement. With
/// phi0^m the one-sided test of H0^m and phi1^k that of H1^k (oriented so
/// verdict 1 is evidence for H1^k),
///   {verdict 0} = union over m<=n of {phi0^m=0} ∩ ∩_{k<=m} {phi1^k=0},
///   {verdict 1} = union over m<=n of {phi1^m=1} ∩ ∩_{k<=m} {phi0^k=1}.
inline FpTest fsigma_test(PieceProvider h0_pieces, PieceProvider h1_pieces, double alpha,
                          SpacePtr space) {
  if (!h0_pieces || !h1_pieces)
    throw std::invalid_argument("fsigma_test needs piece providers with complement representations");
  struct Cache {
    std::mutex mu;
    std::vector<FpTest> t0, t1;
    bool end0 = false, end1 = false;
  };
  auto cache = std::make_shared<Cache>();
  SpacePtr sp = space;
  double a = alpha;
  auto grow = [cache, h0_pieces, h1_pieces, sp, a](size_t upto) {
    std::lock_guard<std::mutex> lock(cache->mu);
    while (cache->t0.size() < upto && !cache->end0) {
      auto piece = h0_pieces(cache->t0.size());
      if (!piece) {
        cache->end0 = true;
        break;
      }
      double budget = a / std::pow(2.0, double(cache->t0.size() + 1));
      cache->t0.push_back(region_union_test(piece->open_complement, budget, sp, piece->label));
    }
    while (cache->t1.size() < upto && !cache->end1) {
      auto piece = h1_pieces(cache->t1.size());
      if (!piece) {
        cache->end1 = true;
        break;
      }
      double budget = a / std::pow(2.0, double(cache->t1.size() + 1));
      cache->t1.push_back(
          swap_verdicts(region_union_test(piece->open_complement, budget, sp, piece->label)));
    }
  };
  Json prov{{"op", "fsigma_test"}, {"alpha", alpha}};
  auto eval = [cache, grow](const EvalContext& ctx) -> Verdict {
    size_t n = ctx.n();
    if (n == 0) return {2, 0.0};
    grow(n);
    std::vector<FpTest> t0, t1;
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      size_t k0 = std::min(n, cache->t0.size());
      size_t k1 = std::min(n, cache->t1.size());
      t0.assign(cache->t0.begin(), cache->t0.begin() + k0);
      t1.assign(cache->t1.begin(), cache->t1.begin() + k1);
    }
    size_t m0 = t0.size(), m1 = t1.size();
    size_t upto = std::max(m0, m1);
    std::vector<Verdict> v0(upto), v1(upto);
    for (size_t i = 0; i < upto; ++i) {
      if (i < m0) v0[i] = t0[i].eval(ctx);
      if (i < m1) v1[i] = t1[i].eval(ctx);
    }
    bool cond0 = false, cond1 = false;
    double margin0 = 0.0, margin1 = 0.0;
    double prefix1_zero_margin = std::numeric_limits<double>::infinity();
    bool prefix1_all_zero = true;
    for (size_t m = 0; m < m0; ++m) {
      // the k <= m prefix over phi1 (missing pieces treated as vacuous)
      if (m < m1) {
        if (v1[m].value != 0) prefix1_all_zero = false;
        else prefix1_zero_margin = std::min(prefix1_zero_margin, v1[m].margin);
      }
      if (v0[m].value == 0 && prefix1_all_zero) {
        cond0 = true;
        margin0 = std::max(margin0, std::min(v0[m].margin, prefix1_zero_margin));
      }
    }
    double prefix0_one_margin = std::numeric_limits<double>::infinity();
    bool prefix0_all_one = true;
    for (size_t m = 0; m < m1; ++m) {
      if (m < m0) {
        if (v0[m].value != 1) prefix0_all_one = false;
        else prefix0_one_margin = std::min(prefix0_one_margin, v0[m].margin);
      }
      if (v1[m].value == 1 && prefix0_all_one) {
        cond1 = true;
        margin1 = std::max(margin1, std::min(v1[m].margin, prefix0_one_margin));
      }
    }
    if (cond0 && cond1) throw InvariantViolation("fsigma test: both cases hold");
    if (cond0) return {0, margin0};
    if (cond1) return {1, margin1};
    return {2, 0.0};
  };
  return FpTest(std::move(eval), std::move(prov), std::move(space), alpha);
}

/// Separation d_bl(H0, H1) for hypothesis sets supporting set distances.
inline double region_separation(const HypothesisRegion& H0, const HypothesisRegion& H1,
                                const SpacePtr& space) {
  if (H0.bern_set && H1.bern_set) {
    double d01 = space->dist(Point(0), Point(1));
    double scale = std::min(2.0, d01);
    double best = std::numeric_limits<double>::infinity();
    auto pts0 = *H0.bern_set;
    auto pts1 = *H1.bern_set;
    auto gap = [](double a_lo, double a_hi, double b_lo, double b_hi) {
      if (a_hi < b_lo) return b_lo - a_hi;
      if (b_hi < a_lo) return a_lo - b_hi;
      return 0.0;
    };
    for (const auto& [alo, ahi] : pts0.closed_intervals)
      for (const auto& [blo, bhi] : pts1.closed_intervals)
        best = std::min(best, gap(rat_to_double(alo), rat_to_double(ahi), rat_to_double(blo),
                                  rat_to_double(bhi)));
    for (const BernParam& t : pts0.singletons)
      for (const auto& [blo, bhi] : pts1.closed_intervals)
        best = std::min(best, gap(t.value(), t.value(), rat_to_double(blo), rat_to_double(bhi)));
    for (const BernParam& t : pts1.singletons)
      for (const auto& [alo, ahi] : pts0.closed_intervals)
        best = std::min(best, gap(rat_to_double(alo), rat_to_double(ahi), t.value(), t.value()));
    if (!std::isfinite(best)) throw std::invalid_argument("empty hypothesis parameter set");
    return scale * best;
  }
  if (H0.measure_list && H1.measure_list) {
    double best = std::numeric_limits<double>::infinity();
    for (const Measure& P : *H0.measure_list)
      for (const Measure& Q : *H1.measure_list) best = std::min(best, d_bl(P, Q));
    if (!std::isfinite(best)) throw std::invalid_argument("empty measure list");
    return best;
  }
  throw std::invalid_argument("separation needs distance-computable hypothesis sets");
}

/// Empirical-distance test for metrically separated hypotheses:
///   verdict 0 iff d_bl(empirical, H0) < gamma,
///   verdict 1 iff d_bl(empirical, H1) < gamma,
/// with gamma < d_bl(H0, H1)/2 so the cases exclude each other. When gamma
/// is zero/omitted it defaults to 0.9 * separation / 2.
inline FpTest bl_separated_test(const HypothesisRegion& H0, const HypothesisRegion& H1,
                                SpacePtr space, double gamma = 0.0) {
  double sep = region_separation(H0, H1, space);
  if (!(sep > 0)) throw std::invalid_argument("hypotheses are not metrically separated");
  if (gamma == 0.0) gamma = 0.9 * sep / 2.0;
  if (!(gamma > 0) || !(gamma < sep / 2.0))
    throw std::invalid_argument("gamma must lie in (0, separation/2)");
  auto h0 = std::make_shared<HypothesisRegion>(H0);
  auto h1 = std::make_shared<HypothesisRegion>(H1);
  Json prov{{"op", "bl_separated_test"},
            {"gamma", gamma},
            {"separation", sep},
            {"H0", H0.label},
            {"H1", H1.label}};
  double g = gamma;
  auto eval = [h0, h1, g](const EvalContext& ctx) -> Verdict {
    if (ctx.n() == 0) return {2, 0.0};
    Measure emp = ctx.empirical();
    double d0 = d_bl_to_set(emp, *h0);
    double d1 = d_bl_to_set(emp, *h1);
    bool cond0 = d0 < g;
    bool cond1 = d1 < g;
    if (cond0 && cond1)
      throw InvariantViolation("bl-separated test: both distance cases hold");
    // moving every point by < delta moves the empirical measure by < delta
    // in d_bl, and set distances are 1-Lipschitz in the measure
    if (cond0) return {0, g - d0};
    if (cond1) return {1, g - d1};
    return {2, 0.0};
  };
  return FpTest(std::move(eval), std::move(prov), std::move(space));
}

/// Index shift psi_n = 1{n >= N} t_n: verdict 0 below N, else t's verdict.
inline FpTest shift(const FpTest& t, size_t N) {
  if (N < 1) throw std::invalid_argument("shift index must be >= 1");
  Json prov{{"op", "shift"}, {"N", N}, {"base", t.provenance()}};
  FpTest inner = t;
  auto eval = [inner, N](const EvalContext& ctx) -> Verdict {
    if (ctx.n() < N) return {0, std::numeric_limits<double>::infinity()};
    return inner.eval(ctx);
  };
  return FpTest(std::move(eval), std::move(prov), t.space(), t.alpha());
}

/// Merges the suspension region into verdict 0 or 1, producing a binary
/// test. The merged region is no longer open; only the untouched verdict
/// keeps a positive margin, and provenance records which one.
inline FpTest to_binary(const FpTest& t, int merge_into) {
  if (merge_into != 0 && merge_into != 1)
    throw std::invalid_argument("merge target must be verdict 0 or 1");
  Json prov{{"op", "to_binary"},
            {"merge_into", merge_into},
            {"open_verdicts", Json::array({1 - merge_into})},
            {"base", t.provenance()}};
  FpTest inner = t;
  auto eval = [inner, merge_into](const EvalContext& ctx) -> Verdict {
    Verdict v = inner.eval(ctx);
    if (v.value == 2) return {merge_into, 0.0};
    return v;
  };
  return FpTest(std::move(eval), std::move(prov), t.space(), t.alpha());
}

}  // namespace fptest

#endif  // FPTEST_FP_TESTS_HPP
