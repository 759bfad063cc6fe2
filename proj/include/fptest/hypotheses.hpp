#ifndef FPTEST_HYPOTHESES_HPP
#define FPTEST_HYPOTHESES_HPP

#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fptest/measure.hpp"
#include "fptest/open_set.hpp"
#include "fptest/rational.hpp"
#include "fptest/space.hpp"

namespace fptest {

/// Subbasic open set of the weak topology: {P : P(A) > q} with A open.
struct SubbasisAtom {
  OpenSet A;
  Rat q;

  SubbasisAtom(OpenSet a, Rat qq) : A(std::move(a)), q(std::move(qq)) {
    if (q < 0 || q > 1) throw std::invalid_argument("subbasis threshold outside [0,1]");
  }
};

/// Finite intersection of subbasis atoms.
using AtomClause = std::vector<SubbasisAtom>;

/// Countable union of finite intersections of atoms, lazily enumerable with
/// a deterministic order. clause_at(i) returns nullopt past the end.
struct UnionOfClauses {
  std::function<std::optional<AtomClause>(size_t)> clause_at;
  std::optional<size_t> finite_count;

  static UnionOfClauses finite(std::vector<AtomClause> clauses) {
    auto shared = std::make_shared<std::vector<AtomClause>>(std::move(clauses));
    UnionOfClauses u;
    u.finite_count = shared->size();
    u.clause_at = [shared](size_t i) -> std::optional<AtomClause> {
      if (i >= shared->size()) return std::nullopt;
      return (*shared)[i];
    };
    return u;
  }

  size_t clauses_up_to(size_t n) const {
    if (finite_count) return std::min(n, *finite_count);
    return n;
  }
};

/// A closed set given through a subbasis representation of its open
/// complement (the form every one-sided test construction consumes).
struct ClosedPiece {
  UnionOfClauses open_complement;
  std::string label;
};

enum class TopoClass { Closed, Open, ClopenInW, FSigma, None };

inline const char* topo_class_name(TopoClass c) {
  switch (c) {
    case TopoClass::Closed: return "closed";
    case TopoClass::Open: return "open";
    case TopoClass::ClopenInW: return "clopen-in-W";
    case TopoClass::FSigma: return "f-sigma";
    case TopoClass::None: return "none";
  }
  return "?";
}

/// Closed parameter intervals (plus exact singletons) of a Bernoulli family;
/// the representation d_bl_to_set evaluates in closed form.
struct BernParamSet {
  std::vector<std::pair<Rat, Rat>> closed_intervals;
  std::vector<BernParam> singletons;
};

/// Generic parametric family for grid-based set distances.
struct ParametricFamily {
  std::function<Measure(double)> measure_at;
  std::vector<std::pair<double, double>> param_ranges;
};

struct HypothesisRegion {
  TopoClass declared_class = TopoClass::None;
  std::optional<UnionOfClauses> open_rep;        // when the region is open: itself
  std::optional<UnionOfClauses> complement_rep;  // when closed: the complement
  std::function<std::optional<ClosedPiece>(size_t)> fsigma_pieces;  // null when absent
  std::optional<BernParamSet> bern_set;
  std::optional<std::vector<Measure>> measure_list;
  std::optional<ParametricFamily> family;
  std::string label;
};

enum class Membership { H0, H1, Neither };

inline const char* membership_name(Membership m) {
  switch (m) {
    case Membership::H0: return "H0";
    case Membership::H1: return "H1";
    case Membership::Neither: return "neither";
  }
  return "?";
}

struct HypothesisPair {
  int id = 0;  // 0 for custom pairs
  SpacePtr space;
  HypothesisRegion h0, h1;
  std::function<Membership(const Measure&)> oracle;
  std::string desc;
};

namespace detail {

/// Stern-Brocot / mediant enumeration of the rationals in [0,1]:
/// 0, 1, 1/2, 1/3, 2/3, 1/4, 2/5, 3/5, 3/4, ...
class UnitRationals {
 public:
  Rat at(size_t i) const {
    std::lock_guard<std::mutex> lock(mu_);
    while (cache_.size() <= i) {
      auto [l, r] = frontier_.front();
      frontier_.pop_front();
      Rat m(l.get_num() + r.get_num(), l.get_den() + r.get_den());
      m.canonicalize();
      cache_.push_back(m);
      frontier_.emplace_back(l, m);
      frontier_.emplace_back(m, r);
    }
    return cache_[i];
  }

  static const UnitRationals& instance() {
    static UnitRationals u;
    return u;
  }

 private:
  UnitRationals() : cache_{rat(0), rat(1)} { frontier_.emplace_back(rat(0), rat(1)); }
  mutable std::mutex mu_;
  mutable std::vector<Rat> cache_;
  mutable std::deque<std::pair<Rat, Rat>> frontier_;
};

/// Exact dyadic bracket (lo_i, hi_i) around an irrational a + b*sqrt(2) in
/// (0,1), refined by bisection with exact sign tests; lo_i < t < hi_i and
/// hi_i - lo_i = 2^-i.
class DyadicBracket {
 public:
  explicit DyadicBracket(BernParam t) : t_(std::move(t)) {
    brackets_.emplace_back(rat(0), rat(1));
  }

  std::pair<Rat, Rat> at(size_t i) const {
    std::lock_guard<std::mutex> lock(mu_);
    while (brackets_.size() <= i) {
      const auto& [lo, hi] = brackets_.back();
      Rat mid = (lo + hi) / 2;
      if (t_.cmp_rat(mid) > 0)
        brackets_.emplace_back(mid, hi);
      else
        brackets_.emplace_back(lo, mid);
    }
    return brackets_[i];
  }

 private:
  BernParam t_;
  mutable std::mutex mu_;
  mutable std::vector<std::pair<Rat, Rat>> brackets_;
};

}  // namespace detail

/// Atom {P({1}) > q} on a coin space.
inline SubbasisAtom coin_atom_one(const SpacePtr& space, Rat q) {
  return SubbasisAtom(OpenSet::of_points(space, {1}), std::move(q));
}

/// Atom {P({0}) > q} on a coin space.
inline SubbasisAtom coin_atom_zero(const SpacePtr& space, Rat q) {
  return SubbasisAtom(OpenSet::of_points(space, {0}), std::move(q));
}

/// Open complement of the Bernoulli singleton {p = r}, represented as the
/// union {P({1}) > r} ∪ {P({0}) > 1-r}. The second atom is vacuous at r = 0,
/// the first at r = 1.
inline UnionOfClauses singleton_closed_complement(const SpacePtr& space, const Rat& r) {
  if (r < 0 || r > 1) throw std::invalid_argument("singleton parameter outside [0,1]");
  return UnionOfClauses::finite(
      {{coin_atom_one(space, r)}, {coin_atom_zero(space, Rat(1 - r))}});
}

/// Open complement of {p = t} for irrational t = a + b*sqrt(2): the lazy
/// union of {P({1}) > hi_i} and {P({0}) > 1 - lo_i} over the dyadic bracket.
inline UnionOfClauses irrational_singleton_complement(const SpacePtr& space, BernParam t) {
  auto bracket = std::make_shared<detail::DyadicBracket>(std::move(t));
  SpacePtr sp = space;
  UnionOfClauses u;
  u.clause_at = [bracket, sp](size_t i) -> std::optional<AtomClause> {
    auto [lo, hi] = bracket->at(i / 2 + 1);
    if (i % 2 == 0) return AtomClause{coin_atom_one(sp, hi)};
    return AtomClause{coin_atom_zero(sp, Rat(1 - lo))};
  };
  return u;
}

namespace detail {

inline void require_coin_bernoulli(const SpacePtr& space, const Measure& P) {
  if (P.kind() != Measure::Kind::Bernoulli)
    throw std::invalid_argument("membership oracle needs a Bernoulli measure on this pair");
  require_same_space(P.space(), space, "member");
}

inline HypothesisRegion rational_singletons_region(const SpacePtr& space) {
  HypothesisRegion h;
  h.declared_class = TopoClass::FSigma;
  h.label = "p in [0,1] rational";
  SpacePtr sp = space;
  h.fsigma_pieces = [sp](size_t m) -> std::optional<ClosedPiece> {
    Rat r = UnitRationals::instance().at(m);
    return ClosedPiece{singleton_closed_complement(sp, r), "{p=" + rat_str(r) + "}"};
  };
  return h;
}

inline HypothesisRegion sqrt2_singletons_region(const SpacePtr& space) {
  HypothesisRegion h;
  h.declared_class = TopoClass::FSigma;
  h.label = "p in [0,1] of form rational + sqrt(2)";
  SpacePtr sp = space;
  // enumerate rationals a in [-2,0] via t -> 2t - 2 and keep a + sqrt2 in [0,1]
  auto valid = std::make_shared<std::vector<Rat>>();
  auto cursor = std::make_shared<size_t>(0);
  auto mu = std::make_shared<std::mutex>();
  h.fsigma_pieces = [sp, valid, cursor, mu](size_t m) -> std::optional<ClosedPiece> {
    std::lock_guard<std::mutex> lock(*mu);
    while (valid->size() <= m) {
      Rat a = 2 * UnitRationals::instance().at((*cursor)++) - 2;
      BernParam t{a, rat(1)};
      if (t.cmp_rat(rat(0)) >= 0 && t.cmp_rat(rat(1)) <= 0) valid->push_back(a);
    }
    BernParam t{(*valid)[m], rat(1)};
    return ClosedPiece{irrational_singleton_complement(sp, t),
                       "{p=" + rat_str(t.a) + "+sqrt2}"};
  };
  return h;
}

/// Fsigma pieces for the open ray {p > q}: the closed sets [q + 1/k, 1].
inline std::function<std::optional<ClosedPiece>(size_t)> upper_ray_pieces(const SpacePtr& space,
                                                                          const Rat& q) {
  SpacePtr sp = space;
  Rat qq = q;
  return [sp, qq](size_t m) -> std::optional<ClosedPiece> {
    Rat step = (1 - qq) / Rat(long(m) + 2);
    Rat lo = qq + step;  // in (q, 1)
    // complement of [lo, 1] is {p < lo} = {P({0}) > 1 - lo}
    return ClosedPiece{UnionOfClauses::finite({{coin_atom_zero(sp, Rat(1 - lo))}}),
                       "[" + rat_str(lo) + ",1]"};
  };
}

/// Fsigma pieces for the open ray {p < q}: the closed sets [0, q - 1/k].
inline std::function<std::optional<ClosedPiece>(size_t)> lower_ray_pieces(const SpacePtr& space,
                                                                          const Rat& q) {
  SpacePtr sp = space;
  Rat qq = q;
  return [sp, qq](size_t m) -> std::optional<ClosedPiece> {
    Rat step = qq / Rat(long(m) + 2);
    Rat hi = qq - step;
    return ClosedPiece{UnionOfClauses::finite({{coin_atom_one(sp, hi)}}),
                       "[0," + rat_str(hi) + "]"};
  };
}

}  // namespace detail

/// The Bernoulli example catalogue. Pairs:
///   1: rational p vs irrational p (no test exists for the alternative);
///   2: rational p vs rational + sqrt(2);
///   3: p in [0,1/2] vs p in (1/2,1];
///   4: p in [0,1/2) vs p in (1/2,1];
///   5: p in [0,1/2-eps] vs p in [1/2+eps,1].
inline HypothesisPair catalogue(int id, std::optional<Rat> eps = std::nullopt) {
  SpacePtr space = SampleSpace::coin();
  HypothesisPair pair;
  pair.id = id;
  pair.space = space;
  Rat half = rat(1, 2);
  switch (id) {
    case 1: {
      pair.desc = "rational vs irrational Bernoulli parameter";
      pair.h0 = detail::rational_singletons_region(space);
      pair.h1.declared_class = TopoClass::None;
      pair.h1.label = "p in [0,1] irrational (no subbasis representation)";
      pair.oracle = [space](const Measure& P) {
        detail::require_coin_bernoulli(space, P);
        return P.bern_param().is_rational() ? Membership::H0 : Membership::H1;
      };
      break;
    }
    case 2: {
      pair.desc = "rational vs rational-plus-sqrt2 Bernoulli parameter";
      pair.h0 = detail::rational_singletons_region(space);
      pair.h1 = detail::sqrt2_singletons_region(space);
      pair.oracle = [space](const Measure& P) {
        detail::require_coin_bernoulli(space, P);
        const BernParam& t = P.bern_param();
        if (t.b == 0) return Membership::H0;
        if (t.b == 1) return Membership::H1;
        return Membership::Neither;
      };
      break;
    }
    case 3: {
      pair.desc = "closed [0,1/2] vs open (1/2,1]";
      pair.h0.declared_class = TopoClass::Closed;
      pair.h0.label = "p in [0,1/2]";
      pair.h0.complement_rep = UnionOfClauses::finite({{coin_atom_one(space, half)}});
      pair.h0.fsigma_pieces = [space, half](size_t m) -> std::optional<ClosedPiece> {
        if (m > 0) return std::nullopt;
        return ClosedPiece{UnionOfClauses::finite({{coin_atom_one(space, half)}}), "[0,1/2]"};
      };
      pair.h0.bern_set = BernParamSet{{{rat(0), half}}, {}};
      pair.h1.declared_class = TopoClass::Open;
      pair.h1.label = "p in (1/2,1]";
      pair.h1.open_rep = UnionOfClauses::finite({{coin_atom_one(space, half)}});
      pair.h1.fsigma_pieces = detail::upper_ray_pieces(space, half);
      pair.h1.bern_set = BernParamSet{{{half, rat(1)}}, {}};
      pair.oracle = [space, half](const Measure& P) {
        detail::require_coin_bernoulli(space, P);
        return P.bern_param().cmp_rat(half) <= 0 ? Membership::H0 : Membership::H1;
      };
      break;
    }
    case 4: {
      pair.desc = "clopen pair [0,1/2) vs (1/2,1]";
      pair.h0.declared_class = TopoClass::ClopenInW;
      pair.h0.label = "p in [0,1/2)";
      pair.h0.open_rep = UnionOfClauses::finite({{coin_atom_zero(space, half)}});
      pair.h0.fsigma_pieces = detail::lower_ray_pieces(space, half);
      pair.h0.bern_set = BernParamSet{{{rat(0), half}}, {}};
      pair.h1.declared_class = TopoClass::ClopenInW;
      pair.h1.label = "p in (1/2,1]";
      pair.h1.open_rep = UnionOfClauses::finite({{coin_atom_one(space, half)}});
      pair.h1.fsigma_pieces = detail::upper_ray_pieces(space, half);
      pair.h1.bern_set = BernParamSet{{{half, rat(1)}}, {}};
      pair.oracle = [space, half](const Measure& P) {
        detail::require_coin_bernoulli(space, P);
        int c = P.bern_param().cmp_rat(half);
        if (c < 0) return Membership::H0;
        if (c > 0) return Membership::H1;
        return Membership::Neither;
      };
      break;
    }
    case 5: {
      if (!eps) throw std::invalid_argument("catalogue pair 5 needs an epsilon");
      Rat e = *eps;
      if (e <= 0 || e >= half) throw std::invalid_argument("epsilon must lie in (0,1/2)");
      Rat lo_edge = half - e, hi_edge = half + e;
      pair.desc = "separated pair [0,1/2-eps] vs [1/2+eps,1]";
      pair.h0.declared_class = TopoClass::Closed;
      pair.h0.label = "p in [0," + rat_str(lo_edge) + "]";
      pair.h0.complement_rep = UnionOfClauses::finite({{coin_atom_one(space, lo_edge)}});
      pair.h0.fsigma_pieces = [space, lo_edge](size_t m) -> std::optional<ClosedPiece> {
        if (m > 0) return std::nullopt;
        return ClosedPiece{UnionOfClauses::finite({{coin_atom_one(space, lo_edge)}}),
                           "[0,lo]"};
      };
      pair.h0.bern_set = BernParamSet{{{rat(0), lo_edge}}, {}};
      pair.h1.declared_class = TopoClass::Closed;
      pair.h1.label = "p in [" + rat_str(hi_edge) + ",1]";
      pair.h1.complement_rep =
          UnionOfClauses::finite({{coin_atom_zero(space, Rat(1 - hi_edge))}});
      pair.h1.fsigma_pieces = [space, hi_edge](size_t m) -> std::optional<ClosedPiece> {
        if (m > 0) return std::nullopt;
        return ClosedPiece{UnionOfClauses::finite({{coin_atom_zero(space, Rat(1 - hi_edge))}}),
                           "[hi,1]"};
      };
      pair.h1.bern_set = BernParamSet{{{hi_edge, rat(1)}}, {}};
      pair.oracle = [space, lo_edge, hi_edge](const Measure& P) {
        detail::require_coin_bernoulli(space, P);
        if (P.bern_param().cmp_rat(lo_edge) <= 0) return Membership::H0;
        if (P.bern_param().cmp_rat(hi_edge) >= 0) return Membership::H1;
        return Membership::Neither;
      };
      break;
    }
    default:
      throw std::invalid_argument("catalogue id must be 1..5");
  }
  return pair;
}

inline Membership member(const HypothesisPair& pair, const Measure& P) {
  return pair.oracle(P);
}

}  // namespace fptest

#endif  // FPTEST_HYPOTHESES_HPP
