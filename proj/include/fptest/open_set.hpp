#ifndef FPTEST_OPEN_SET_HPP
#define FPTEST_OPEN_SET_HPP

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fptest/point.hpp"
#include "fptest/rational.hpp"
#include "fptest/space.hpp"

namespace fptest {

/// An interval that is open relative to the ambient interval: an endpoint may
/// be included only where it coincides with the ambient boundary.
struct RealIv {
  std::optional<Rat> a, b;  // nullopt = unbounded side
  bool a_closed = false, b_closed = false;

  bool contains_rat(const Rat& x) const {
    if (a) {
      int c = cmp(x, *a);
      if (c < 0 || (c == 0 && !a_closed)) return false;
    }
    if (b) {
      int c = cmp(x, *b);
      if (c > 0 || (c == 0 && !b_closed)) return false;
    }
    return true;
  }
};

/// A set that is open in the subspace topology of its sample space.
/// Discrete spaces: any subset (all subsets are clopen). Real spaces: a
/// finite union of disjoint relatively-open intervals with rational
/// endpoints, kept sorted and canonical. All endpoint arithmetic is exact.
class OpenSet {
 public:
  OpenSet() = default;

  static OpenSet empty(SpacePtr space) {
    OpenSet s;
    s.space_ = std::move(space);
    if (s.space_->is_discrete()) s.mask_.assign(s.space_->point_count(), false);
    return s;
  }

  static OpenSet whole(SpacePtr space) {
    OpenSet s;
    s.space_ = std::move(space);
    if (s.space_->is_discrete()) {
      s.mask_.assign(s.space_->point_count(), true);
    } else if (s.space_->is_real()) {
      RealIv iv{s.space_->lower(), s.space_->upper(), s.space_->lower().has_value(),
                s.space_->upper().has_value()};
      s.ivs_.push_back(std::move(iv));
    } else {
      throw std::invalid_argument("open sets supported on discrete and real spaces only");
    }
    return s;
  }

  static OpenSet of_points(SpacePtr space, std::vector<int> indices) {
    if (!space->is_discrete()) throw std::invalid_argument("point set needs a discrete space");
    OpenSet s = empty(std::move(space));
    for (int i : indices) {
      if (i < 0 || size_t(i) >= s.mask_.size())
        throw std::invalid_argument("point index outside space");
      s.mask_[i] = true;
    }
    return s;
  }

  /// Builds ∪(aᵢ,bᵢ) clipped to the ambient interval; endpoints touching the
  /// ambient boundary become included (relative openness).
  static OpenSet of_intervals(SpacePtr space, std::vector<std::pair<Rat, Rat>> raw) {
    if (!space->is_real()) throw std::invalid_argument("interval set needs a real space");
    OpenSet s = empty(space);
    for (auto& [a, b] : raw) {
      RealIv iv{a, b, false, false};
      s.push_clipped(iv);
    }
    s.canonicalize();
    return s;
  }

  const SpacePtr& space() const { return space_; }
  const std::vector<RealIv>& intervals() const { return ivs_; }
  const std::vector<bool>& mask() const { return mask_; }

  bool is_empty() const {
    if (space_->is_discrete())
      return std::none_of(mask_.begin(), mask_.end(), [](bool b) { return b; });
    return ivs_.empty();
  }

  bool contains(const Point& p) const {
    if (space_->is_discrete()) {
      return p.is_discrete() && p.index() >= 0 && size_t(p.index()) < mask_.size() &&
             mask_[p.index()];
    }
    return contains_rat(rat_of_double(p.real()));
  }

  bool contains_rat(const Rat& x) const {
    for (const RealIv& iv : ivs_)
      if (iv.contains_rat(x)) return true;
    return false;
  }

  /// Open r-neighborhood of the complement of this set: ∪_{c ∉ S} B(c, r).
  OpenSet neighborhood_of_complement(const Rat& r) const {
    if (sgn(r) <= 0) throw std::invalid_argument("neighborhood radius must be positive");
    OpenSet out = empty(space_);
    if (space_->is_discrete()) {
      size_t m = mask_.size();
      for (size_t p = 0; p < m; ++p) {
        for (size_t c = 0; c < m; ++c) {
          if (mask_[c]) continue;  // c must lie in the complement
          if (cmp_double_rat(space_->dist(Point(int(p)), Point(int(c))), r) < 0) {
            out.mask_[p] = true;
            break;
          }
        }
      }
      return out;
    }
    for (const ClosedIv& piece : complement_pieces()) {
      RealIv iv;
      if (piece.a) iv.a = *piece.a - r;
      if (piece.b) iv.b = *piece.b + r;
      out.push_clipped(iv);
    }
    out.canonicalize();
    return out;
  }

  /// Interior of the complement, relative to the ambient space.
  OpenSet exterior() const {
    OpenSet out = empty(space_);
    if (space_->is_discrete()) {
      for (size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = !mask_[i];
      return out;
    }
    const auto& lo = space_->lower();
    const auto& hi = space_->upper();
    for (const ClosedIv& piece : complement_pieces()) {
      RealIv iv{piece.a, piece.b, false, false};
      if (iv.a && lo && *iv.a == *lo) iv.a_closed = true;
      if (iv.b && hi && *iv.b == *hi) iv.b_closed = true;
      // a degenerate piece has empty interior unless it is the whole space
      if (iv.a && iv.b && *iv.a == *iv.b && !(iv.a_closed && iv.b_closed)) continue;
      out.ivs_.push_back(std::move(iv));
    }
    out.canonicalize();
    return out;
  }

  /// Distance from a member point to the complement (in the subspace);
  /// +inf when the set is the whole space or unbounded on the relevant side.
  double dist_to_complement(const Point& p) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (space_->is_discrete()) {
      if (!contains(p)) return 0.0;
      double d = inf;
      for (size_t c = 0; c < mask_.size(); ++c)
        if (!mask_[c]) d = std::min(d, space_->dist(p, Point(int(c))));
      return d;
    }
    Rat x = rat_of_double(p.real());
    for (const RealIv& iv : ivs_) {
      if (!iv.contains_rat(x)) continue;
      double left = (iv.a && !iv.a_closed) ? rat_to_double(Rat(x - *iv.a)) : inf;
      double right = (iv.b && !iv.b_closed) ? rat_to_double(Rat(*iv.b - x)) : inf;
      return std::min(left, right);
    }
    return 0.0;
  }

  std::string str() const {
    if (space_->is_discrete()) {
      std::string s = "{";
      bool first = true;
      for (size_t i = 0; i < mask_.size(); ++i) {
        if (!mask_[i]) continue;
        if (!first) s += ",";
        s += space_->labels()[i];
        first = false;
      }
      return s + "}";
    }
    if (ivs_.empty()) return "{}";
    std::string s;
    for (size_t i = 0; i < ivs_.size(); ++i) {
      const RealIv& iv = ivs_[i];
      if (i) s += " u ";
      s += iv.a_closed ? "[" : "(";
      s += iv.a ? rat_str(*iv.a) : "-inf";
      s += ",";
      s += iv.b ? rat_str(*iv.b) : "inf";
      s += iv.b_closed ? "]" : ")";
    }
    return s;
  }

  friend bool operator==(const OpenSet& u, const OpenSet& v) {
    if (!u.space_->same_as(*v.space_)) return false;
    if (u.space_->is_discrete()) return u.mask_ == v.mask_;
    if (u.ivs_.size() != v.ivs_.size()) return false;
    for (size_t i = 0; i < u.ivs_.size(); ++i) {
      const RealIv &x = u.ivs_[i], &y = v.ivs_[i];
      if (x.a != y.a || x.b != y.b || x.a_closed != y.a_closed || x.b_closed != y.b_closed)
        return false;
    }
    return true;
  }

 private:
  struct ClosedIv {
    std::optional<Rat> a, b;  // [a,b]; nullopt = unbounded (open at infinity)
  };

  /// Maximal closed pieces of the complement, left to right.
  std::vector<ClosedIv> complement_pieces() const {
    std::vector<ClosedIv> out;
    std::optional<Rat> cursor = space_->lower();
    bool at_minus_inf = !cursor.has_value();
    bool exhausted = false;
    for (const RealIv& iv : ivs_) {
      if (!iv.a) {  // interval reaches -inf: no gap before it
        cursor = iv.b;
        at_minus_inf = false;
        exhausted = !iv.b.has_value() || iv.b_closed;
        continue;
      }
      bool gap_nonempty = at_minus_inf || !cursor || *cursor < *iv.a ||
                          (*cursor == *iv.a && !iv.a_closed && !covered(*cursor));
      if (gap_nonempty && !(cursor && *cursor == *iv.a && iv.a_closed)) {
        ClosedIv piece;
        if (!at_minus_inf) piece.a = cursor;
        piece.b = iv.a;
        out.push_back(std::move(piece));
      }
      cursor = iv.b;
      at_minus_inf = false;
      exhausted = !iv.b.has_value() || iv.b_closed;
    }
    if (!exhausted) {
      ClosedIv piece;
      if (!at_minus_inf) piece.a = cursor;
      piece.b = space_->upper();
      // a bounded-above trailing gap is nonempty unless cursor == hi with hi covered;
      // cursor is never covered here (b_closed would have set exhausted)
      if (!piece.a || !piece.b || *piece.a <= *piece.b) out.push_back(std::move(piece));
    }
    return out;
  }

  bool covered(const Rat& x) const { return contains_rat(x); }

  void push_clipped(RealIv iv) {
    const auto& lo = space_->lower();
    const auto& hi = space_->upper();
    // the ambient edge is included only when the open interval strictly
    // straddles it; an endpoint exactly at the edge keeps it excluded
    if (lo && (!iv.a || *iv.a < *lo)) {
      iv.a = *lo;
      iv.a_closed = true;
    }
    if (hi && (!iv.b || *iv.b > *hi)) {
      iv.b = *hi;
      iv.b_closed = true;
    }
    if (iv.a && iv.b) {
      int c = cmp(*iv.a, *iv.b);
      if (c > 0) return;  // clipped away
      if (c == 0 && !(iv.a_closed && iv.b_closed)) return;  // empty open interval
    }
    ivs_.push_back(std::move(iv));
  }

  void canonicalize() {
    auto key_lt = [](const RealIv& x, const RealIv& y) {
      if (!x.a) return y.a.has_value();
      if (!y.a) return false;
      return *x.a < *y.a;
    };
    std::sort(ivs_.begin(), ivs_.end(), key_lt);
    std::vector<RealIv> merged;
    for (RealIv& iv : ivs_) {
      if (!merged.empty() && overlaps_or_touches(merged.back(), iv)) {
        RealIv& prev = merged.back();
        if (!iv.b) {
          prev.b.reset();
          prev.b_closed = false;
        } else if (prev.b && *iv.b >= *prev.b) {
          if (*iv.b > *prev.b || iv.b_closed) {
            prev.b = iv.b;
            prev.b_closed = iv.b_closed;
          }
        }
      } else {
        merged.push_back(std::move(iv));
      }
    }
    ivs_ = std::move(merged);
  }

  /// True when the union of two sorted intervals is itself an interval.
  static bool overlaps_or_touches(const RealIv& x, const RealIv& y) {
    if (!x.b || !y.a) return true;
    int c = cmp(*y.a, *x.b);
    if (c < 0) return true;
    if (c == 0) return x.b_closed || y.a_closed;
    return false;
  }

  SpacePtr space_;
  std::vector<bool> mask_;   // discrete
  std::vector<RealIv> ivs_;  // real
};

}  // namespace fptest

#endif  // FPTEST_OPEN_SET_HPP
