#ifndef FPTEST_POINT_HPP
#define FPTEST_POINT_HPP

#include <bit>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace fptest {

class Point;
using Tuple = std::vector<Point>;

/// A point of a sample space: a discrete point index, a real coordinate,
/// or a tuple of component points (for product spaces). Tuples are shared
/// so copying sampled points is cheap.
class Point {
 public:
  Point() : v_(0) {}
  explicit Point(int discrete_index) : v_(discrete_index) {}
  explicit Point(double x) : v_(x == 0.0 ? 0.0 : x) {}  // normalize -0.0
  explicit Point(Tuple parts) : v_(std::make_shared<const Tuple>(std::move(parts))) {}

  bool is_discrete() const { return std::holds_alternative<int>(v_); }
  bool is_real() const { return std::holds_alternative<double>(v_); }
  bool is_tuple() const { return std::holds_alternative<std::shared_ptr<const Tuple>>(v_); }

  int index() const { return std::get<int>(v_); }
  double real() const { return std::get<double>(v_); }
  const Tuple& tuple() const { return *std::get<std::shared_ptr<const Tuple>>(v_); }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.v_.index() != b.v_.index()) return false;
    if (a.is_discrete()) return a.index() == b.index();
    if (a.is_real()) return a.real() == b.real();
    const Tuple& ta = a.tuple();
    const Tuple& tb = b.tuple();
    if (ta.size() != tb.size()) return false;
    for (size_t i = 0; i < ta.size(); ++i)
      if (!(ta[i] == tb[i])) return false;
    return true;
  }

  size_t hash() const {
    if (is_discrete()) return std::hash<int>{}(index()) * 0x9e3779b97f4a7c15ull;
    if (is_real()) return std::hash<uint64_t>{}(std::bit_cast<uint64_t>(real()));
    size_t h = 0xcbf29ce484222325ull;
    for (const Point& p : tuple()) h = (h ^ p.hash()) * 0x100000001b3ull;
    return h;
  }

  std::string str() const {
    if (is_discrete()) return "#" + std::to_string(index());
    if (is_real()) {
      std::ostringstream os;
      os.precision(17);
      os << real();
      return os.str();
    }
    std::string s = "(";
    const Tuple& t = tuple();
    for (size_t i = 0; i < t.size(); ++i) {
      if (i) s += ",";
      s += t[i].str();
    }
    return s + ")";
  }

 private:
  std::variant<int, double, std::shared_ptr<const Tuple>> v_;
};

struct PointHash {
  size_t operator()(const Point& p) const { return p.hash(); }
};

}  // namespace fptest

#endif  // FPTEST_POINT_HPP
