#ifndef FPTEST_TRANSPORT_HPP
#define FPTEST_TRANSPORT_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fptest {

/// Dense transportation simplex (northwest-corner start, MODI pricing,
/// Bland's rule against cycling). Solves
///
///   min sum_ij C_ij y_ij   s.t.  sum_j y_ij = a_i,  sum_i y_ij = b_j,  y >= 0
///
/// for balanced supplies/demands. Desk scale: a few hundred nodes.
class TransportSimplex {
 public:
  static double solve(const std::vector<std::vector<double>>& C, std::vector<double> a,
                      std::vector<double> b) {
    const size_t p = a.size(), q = b.size();
    if (p == 0 || q == 0) return 0.0;
    double sa = 0, sb = 0;
    for (double x : a) sa += x;
    for (double x : b) sb += x;
    if (std::abs(sa - sb) > 1e-9) throw std::invalid_argument("unbalanced transport instance");
    // absorb rounding residue into the largest demand
    size_t jmax = 0;
    for (size_t j = 0; j < q; ++j)
      if (b[j] > b[jmax]) jmax = j;
    b[jmax] += sa - sb;

    struct Arc {
      size_t i, j;
      double flow;
    };
    std::vector<Arc> basis;
    basis.reserve(p + q - 1);

    // northwest corner: p+q-1 basic arcs, zero-flow arcs kept on ties
    {
      std::vector<double> ra = a, rb = b;
      size_t i = 0, j = 0;
      while (basis.size() < p + q - 1) {
        double t = std::min(ra[i], rb[j]);
        basis.push_back({i, j, t});
        ra[i] -= t;
        rb[j] -= t;
        if (i + 1 < p && (ra[i] <= rb[j] || j + 1 >= q))
          ++i;
        else
          ++j;
      }
    }

    const size_t nodes = p + q;  // rows 0..p-1, columns p..p+q-1
    std::vector<double> u(p), v(q);
    std::vector<char> known_u(p), known_v(q);
    std::vector<std::vector<size_t>> adj(nodes);

    const double price_tol = 1e-11;
    const size_t max_pivots = 20000 * (p + q) + 1000;
    for (size_t pivot = 0;; ++pivot) {
      if (pivot > max_pivots)
        throw std::runtime_error("transport simplex failed to terminate (internal error)");

      // duals from the basis tree
      for (auto& x : adj) x.clear();
      for (size_t k = 0; k < basis.size(); ++k) {
        adj[basis[k].i].push_back(k);
        adj[p + basis[k].j].push_back(k);
      }
      std::fill(known_u.begin(), known_u.end(), 0);
      std::fill(known_v.begin(), known_v.end(), 0);
      u[0] = 0;
      known_u[0] = 1;
      std::vector<size_t> stack{0};
      while (!stack.empty()) {
        size_t node = stack.back();
        stack.pop_back();
        for (size_t k : adj[node]) {
          const Arc& arc = basis[k];
          if (node < p && !known_v[arc.j]) {
            v[arc.j] = C[arc.i][arc.j] - u[arc.i];
            known_v[arc.j] = 1;
            stack.push_back(p + arc.j);
          } else if (node >= p && !known_u[arc.i]) {
            u[arc.i] = C[arc.i][arc.j] - v[arc.j];
            known_u[arc.i] = 1;
            stack.push_back(arc.i);
          }
        }
      }

      // entering arc: first negative reduced cost in row-major order (Bland)
      size_t ei = p, ej = q;
      for (size_t i = 0; i < p && ei == p; ++i)
        for (size_t j = 0; j < q; ++j)
          if (C[i][j] - u[i] - v[j] < -price_tol) {
            ei = i;
            ej = j;
            break;
          }
      if (ei == p) break;  // optimal

      // unique tree path from row ei to column ej
      std::vector<size_t> parent_arc(nodes, SIZE_MAX);
      std::vector<size_t> parent(nodes, SIZE_MAX);
      std::vector<char> seen(nodes, 0);
      std::vector<size_t> bfs{ei};
      seen[ei] = 1;
      for (size_t head = 0; head < bfs.size(); ++head) {
        size_t node = bfs[head];
        for (size_t k : adj[node]) {
          size_t other = node < p ? p + basis[k].j : basis[k].i;
          if (!seen[other]) {
            seen[other] = 1;
            parent[other] = node;
            parent_arc[other] = k;
            bfs.push_back(other);
          }
        }
      }
      if (!seen[p + ej]) throw std::runtime_error("basis not a spanning tree (internal error)");

      // walk the cycle; arcs at odd positions lose flow
      std::vector<size_t> cycle;  // arc indices, from the column end back to ei
      for (size_t node = p + ej; node != ei; node = parent[node]) cycle.push_back(parent_arc[node]);
      // cycle order from entering arc: entering(+), cycle.back()(-), ...(+/-)...
      double theta = std::numeric_limits<double>::infinity();
      size_t leave = SIZE_MAX;
      for (size_t pos = 0; pos < cycle.size(); ++pos) {
        size_t k = cycle[cycle.size() - 1 - pos];
        if (pos % 2 == 0) {  // minus side
          const Arc& arc = basis[k];
          if (arc.flow < theta - 1e-15 ||
              (std::abs(arc.flow - theta) <= 1e-15 &&
               (leave == SIZE_MAX || arc.i < basis[leave].i ||
                (arc.i == basis[leave].i && arc.j < basis[leave].j)))) {
            theta = arc.flow;
            leave = k;
          }
        }
      }
      if (leave == SIZE_MAX) throw std::runtime_error("no leaving arc (internal error)");

      for (size_t pos = 0; pos < cycle.size(); ++pos) {
        size_t k = cycle[cycle.size() - 1 - pos];
        basis[k].flow += (pos % 2 == 0) ? -theta : theta;
        if (basis[k].flow < 0) basis[k].flow = 0;
      }
      basis[leave] = {ei, ej, theta};
    }

    double value = 0;
    for (const Arc& arc : basis) value += arc.flow * C[arc.i][arc.j];
    return value;
  }
};

/// Optimal value of the bounded-Lipschitz linear program
///
///   max { sum_i c_i f_i : |f_i| <= 1, |f_i - f_j| <= d_ij }
///
/// for sum c_i = 0 and d a metric. By LP duality this equals the cost of the
/// balanced transportation problem between the positive and negative parts
/// of c with unit cost min(2, d_ij): mass either moves, or is destroyed and
/// recreated at total cost 2.
inline double flat_metric_lp(const std::vector<std::vector<double>>& dist,
                             const std::vector<double>& diff) {
  size_t m = diff.size();
  if (m == 0) throw std::invalid_argument("empty transport instance");
  if (dist.size() != m) throw std::invalid_argument("distance matrix size mismatch");
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < m; ++i) {
    if (diff[i] > 1e-15) pos.push_back(i);
    if (diff[i] < -1e-15) neg.push_back(i);
  }
  if (pos.empty() || neg.empty()) return 0.0;
  std::vector<double> a(pos.size()), b(neg.size());
  for (size_t i = 0; i < pos.size(); ++i) a[i] = diff[pos[i]];
  for (size_t j = 0; j < neg.size(); ++j) b[j] = -diff[neg[j]];
  std::vector<std::vector<double>> C(pos.size(), std::vector<double>(neg.size()));
  for (size_t i = 0; i < pos.size(); ++i)
    for (size_t j = 0; j < neg.size(); ++j) C[i][j] = std::min(2.0, dist[pos[i]][neg[j]]);
  return TransportSimplex::solve(C, std::move(a), std::move(b));
}

}  // namespace fptest

#endif  // FPTEST_TRANSPORT_HPP
