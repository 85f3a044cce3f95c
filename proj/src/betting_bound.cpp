#include "predrisk/betting_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "predrisk/errors.hpp"
#include "predrisk/rng.hpp"
#include "predrisk/stats.hpp"

namespace predrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t collection_dim(const EventCollection& collection, const char* who) {
  if (collection.sets.empty()) throw ValidationError(std::string(who) + ": empty collection");
  const std::size_t n = collection.sets.front().sides.size();
  for (const Box& box : collection.sets)
    if (box.sides.size() != n)
      throw ValidationError(std::string(who) + ": boxes have mixed dimensions");
  return n;
}

void check_gaussian_dim(const DiagonalGaussian& g, std::size_t n, const char* who) {
  if (g.mean.size() != n)
    throw ValidationError(std::string(who) + ": density dimension differs from the events");
}

// Standard-normal probability of [a, b] in z units, switching tails so the
// smaller one is computed by the survival function.
double prob_z(double a, double b) {
  if (!(a <= b)) return 0.0;
  double p = 0.0;
  if (a >= 0.0)
    p = normal_sf(a) - normal_sf(b);
  else
    p = normal_cdf(b) - normal_cdf(a);
  return std::max(0.0, p);
}

double pdf_z(double z) { return std::isinf(z) ? 0.0 : normal_pdf(z); }
double zpdf_z(double z) { return std::isinf(z) ? 0.0 : z * normal_pdf(z); }

struct Trunc {
  double t0 = 0.0;  // mass
  double t1 = 0.0;  // first standardized moment
  double t2 = 0.0;  // second standardized moment
};

Trunc trunc_moments(double mu, double sd, const Interval& side) {
  const double a = (side.lo - mu) / sd;
  const double b = (side.hi - mu) / sd;
  Trunc t;
  t.t0 = prob_z(a, b);
  t.t1 = pdf_z(a) - pdf_z(b);
  t.t2 = t.t0 + zpdf_z(a) - zpdf_z(b);
  return t;
}

double quantized_term(double p, double q) {
  if (p <= 0.0) return 0.0;
  if (q <= 0.0) return kInf;
  return p * std::log(p / q);
}

struct Cell {
  Box box;
  int kappa = 0;
};

bool contains(const Box& box, const std::vector<double>& x) {
  for (std::size_t d = 0; d < box.sides.size(); ++d)
    if (x[d] < box.sides[d].lo || x[d] > box.sides[d].hi) return false;
  return true;
}

double midpoint(const Interval& side) {
  const bool lo_inf = std::isinf(side.lo);
  const bool hi_inf = std::isinf(side.hi);
  if (lo_inf && hi_inf) return 0.0;
  if (lo_inf) return side.hi - 1.0;
  if (hi_inf) return side.lo + 1.0;
  return 0.5 * (side.lo + side.hi);
}

// All cells of the coordinate-cut arrangement, kappa = number of events
// whose interior contains the cell midpoint. Cells partition the space.
std::vector<Cell> build_arrangement(const EventCollection& collection, const char* who) {
  const std::size_t n = collection_dim(collection, who);
  if (n > 3)
    throw ValidationError(std::string(who) + ": arrangements support dimensions 1 to 3");
  std::vector<std::vector<Interval>> edges(n);
  for (std::size_t d = 0; d < n; ++d) {
    std::vector<double> cuts;
    for (const Box& box : collection.sets) {
      if (std::isfinite(box.sides[d].lo)) cuts.push_back(box.sides[d].lo);
      if (std::isfinite(box.sides[d].hi)) cuts.push_back(box.sides[d].hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double lo = -kInf;
    for (const double c : cuts) {
      edges[d].push_back({lo, c});
      lo = c;
    }
    edges[d].push_back({lo, kInf});
  }

  std::vector<Cell> cells;
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> mid(n);
  while (true) {
    Cell cell;
    cell.box.sides.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
      cell.box.sides[d] = edges[d][idx[d]];
      mid[d] = midpoint(cell.box.sides[d]);
    }
    for (const Box& box : collection.sets)
      if (contains(box, mid)) ++cell.kappa;
    cells.push_back(std::move(cell));

    std::size_t d = 0;
    while (d < n && ++idx[d] == edges[d].size()) idx[d++] = 0;
    if (d == n) break;
  }
  return cells;
}

int max_kappa(const std::vector<Cell>& cells, const char* who) {
  int c = 0;
  for (const Cell& cell : cells) c = std::max(c, cell.kappa);
  if (c < 1) throw ValidationError(std::string(who) + ": no event has interior volume");
  return c;
}

void check_exhaustive(const EventCollection& collection, const std::vector<Cell>& cells,
                      const char* who) {
  if (!collection.exhaustive) return;
  for (const Cell& cell : cells)
    if (cell.kappa == 0)
      throw ValidationError(std::string(who) +
                            ": collection marked exhaustive but does not cover the space");
}

// Exact integral of p log(p/q) over a box: the log ratio is a sum of
// per-coordinate quadratics, so truncated Gaussian moments suffice.
double cell_kl_integral(const DiagonalGaussian& p, const DiagonalGaussian& q, const Box& box) {
  const std::size_t n = p.mean.size();
  std::vector<Trunc> t(n);
  double mass = 1.0;
  for (std::size_t d = 0; d < n; ++d) {
    t[d] = trunc_moments(p.mean[d], p.sd[d], box.sides[d]);
    mass *= t[d].t0;
  }
  if (mass <= 0.0) return 0.0;
  double total = 0.0;
  for (std::size_t d = 0; d < n; ++d) {
    const double sp = p.sd[d];
    const double sq = q.sd[d];
    const double delta = p.mean[d] - q.mean[d];
    const double integral = std::log(sq / sp) * t[d].t0 +
                            (sp * sp * t[d].t2 + 2.0 * sp * delta * t[d].t1 +
                             delta * delta * t[d].t0) /
                                (2.0 * sq * sq) -
                            0.5 * t[d].t2;
    total += (mass / t[d].t0) * integral;
  }
  return total;
}

}  // namespace

Interval make_interval(double lo, double hi) {
  if (!(lo <= hi)) throw ValidationError("make_interval: requires lo <= hi");
  return {lo, hi};
}

Box make_box(std::vector<Interval> sides) {
  if (sides.empty()) throw ValidationError("make_box: needs at least one coordinate");
  for (const Interval& side : sides)
    if (!(side.lo <= side.hi)) throw ValidationError("make_box: requires lo <= hi per side");
  Box box;
  box.sides = std::move(sides);
  return box;
}

EventCollection make_collection(std::vector<Box> sets, bool exhaustive) {
  EventCollection collection;
  collection.sets = std::move(sets);
  collection.exhaustive = exhaustive;
  collection_dim(collection, "make_collection");
  return collection;
}

DiagonalGaussian make_diagonal_gaussian(std::vector<double> mean, std::vector<double> sd) {
  if (mean.empty() || mean.size() != sd.size())
    throw ValidationError("make_diagonal_gaussian: mean and sd must have equal nonzero length");
  for (const double m : mean)
    if (!std::isfinite(m)) throw ValidationError("make_diagonal_gaussian: means must be finite");
  for (const double s : sd)
    if (!(s > 0.0) || !std::isfinite(s))
      throw ValidationError("make_diagonal_gaussian: sds must be positive and finite");
  DiagonalGaussian g;
  g.mean = std::move(mean);
  g.sd = std::move(sd);
  return g;
}

double box_probability(const DiagonalGaussian& g, const Box& box) {
  if (box.sides.size() != g.mean.size())
    throw ValidationError("box_probability: dimension mismatch");
  double p = 1.0;
  for (std::size_t d = 0; d < box.sides.size(); ++d) {
    const double a = (box.sides[d].lo - g.mean[d]) / g.sd[d];
    const double b = (box.sides[d].hi - g.mean[d]) / g.sd[d];
    p *= prob_z(a, b);
  }
  return p;
}

double gaussian_kl(const DiagonalGaussian& p, const DiagonalGaussian& q) {
  if (p.mean.size() != q.mean.size()) throw ValidationError("gaussian_kl: dimension mismatch");
  double kl = 0.0;
  for (std::size_t d = 0; d < p.mean.size(); ++d) {
    const double delta = p.mean[d] - q.mean[d];
    const double vq = q.sd[d] * q.sd[d];
    kl += std::log(q.sd[d] / p.sd[d]) + (p.sd[d] * p.sd[d] + delta * delta) / (2.0 * vq) - 0.5;
  }
  return kl;
}

DisjointRefinement refine(const EventCollection& collection) {
  const std::vector<Cell> cells = build_arrangement(collection, "refine");
  check_exhaustive(collection, cells, "refine");
  DisjointRefinement out;
  out.c = max_kappa(cells, "refine");
  for (const Cell& cell : cells) {
    if (cell.kappa == 0) continue;
    out.atoms.push_back(cell.box);
    out.kappa.push_back(cell.kappa);
  }
  return out;
}

double quantized_divergence(const EventCollection& collection, const DiagonalGaussian& p,
                            const DiagonalGaussian& q) {
  const std::size_t n = collection_dim(collection, "quantized_divergence");
  check_gaussian_dim(p, n, "quantized_divergence");
  check_gaussian_dim(q, n, "quantized_divergence");
  double sum = 0.0;
  for (const Box& box : collection.sets)
    sum += quantized_term(box_probability(p, box), box_probability(q, box));
  return sum;
}

BettingCheck check_betting_bound(const EventCollection& collection, const DiagonalGaussian& p,
                                 const DiagonalGaussian& q) {
  const std::size_t n = collection_dim(collection, "check_betting_bound");
  check_gaussian_dim(p, n, "check_betting_bound");
  check_gaussian_dim(q, n, "check_betting_bound");
  const std::vector<Cell> cells = build_arrangement(collection, "check_betting_bound");
  check_exhaustive(collection, cells, "check_betting_bound");

  BettingCheck out;
  out.c = max_kappa(cells, "check_betting_bound");
  out.lhs = quantized_divergence(collection, p, q);
  for (const Cell& cell : cells)
    if (cell.kappa == 0)
      out.lhs += quantized_term(box_probability(p, cell.box), box_probability(q, cell.box));
  out.kl = gaussian_kl(p, q);
  out.satisfied = out.lhs <= out.c * out.kl + 1e-9;
  return out;
}

TiltReport tilt_identity_check(const EventCollection& collection, const DiagonalGaussian& p,
                               const DiagonalGaussian& q) {
  const std::size_t n = collection_dim(collection, "tilt_identity_check");
  check_gaussian_dim(p, n, "tilt_identity_check");
  check_gaussian_dim(q, n, "tilt_identity_check");
  const std::vector<Cell> cells = build_arrangement(collection, "tilt_identity_check");
  check_exhaustive(collection, cells, "tilt_identity_check");
  const int c = max_kappa(cells, "tilt_identity_check");

  TiltReport out;
  for (const Cell& cell : cells) {
    const double w = static_cast<double>(cell.kappa) / c;
    const double integral = cell_kl_integral(p, q, cell.box);
    out.tilted += w * integral;
    out.partition_kl += integral;
    out.identity_rhs -= (1.0 - w) * integral;
    out.leftover_p += (1.0 - w) * box_probability(p, cell.box);
    out.leftover_q += (1.0 - w) * box_probability(q, cell.box);
  }
  out.plain = gaussian_kl(p, q);
  out.gap = out.tilted - out.plain;
  out.jensen_rhs = out.leftover_q > 0.0 ? std::log(out.leftover_q) : -kInf;
  out.gap_nonpositive = out.gap <= 1e-9;
  return out;
}

std::vector<BettingCorpusEntry> make_betting_corpus(int count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("make_betting_corpus: count must be >= 1");
  std::vector<BettingCorpusEntry> corpus;
  corpus.reserve(count);
  RngStream rng(seed, 0);
  for (int entry = 0; entry < count; ++entry) {
    const std::size_t n = (entry % 2) + 1;

    std::vector<std::vector<Interval>> edges(n);
    for (std::size_t d = 0; d < n; ++d) {
      const int m = 1 + static_cast<int>(rng.next_u64() % 3);
      std::vector<double> cuts;
      for (int i = 0; i < m; ++i) cuts.push_back(-2.5 + 5.0 * rng.next_u01());
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      double lo = -kInf;
      for (const double cut : cuts) {
        edges[d].push_back({lo, cut});
        lo = cut;
      }
      edges[d].push_back({lo, kInf});
    }

    std::vector<Box> sets;
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      Box box;
      box.sides.resize(n);
      for (std::size_t d = 0; d < n; ++d) box.sides[d] = edges[d][idx[d]];
      sets.push_back(std::move(box));
      std::size_t d = 0;
      while (d < n && ++idx[d] == edges[d].size()) idx[d++] = 0;
      if (d == n) break;
    }

    const int extras = 1 + static_cast<int>(rng.next_u64() % 2);
    for (int e = 0; e < extras; ++e) {
      Box box;
      box.sides.resize(n);
      for (std::size_t d = 0; d < n; ++d) {
        double a = -3.0 + 6.0 * rng.next_u01();
        double b = -3.0 + 6.0 * rng.next_u01();
        if (a > b) std::swap(a, b);
        if (rng.next_u01() < 0.25) a = -kInf;
        if (rng.next_u01() < 0.25) b = kInf;
        box.sides[d] = {a, b};
      }
      sets.push_back(std::move(box));
    }

    std::vector<double> mp(n), mq(n), sp(n), sq(n);
    for (std::size_t d = 0; d < n; ++d) {
      mp[d] = -1.5 + 3.0 * rng.next_u01();
      const double gap = 1.5 + 1.0 * rng.next_u01();
      mq[d] = mp[d] + ((rng.next_u64() & 1) ? gap : -gap);
      sp[d] = 0.8 + 0.6 * rng.next_u01();
      sq[d] = 0.8 + 0.6 * rng.next_u01();
    }

    BettingCorpusEntry item;
    item.collection = make_collection(std::move(sets), true);
    item.p = make_diagonal_gaussian(std::move(mp), std::move(sp));
    item.q = make_diagonal_gaussian(std::move(mq), std::move(sq));
    corpus.push_back(std::move(item));
  }
  return corpus;
}

std::string betting_report_json(std::span<const BettingCheck> checks) {
  nlohmann::json rows = nlohmann::json::array();
  for (const BettingCheck& check : checks) {
    nlohmann::json row;
    if (std::isfinite(check.lhs))
      row["lhs"] = check.lhs;
    else
      row["lhs"] = "infinity";
    row["c"] = check.c;
    row["kl"] = check.kl;
    row["satisfied"] = check.satisfied;
    rows.push_back(std::move(row));
  }
  return rows.dump(2);
}

}  // namespace predrisk
