#include "pscforge/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pscforge/errors.hpp"
#include "pscforge/parallel.hpp"

namespace pscforge::curvature {

namespace {

constexpr int kMinGrid = 64;
constexpr long kBlockSize = 4096;

const char* kind_name(smoothfn::PieceKind k) {
  switch (k) {
    case smoothfn::PieceKind::Sine: return "sine";
    case smoothfn::PieceKind::Constant: return "constant";
    default: return "blend";
  }
}

struct Sample {
  double t1 = 0.0;
  double t2 = 0.0;
  double value = 0.0;
  int region = 0;
};

// Block-ordered min reduction; independent of the worker count.
struct ScanAccumulator {
  double min_scalar = 0.0;
  std::array<double, 2> argmin{0.0, 0.0};
  bool any = false;
  long nonpositive = 0;
  long count = 0;
  std::vector<RegionStat> regions;

  void init_regions(const std::vector<std::string>& names) {
    regions.clear();
    for (const auto& n : names) {
      RegionStat r;
      r.name = n;
      regions.push_back(std::move(r));
    }
  }

  void take(const Sample& s) {
    if (!any || s.value < min_scalar) {
      min_scalar = s.value;
      argmin = {s.t1, s.t2};
      any = true;
    }
    if (s.value <= 0.0) ++nonpositive;
    ++count;
    auto& r = regions[static_cast<std::size_t>(s.region)];
    if (r.count == 0 || s.value < r.min_scalar) {
      r.min_scalar = s.value;
      r.argmin = {s.t1, s.t2};
    }
    if (s.value <= 0.0) ++r.nonpositive;
    ++r.count;
  }

  void merge(const ScanAccumulator& other) {
    if (other.any && (!any || other.min_scalar < min_scalar)) {
      min_scalar = other.min_scalar;
      argmin = other.argmin;
      any = true;
    }
    nonpositive += other.nonpositive;
    count += other.count;
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const auto& o = other.regions[i];
      if (o.count > 0 &&
          (regions[i].count == 0 || o.min_scalar < regions[i].min_scalar)) {
        regions[i].min_scalar = o.min_scalar;
        regions[i].argmin = o.argmin;
      }
      regions[i].nonpositive += o.nonpositive;
      regions[i].count += o.count;
    }
  }
};

PscReport finish(ScanAccumulator acc, GridSpec grid, int argmin_dims) {
  PscReport rep;
  rep.min_scalar = acc.min_scalar;
  rep.argmin = acc.argmin;
  rep.argmin_dims = argmin_dims;
  rep.nonpositive_count = acc.nonpositive;
  rep.sample_count = acc.count;
  rep.grid = grid;
  for (auto& r : acc.regions) {
    if (r.count > 0) rep.regions.push_back(std::move(r));
  }
  return rep;
}

std::vector<std::string> profile_region_names(const SmoothProfile& p,
                                              const char* prefix) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < p.pieces().size(); ++i) {
    names.push_back(std::string(prefix) + std::to_string(i) + ":" +
                    kind_name(p.pieces()[i].kind()));
  }
  return names;
}

}  // namespace

double scalar_single_warped(const SingleWarpedMetric& m, double t) {
  if (m.k < 1) throw DomainError("scalar_single_warped: k must be >= 1");
  if (m.k == 1) return 0.0;  // an interval carries no curvature
  const auto& p = m.profile;
  const double km1 = static_cast<double>(m.k - 1);
  const double km2 = static_cast<double>(m.k - 2);
  if (t == 0.0 && p.closure() == smoothfn::Closure::Disk) {
    // Smooth closure has rho''(0) = 0; the limit is -k(k-1) rho'''(0).
    return -static_cast<double>(m.k) * km1 * p.eval(0.0, 3);
  }
  if (t == p.domain_length() &&
      p.right_closure() == smoothfn::Closure::Disk) {
    // Mirrored closure at the right end: the limit is +k(k-1) rho'''(L).
    return static_cast<double>(m.k) * km1 * p.eval(p.domain_length(), 3);
  }
  const double rho = p.eval(t, 0);
  if (!(rho > 0.0))
    throw DegenerateMetricError("scalar_single_warped: rho <= 0 at t=" +
                                std::to_string(t));
  const double d1 = p.eval(t, 1);
  const double d2 = p.eval(t, 2);
  return -2.0 * km1 * d2 / rho + km1 * km2 * (1.0 - d1 * d1) / (rho * rho);
}

double scalar_doubly_warped(const DoublyWarpedMetric& m, double t) {
  if (m.p < 0 || m.q < 0)
    throw DomainError("scalar_doubly_warped: negative sphere dimension");
  double R = 0.0;
  double a = 1.0, a1 = 0.0;
  double b = 1.0, b1 = 0.0;
  if (m.p > 0) {
    a = m.a.eval(t, 0);
    if (!(a > 0.0))
      throw DegenerateMetricError("scalar_doubly_warped: a <= 0 at t=" +
                                  std::to_string(t));
    a1 = m.a.eval(t, 1);
    const double a2 = m.a.eval(t, 2);
    const double p = static_cast<double>(m.p);
    R += -2.0 * p * a2 / a + p * (p - 1.0) * (1.0 - a1 * a1) / (a * a);
  }
  if (m.q > 0) {
    b = m.b.eval(t, 0);
    if (!(b > 0.0))
      throw DegenerateMetricError("scalar_doubly_warped: b <= 0 at t=" +
                                  std::to_string(t));
    b1 = m.b.eval(t, 1);
    const double b2 = m.b.eval(t, 2);
    const double q = static_cast<double>(m.q);
    R += -2.0 * q * b2 / b + q * (q - 1.0) * (1.0 - b1 * b1) / (b * b);
  }
  if (m.p > 0 && m.q > 0) {
    R += -2.0 * static_cast<double>(m.p) * static_cast<double>(m.q) * a1 * b1 /
         (a * b);
  }
  return R;
}

double scalar_product(const ProductMetric& m, double t1, double t2) {
  return scalar_single_warped(m.f1, t1) + scalar_single_warped(m.f2, t2);
}

namespace {

// Sample stations for one single-warped factor: uniform including ends,
// with the disk-closed left end evaluated by the analytic center limit.
std::vector<double> factor_stations(const SingleWarpedMetric& m, int grid) {
  std::vector<double> ts;
  const double L = m.profile.domain_length();
  for (int i = 0; i <= grid; ++i)
    ts.push_back(L * static_cast<double>(i) / static_cast<double>(grid));
  if (m.profile.closure() != smoothfn::Closure::Disk &&
      !(m.profile.eval(0.0, 0) > 0.0)) {
    ts.erase(ts.begin());  // defensive; cylinder ends must be positive anyway
  }
  return ts;
}

}  // namespace

PscReport min_scan(const SingleWarpedMetric& m, int grid) {
  if (grid < kMinGrid) throw DomainError("min_scan: grid must be >= 64");
  const auto names = profile_region_names(m.profile, "piece");
  const auto stations = factor_stations(m, grid);
  const long n = static_cast<long>(stations.size());
  const long blocks = (n + kBlockSize - 1) / kBlockSize;

  std::vector<ScanAccumulator> acc(static_cast<std::size_t>(blocks));
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t bi) {
    auto& a = acc[bi];
    a.init_regions(names);
    const long lo = static_cast<long>(bi) * kBlockSize;
    const long hi = std::min(n, lo + kBlockSize);
    for (long i = lo; i < hi; ++i) {
      const double t = stations[static_cast<std::size_t>(i)];
      Sample s;
      s.t1 = t;
      s.value = scalar_single_warped(m, t);
      s.region = static_cast<int>(m.profile.piece_index(t));
      a.take(s);
    }
  });

  ScanAccumulator total;
  total.init_regions(names);
  for (const auto& a : acc) total.merge(a);
  return finish(std::move(total), GridSpec{grid, 1}, 1);
}

PscReport min_scan(const DoublyWarpedMetric& m, int grid) {
  if (grid < kMinGrid) throw DomainError("min_scan: grid must be >= 64");
  const double La = m.a.domain_length();
  if (std::abs(La - m.b.domain_length()) > 1e-12 * std::max(1.0, La))
    throw DomainError("min_scan: warped factors disagree on the domain");

  std::vector<std::string> names;
  for (std::size_t i = 0; i < m.a.pieces().size(); ++i) {
    for (std::size_t j = 0; j < m.b.pieces().size(); ++j) {
      names.push_back("a" + std::to_string(i) + ":" +
                      kind_name(m.a.pieces()[i].kind()) + "|b" +
                      std::to_string(j) + ":" +
                      kind_name(m.b.pieces()[j].kind()));
    }
  }
  const std::size_t bcount = m.b.pieces().size();

  const long n = grid - 1;  // interior stations only
  const long blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<ScanAccumulator> acc(static_cast<std::size_t>(blocks));
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t bi) {
    auto& a = acc[bi];
    a.init_regions(names);
    const long lo = static_cast<long>(bi) * kBlockSize;
    const long hi = std::min(n, lo + kBlockSize);
    for (long i = lo; i < hi; ++i) {
      const double t =
          La * static_cast<double>(i + 1) / static_cast<double>(grid);
      Sample s;
      s.t1 = t;
      s.value = scalar_doubly_warped(m, t);
      s.region = static_cast<int>(m.a.piece_index(t) * bcount +
                                  m.b.piece_index(t));
      a.take(s);
    }
  });

  ScanAccumulator total;
  total.init_regions(names);
  for (const auto& a : acc) total.merge(a);
  return finish(std::move(total), GridSpec{grid, 1}, 1);
}

PscReport min_scan(const ProductMetric& m, int grid) {
  if (grid < kMinGrid) throw DomainError("min_scan: grid must be >= 64");
  const auto s1 = factor_stations(m.f1, grid);
  const auto s2 = factor_stations(m.f2, grid);

  std::vector<std::string> names;
  for (std::size_t i = 0; i < m.f1.profile.pieces().size(); ++i) {
    for (std::size_t j = 0; j < m.f2.profile.pieces().size(); ++j) {
      names.push_back(std::string(kind_name(m.f1.profile.pieces()[i].kind())) +
                      "+" + kind_name(m.f2.profile.pieces()[j].kind()));
    }
  }
  const std::size_t pcount2 = m.f2.profile.pieces().size();

  // Factor values are independent; precompute then scan rows in parallel.
  std::vector<double> r1(s1.size()), r2(s2.size());
  std::vector<int> reg1(s1.size()), reg2(s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    r1[i] = scalar_single_warped(m.f1, s1[i]);
    reg1[i] = static_cast<int>(m.f1.profile.piece_index(s1[i]));
  }
  for (std::size_t j = 0; j < s2.size(); ++j) {
    r2[j] = scalar_single_warped(m.f2, s2[j]);
    reg2[j] = static_cast<int>(m.f2.profile.piece_index(s2[j]));
  }

  std::vector<ScanAccumulator> acc(s1.size());
  parallel_for(s1.size(), [&](std::size_t i) {
    auto& a = acc[i];
    a.init_regions(names);
    for (std::size_t j = 0; j < s2.size(); ++j) {
      Sample s;
      s.t1 = s1[i];
      s.t2 = s2[j];
      s.value = r1[i] + r2[j];
      s.region = static_cast<int>(static_cast<std::size_t>(reg1[i]) * pcount2 +
                                  static_cast<std::size_t>(reg2[j]));
      a.take(s);
    }
  });

  ScanAccumulator total;
  total.init_regions(names);
  for (const auto& a : acc) total.merge(a);
  return finish(std::move(total), GridSpec{grid, 2}, 2);
}

PscReport grid_scan_2d(const std::vector<double>& xs,
                       const std::vector<double>& ys,
                       const std::vector<std::string>& names,
                       const std::function<double(std::size_t, std::size_t)>& value,
                       const std::function<int(std::size_t, std::size_t)>& region,
                       GridSpec grid) {
  if (xs.empty() || ys.empty())
    throw DomainError("grid_scan_2d: empty station list");
  std::vector<ScanAccumulator> acc(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    auto& a = acc[i];
    a.init_regions(names);
    for (std::size_t j = 0; j < ys.size(); ++j) {
      Sample s;
      s.t1 = xs[i];
      s.t2 = ys[j];
      s.value = value(i, j);
      s.region = region(i, j);
      a.take(s);
    }
  });
  ScanAccumulator total;
  total.init_regions(names);
  for (const auto& a : acc) total.merge(a);
  return finish(std::move(total), grid, 2);
}

std::vector<std::array<double, 3>> scan_rows(const SingleWarpedMetric& m,
                                             int grid) {
  std::vector<std::array<double, 3>> rows;
  for (double t : factor_stations(m, grid))
    rows.push_back({t, scalar_single_warped(m, t), 0.0});
  return rows;
}

std::vector<std::array<double, 3>> scan_rows(const ProductMetric& m, int grid) {
  std::vector<std::array<double, 3>> rows;
  for (double t1 : factor_stations(m.f1, grid)) {
    const double v1 = scalar_single_warped(m.f1, t1);
    for (double t2 : factor_stations(m.f2, grid))
      rows.push_back({t1, t2, v1 + scalar_single_warped(m.f2, t2)});
  }
  return rows;
}

}  // namespace pscforge::curvature
