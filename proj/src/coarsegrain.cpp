#include "fklab/coarsegrain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fklab {

int isqrt(int K) {
  int r = static_cast<int>(std::sqrt(static_cast<double>(K)));
  while (r * r > K) --r;
  while ((r + 1) * (r + 1) <= K) ++r;
  return r;
}

int small_block_side(int K, int dim) {
  auto pow_le = [&](int m) {
    long long v = 1;
    for (int i = 0; i < 2 * dim; ++i) {
      v *= m;
      if (v > K) return false;
    }
    return true;
  };
  int m = 1;
  while (pow_le(m + 1)) ++m;
  return m;
}

void validate_block_size(int K, int dim) {
  if (K <= 0 || K % 2 != 0) throw std::invalid_argument("block size K must be even and positive (got " + std::to_string(K) + ")");
  const int r = isqrt(K);
  if (r * r != K) throw std::invalid_argument("block size K must be a perfect square (got " + std::to_string(K) + ")");
  if (r < 4) throw std::invalid_argument("block size K needs sqrt(K) >= 4 (got " + std::to_string(K) + ")");
  if (small_block_side(K, dim) < 2) {
    throw std::invalid_argument("block size K needs floor(K^(1/2d)) >= 2 (got K=" + std::to_string(K) +
                                ", d=" + std::to_string(dim) + ")");
  }
}

BlockLayout::BlockLayout(int dim, int K, int grid_half_side) : d_(dim), K_(K), W_(grid_half_side) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("BlockLayout: dimension out of range");
  validate_block_size(K, dim);
  if (W_ < K_ / 2 || (W_ - K_ / 2) % K_ != 0) {
    throw std::invalid_argument("BlockLayout: grid half-side must be congruent to K/2 mod K (got W=" + std::to_string(W_) + ")");
  }
  sqrt_k_ = isqrt(K_);
  m_ = small_block_side(K_, d_);
  n_ = 2 * W_ / K_;
  total_ = 1;
  for (int a = 0; a < d_; ++a) total_ *= static_cast<std::size_t>(n_);
}

std::array<int, kMaxDim> BlockLayout::coords(std::size_t b) const {
  std::array<int, kMaxDim> c{};
  for (int a = d_ - 1; a >= 0; --a) {
    c[static_cast<std::size_t>(a)] = static_cast<int>(b % static_cast<std::size_t>(n_));
    b /= static_cast<std::size_t>(n_);
  }
  return c;
}

std::size_t BlockLayout::index(const std::array<int, kMaxDim>& c) const {
  std::size_t b = 0;
  for (int a = 0; a < d_; ++a) b = b * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c[static_cast<std::size_t>(a)]);
  return b;
}

Site BlockLayout::center(std::size_t b) const {
  const auto c = coords(b);
  Site s(d_);
  for (int a = 0; a < d_; ++a) s[a] = -W_ + K_ / 2 + c[static_cast<std::size_t>(a)] * K_;
  return s;
}

std::optional<std::size_t> BlockLayout::block_of(const Site& s) const {
  std::array<int, kMaxDim> c{};
  for (int a = 0; a < d_; ++a) {
    const int off = s[a] + W_ - 1;  // 0 for the lowest grid site
    if (off < 0 || off >= n_ * K_) return std::nullopt;
    c[static_cast<std::size_t>(a)] = off / K_;
  }
  return index(c);
}

bool BlockLayout::on_frame(std::size_t b) const {
  const auto c = coords(b);
  for (int a = 0; a < d_; ++a)
    if (c[static_cast<std::size_t>(a)] == 0 || c[static_cast<std::size_t>(a)] == n_ - 1) return true;
  return false;
}

bool BlockLayout::meets_box(std::size_t b, int E) const {
  if (E <= 0) return false;
  const Site x = center(b);
  for (int a = 0; a < d_; ++a) {
    const int lo = x[a] - K_ / 2 + 1, hi = x[a] + K_ / 2;
    if (hi < -E + 1 || lo > E) return false;
  }
  return true;
}

std::vector<std::size_t> BlockLayout::face_neighbors(std::size_t b) const {
  std::vector<std::size_t> out;
  const auto c = coords(b);
  for (int a = 0; a < d_; ++a) {
    for (int s : {-1, 1}) {
      auto n = c;
      n[static_cast<std::size_t>(a)] += s;
      if (n[static_cast<std::size_t>(a)] < 0 || n[static_cast<std::size_t>(a)] >= n_) continue;
      out.push_back(index(n));
    }
  }
  return out;
}

std::vector<std::size_t> BlockLayout::star_neighbors(std::size_t b) const {
  std::vector<std::size_t> out;
  const auto c = coords(b);
  int span = 1;
  for (int a = 0; a < d_; ++a) span *= 3;
  for (int t = 0; t < span; ++t) {
    auto n = c;
    int r = t;
    bool zero = true, inside = true;
    for (int a = 0; a < d_; ++a) {
      const int o = r % 3 - 1;
      r /= 3;
      if (o != 0) zero = false;
      n[static_cast<std::size_t>(a)] += o;
      if (n[static_cast<std::size_t>(a)] < 0 || n[static_cast<std::size_t>(a)] >= n_) inside = false;
    }
    if (!zero && inside) out.push_back(index(n));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Clusters of omega restricted to the bonds inside a cube lo + {0..side-1}^d.
struct CubeClusters {
  int d = 0, side = 0;
  std::size_t volume = 0;
  UnionFind uf;
  std::vector<std::uint32_t> global;  // local -> window site

  void build(const Lattice& lat, const BondConfig& omega, const Site& lo, int side_) {
    d = lat.box().dim();
    side = side_;
    volume = 1;
    for (int a = 0; a < d; ++a) volume *= static_cast<std::size_t>(side);
    uf.reset(volume);
    global.resize(volume);
    const Box& box = lat.box();
    const auto pos = lat.kernel().positive_support();
    for (std::size_t i = 0; i < volume; ++i) {
      const Site s = lo + local(i);
      if (!box.contains(s)) throw std::invalid_argument("coarse graining: block leaves the sampled window");
      global[i] = static_cast<std::uint32_t>(box.index_of(s));
    }
    for (std::size_t i = 0; i < volume; ++i) {
      const Site li = local(i);
      for (std::size_t k = 0; k < pos.size(); ++k) {
        const Site lj = li + pos[k].displacement;
        if (!inside(lj)) continue;
        const std::int32_t e = lat.bond_from(global[i], k);
        if (e >= 0 && omega.test(static_cast<std::size_t>(e))) uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(index(lj)));
      }
    }
  }

  Site local(std::size_t i) const {
    Site s(d);
    for (int a = d - 1; a >= 0; --a) {
      s[a] = static_cast<std::int32_t>(i % static_cast<std::size_t>(side));
      i /= static_cast<std::size_t>(side);
    }
    return s;
  }
  bool inside(const Site& s) const {
    for (int a = 0; a < d; ++a)
      if (s[a] < 0 || s[a] >= side) return false;
    return true;
  }
  std::size_t index(const Site& s) const {
    std::size_t i = 0;
    for (int a = 0; a < d; ++a) i = i * static_cast<std::size_t>(side) + static_cast<std::size_t>(s[a]);
    return i;
  }

  struct Info {
    std::uint32_t faces = 0;
    std::uint32_t size = 0;
    std::array<int, kMaxDim> lo{}, hi{};
  };

  std::vector<Info> infos(std::vector<std::uint32_t>& roots) {
    std::vector<Info> info(volume);
    roots.resize(volume);
    for (auto& in : info) {
      in.lo.fill(std::numeric_limits<int>::max());
      in.hi.fill(std::numeric_limits<int>::min());
    }
    for (std::size_t i = 0; i < volume; ++i) {
      const auto r = uf.find(static_cast<std::uint32_t>(i));
      roots[i] = r;
      const Site s = local(i);
      auto& in = info[r];
      ++in.size;
      for (int a = 0; a < d; ++a) {
        const auto A = static_cast<std::size_t>(a);
        in.lo[A] = std::min(in.lo[A], s[a]);
        in.hi[A] = std::max(in.hi[A], s[a]);
        if (s[a] == 0) in.faces |= 1u << (2 * a);
        if (s[a] == side - 1) in.faces |= 1u << (2 * a + 1);
      }
    }
    return info;
  }
};

// Cube B_n(z) = z + {-(n-1)/2, ..., n/2}^d (the usual {-n/2+1, ..., n/2}^d for even n).
Site cube_low(const Site& z, int n) {
  Site lo = z;
  for (int a = 0; a < z.dim; ++a) lo[a] -= (n - 1) / 2;
  return lo;
}

bool cube_crossed_along(const Lattice& lat, const BondConfig& omega, const Site& z, int n, int axis) {
  CubeClusters cc;
  cc.build(lat, omega, cube_low(z, n), n);
  std::vector<std::uint32_t> roots;
  const auto info = cc.infos(roots);
  const std::uint32_t want = 3u << (2 * axis);
  for (std::size_t i = 0; i < cc.volume; ++i)
    if (roots[i] == i && (info[i].faces & want) == want) return true;
  return false;
}

}  // namespace

BlockVerdict classify_block(const Lattice& window, const BondConfig& omega, const BlockLayout& layout, std::size_t b) {
  if (window.box().dim() != layout.dim()) throw std::invalid_argument("classify_block: dimension mismatch");
  if (window.box().half_side() < layout.lattice_half_side()) {
    throw std::invalid_argument("classify_block: sampled window is smaller than the block layout needs");
  }
  if (omega.size() != window.num_interior()) throw std::invalid_argument("classify_block: configuration length mismatch");
  if (b >= layout.num_blocks()) throw std::out_of_range("classify_block: block index");
  const int d = layout.dim();
  const int K = layout.K();
  const Site x = layout.center(b);
  BlockVerdict v;

  CubeClusters cc;
  cc.build(window, omega, cube_low(x, K), K);
  std::vector<std::uint32_t> roots;
  const auto info = cc.infos(roots);
  const std::uint32_t all_faces = (1u << (2 * d)) - 1;
  std::int64_t star = -1;
  for (std::size_t i = 0; i < cc.volume; ++i) {
    if (roots[i] != i || info[i].faces != all_faces) continue;
    if (star < 0 || info[i].size > info[static_cast<std::size_t>(star)].size) star = static_cast<std::int64_t>(i);
  }
  v.crossing = star >= 0;
  if (v.crossing) v.representative = cc.global[static_cast<std::size_t>(star)];

  // Condition 2 in integers: diameter <= sqrt(K)/10  <=>  10 * diameter <= sqrt(K).
  v.small_others = true;
  for (std::size_t i = 0; i < cc.volume && v.small_others; ++i) {
    if (roots[i] != i || static_cast<std::int64_t>(i) == star) continue;
    int diam = 0;
    for (int a = 0; a < d; ++a) diam = std::max(diam, info[i].hi[static_cast<std::size_t>(a)] - info[i].lo[static_cast<std::size_t>(a)]);
    if (10 * diam > layout.sqrt_K()) v.small_others = false;
  }

  v.face_crossings = true;
  for (int a = 0; a < d && v.face_crossings; ++a) {
    for (int s : {-1, 1}) {
      Site z = x;
      z[a] += s * K / 2;
      if (!cube_crossed_along(window, omega, z, layout.sqrt_K(), a)) {
        v.face_crossings = false;
        break;
      }
    }
  }

  const int m = layout.small_side();
  const Site lo = cube_low(x, m);
  const auto pos = window.kernel().positive_support();
  CubeClusters shape;
  shape.d = d;
  shape.side = m;
  std::size_t vol = 1;
  for (int a = 0; a < d; ++a) vol *= static_cast<std::size_t>(m);
  v.closed_bond = false;
  for (std::size_t i = 0; i < vol && !v.closed_bond; ++i) {
    const Site li = shape.local(i);
    const auto gi = window.box().index_of(lo + li);
    for (std::size_t k = 0; k < pos.size(); ++k) {
      if (!shape.inside(li + pos[k].displacement)) continue;
      const std::int32_t e = window.bond_from(gi, k);
      if (e >= 0 && !omega.test(static_cast<std::size_t>(e))) {
        v.closed_bond = true;
        break;
      }
    }
  }
  return v;
}

BlockGrid::BlockGrid(BlockLayout layout, std::vector<BlockVerdict> verdicts)
    : layout_(std::move(layout)), verdicts_(std::move(verdicts)) {
  u_.resize(layout_.num_blocks());
  if (!verdicts_.empty()) {
    if (verdicts_.size() != u_.size()) throw std::invalid_argument("BlockGrid: verdict count mismatch");
    for (std::size_t b = 0; b < u_.size(); ++b) u_[b] = verdicts_[b].good() ? 1 : 0;
  }
}

double BlockGrid::good_fraction() const {
  std::size_t g = 0;
  for (auto u : u_) g += u;
  return u_.empty() ? 0.0 : static_cast<double>(g) / static_cast<double>(u_.size());
}

std::string BlockGrid::dump() const {
  std::string out;
  const int n = layout_.per_axis();
  const std::size_t row = layout_.dim() >= 2 ? static_cast<std::size_t>(n) : u_.size();
  const std::size_t slice = layout_.dim() >= 2 ? row * static_cast<std::size_t>(n) : u_.size();
  for (std::size_t b = 0; b < u_.size(); ++b) {
    out += u_[b] ? 'G' : 'B';
    if ((b + 1) % row == 0) out += '\n';
    if ((b + 1) % slice == 0 && b + 1 < u_.size()) out += '\n';
  }
  return out;
}

BlockGrid classify_grid(const Lattice& window, const BondConfig& omega, const BlockLayout& layout, Exec exec) {
  std::vector<BlockVerdict> v(layout.num_blocks());
  const auto nb = static_cast<std::int64_t>(v.size());
  if (exec == Exec::kParallel) {
    std::string error;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t b = 0; b < nb; ++b) {
      try {
        v[static_cast<std::size_t>(b)] = classify_block(window, omega, layout, static_cast<std::size_t>(b));
      } catch (const std::exception& ex) {
#pragma omp critical
        error = ex.what();
      }
    }
    if (!error.empty()) throw std::invalid_argument(error);
  } else {
    for (std::int64_t b = 0; b < nb; ++b)
      v[static_cast<std::size_t>(b)] = classify_block(window, omega, layout, static_cast<std::size_t>(b));
  }
  return BlockGrid(layout, std::move(v));
}

BlockGrid grid_from_states(const BlockLayout& layout, const std::vector<std::uint8_t>& u) {
  if (u.size() != layout.num_blocks()) throw std::invalid_argument("grid_from_states: wrong number of blocks");
  BlockGrid g(layout, {});
  for (std::size_t b = 0; b < u.size(); ++b) g.set_state(b, u[b] != 0);
  return g;
}

std::size_t adjacency_gluing_check(const BlockGrid& grid, const ClusterPartition& clusters, GluingScope scope) {
  const auto& v = grid.verdicts();
  if (v.empty()) throw std::invalid_argument("adjacency_gluing_check: grid carries no verdicts");
  auto ok = [&](std::size_t b) {
    return scope == GluingScope::kGood ? v[b].good() : v[b].good_without_closed_bond();
  };
  std::size_t bad = 0;
  for (std::size_t b = 0; b < v.size(); ++b) {
    if (!ok(b)) continue;
    for (auto nb : grid.layout().face_neighbors(b)) {
      if (nb < b || !ok(nb)) continue;
      if (!clusters.connected(static_cast<std::uint32_t>(v[b].representative), static_cast<std::uint32_t>(v[nb].representative)))
        ++bad;
    }
  }
  return bad;
}

PeierlsAccumulator::PeierlsAccumulator(int dim, std::size_t min_samples)
    : d_(dim), min_samples_(min_samples), tally_(std::size_t{1} << (2 * dim)) {}

void PeierlsAccumulator::add(const BlockGrid& grid) {
  const auto& L = grid.layout();
  if (L.dim() != d_) throw std::invalid_argument("PeierlsAccumulator: dimension mismatch");
  std::vector<std::uint64_t> n(tally_.size(), 0), bad(tally_.size(), 0);
  for (std::size_t b = 0; b < L.num_blocks(); ++b) {
    const auto c = L.coords(b);
    std::uint32_t eta = 0;
    bool interior = true;
    for (int a = 0; a < d_ && interior; ++a) {
      for (int s = 0; s < 2; ++s) {
        auto nc = c;
        nc[static_cast<std::size_t>(a)] += s ? 1 : -1;
        if (nc[static_cast<std::size_t>(a)] < 0 || nc[static_cast<std::size_t>(a)] >= L.per_axis()) {
          interior = false;
          break;
        }
        if (grid.good(L.index(nc))) eta |= 1u << (2 * a + s);
      }
    }
    if (!interior) continue;
    ++n[eta];
    if (!grid.good(b)) ++bad[eta];
  }
  for (std::size_t e = 0; e < tally_.size(); ++e) {
    if (n[e] == 0) continue;
    auto& t = tally_[e];
    t.n += n[e];
    t.bad += bad[e];
    const double bn = static_cast<double>(bad[e]), nn = static_cast<double>(n[e]);
    t.sum_b2 += bn * bn;
    t.sum_n2 += nn * nn;
    t.sum_bn += bn * nn;
  }
  ++grids_;
}

PeierlsAccumulator::Report PeierlsAccumulator::report() const {
  Report r;
  r.grids = grids_;
  r.max.p = -1.0;
  for (std::size_t e = 0; e < tally_.size(); ++e) {
    const auto& t = tally_[e];
    if (t.n == 0) continue;
    Pattern p;
    p.eta = static_cast<std::uint32_t>(e);
    p.n = t.n;
    p.bad = t.bad;
    const double N = static_cast<double>(t.n);
    p.p = static_cast<double>(t.bad) / N;
    const double S = static_cast<double>(grids_);
    // Ratio estimator with grids as independent clusters of blocks.
    const double ss = t.sum_b2 - 2.0 * p.p * t.sum_bn + p.p * p.p * t.sum_n2;
    p.std_error = S > 1 ? std::sqrt(std::max(0.0, ss) * S / (S - 1.0)) / N : 0.0;
    p.upper = t.bad == 0 ? std::min(1.0, 3.0 / N) : std::min(1.0, p.p + 1.645 * p.std_error);
    p.sufficient = t.n >= min_samples_;
    if (p.sufficient) {
      r.any_sufficient = true;
      if (p.p > r.max.p) r.max = p;
    } else {
      ++r.insufficient;
    }
    r.patterns.push_back(p);
  }
  if (!r.any_sufficient) r.max = Pattern{};
  return r;
}

namespace {

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

ContourResult extract_contours(const BlockGrid& grid, int E, std::size_t anchor) {
  const auto& L = grid.layout();
  if (anchor >= L.num_blocks()) throw std::out_of_range("extract_contours: anchor block");
  const std::size_t nb = L.num_blocks();
  std::vector<std::uint8_t> excluded(nb);
  for (std::size_t b = 0; b < nb; ++b) excluded[b] = (b != anchor && L.meets_box(b, E)) ? 1 : 0;

  ContourResult res;
  std::vector<std::uint8_t> in_c(nb, 0);
  if (grid.good(anchor)) {
    std::deque<std::size_t> q{anchor};
    in_c[anchor] = 1;
    while (!q.empty()) {
      const auto b = q.front();
      q.pop_front();
      res.component.push_back(b);
      for (auto n : L.face_neighbors(b)) {
        if (in_c[n] || excluded[n] || !grid.good(n)) continue;
        in_c[n] = 1;
        q.push_back(n);
      }
    }
    res.component = sorted(std::move(res.component));
    for (auto b : res.component)
      if (L.on_frame(b)) res.connected_to_frame = true;
    if (res.connected_to_frame) return res;
  }

  auto is_bad = [&](std::size_t b) { return !excluded[b] && !grid.good(b); };
  Contour c;
  if (res.component.empty()) {
    c.gamma = {anchor};
  } else {
    // Blocks reachable from the frame without entering the component.
    std::vector<std::uint8_t> outside(nb, 0);
    std::deque<std::size_t> q;
    for (std::size_t b = 0; b < nb; ++b)
      if (L.on_frame(b) && !in_c[b]) {
        outside[b] = 1;
        q.push_back(b);
      }
    while (!q.empty()) {
      const auto b = q.front();
      q.pop_front();
      for (auto n : L.face_neighbors(b)) {
        if (outside[n] || in_c[n]) continue;
        outside[n] = 1;
        q.push_back(n);
      }
    }
    // Star components of bad blocks that meet the outer boundary of the
    // component; the largest one is gamma.
    std::vector<std::int64_t> comp(nb, -1);
    std::vector<std::vector<std::size_t>> comps;
    for (auto b : res.component) {
      for (auto n : L.face_neighbors(b)) {
        if (in_c[n] || !outside[n] || !is_bad(n) || comp[n] >= 0) continue;
        std::vector<std::size_t> members;
        std::deque<std::size_t> sq{n};
        comp[n] = static_cast<std::int64_t>(comps.size());
        while (!sq.empty()) {
          const auto s = sq.front();
          sq.pop_front();
          members.push_back(s);
          for (auto t : L.star_neighbors(s)) {
            if (comp[t] >= 0 || !is_bad(t)) continue;
            comp[t] = static_cast<std::int64_t>(comps.size());
            sq.push_back(t);
          }
        }
        comps.push_back(sorted(std::move(members)));
      }
    }
    if (comps.empty()) {
      // The component is enclosed by excluded blocks only.
      res.contour = Contour{};
      return res;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < comps.size(); ++i)
      if (comps[i].size() > comps[best].size() || (comps[i].size() == comps[best].size() && comps[i].front() < comps[best].front()))
        best = i;
    c.gamma = std::move(comps[best]);
  }
  std::vector<std::uint8_t> in_g(nb, 0), in_b(nb, 0);
  for (auto b : c.gamma) in_g[b] = 1;
  for (auto b : c.gamma)
    for (auto n : L.star_neighbors(b))
      if (!in_g[n] && !excluded[n] && !in_b[n] && grid.good(n)) {
        in_b[n] = 1;
        c.boundary.push_back(n);
      }
  c.boundary = sorted(std::move(c.boundary));
  res.contour = std::move(c);
  return res;
}

bool is_star_connected(const BlockLayout& layout, const std::vector<std::size_t>& blocks) {
  if (blocks.empty()) return true;
  std::vector<std::uint8_t> member(layout.num_blocks(), 0), seen(layout.num_blocks(), 0);
  for (auto b : blocks) member[b] = 1;
  std::deque<std::size_t> q{blocks.front()};
  seen[blocks.front()] = 1;
  std::size_t count = 0;
  while (!q.empty()) {
    const auto b = q.front();
    q.pop_front();
    ++count;
    for (auto n : layout.star_neighbors(b))
      if (member[n] && !seen[n]) {
        seen[n] = 1;
        q.push_back(n);
      }
  }
  return count == static_cast<std::size_t>(std::count(member.begin(), member.end(), 1));
}

bool reaches_frame_avoiding(const BlockLayout& layout, std::size_t from, const std::vector<std::size_t>& blocked) {
  std::vector<std::uint8_t> stop(layout.num_blocks(), 0), seen(layout.num_blocks(), 0);
  for (auto b : blocked) stop[b] = 1;
  if (stop[from]) return false;
  std::deque<std::size_t> q{from};
  seen[from] = 1;
  while (!q.empty()) {
    const auto b = q.front();
    q.pop_front();
    if (layout.on_frame(b)) return true;
    for (auto n : layout.face_neighbors(b))
      if (!stop[n] && !seen[n]) {
        seen[n] = 1;
        q.push_back(n);
      }
  }
  return false;
}

}  // namespace fklab

namespace fklab {

bool good_path_to_frame(const BlockGrid& grid, int E, std::size_t anchor) {
  const auto& L = grid.layout();
  if (!grid.good(anchor)) return false;
  std::vector<std::uint8_t> seen(L.num_blocks(), 0);
  std::deque<std::size_t> q{anchor};
  seen[anchor] = 1;
  while (!q.empty()) {
    const auto b = q.front();
    q.pop_front();
    if (L.on_frame(b)) return true;
    for (auto n : L.face_neighbors(b)) {
      if (seen[n] || !grid.good(n) || L.meets_box(n, E)) continue;
      seen[n] = 1;
      q.push_back(n);
    }
  }
  return false;
}

}  // namespace fklab
