#include "fklab/sampler.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace fklab {

SwSampler::SwSampler(std::shared_ptr<const FkGraph> graph, std::uint64_t seed, std::uint64_t chain, Exec exec)
    : graph_(std::move(graph)), key_(stream_key(seed, chain)), exec_(exec), omega_(graph_->num_random(), true),
      spins_(graph_->num_nodes(), 1) {
  if (graph_->num_random() >= kNodeSlot) throw std::invalid_argument("SwSampler: too many bonds for the counter layout");
}

void SwSampler::set_omega(BondConfig omega) {
  if (omega.size() != graph_->num_random()) throw std::invalid_argument("SwSampler::set_omega: wrong length");
  omega_ = std::move(omega);
  built_ = false;
}

const ClusterPartition& SwSampler::clusters() {
  if (!built_) {
    clusters_.build(*graph_, omega_);
    built_ = true;
  }
  return clusters_;
}

void SwSampler::assign_spins_serial() {
  const auto g = clusters_.ghost_root();
  const std::size_t n = spins_.size();
  for (std::size_t x = 0; x < n; ++x) {
    const auto r = clusters_.root(static_cast<std::uint32_t>(x));
    spins_[x] = r == g ? 1 : (counter_bits(key_, sweep_counter(sweep_, kNodeSlot + r)) >> 63 ? 1 : -1);
  }
}

void SwSampler::assign_spins_parallel() {
  const auto g = clusters_.ghost_root();
  const auto n = static_cast<std::int64_t>(spins_.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < n; ++x) {
    const auto r = clusters_.root(static_cast<std::uint32_t>(x));
    spins_[x] = r == g ? 1 : (counter_bits(key_, sweep_counter(sweep_, kNodeSlot + r)) >> 63 ? 1 : -1);
  }
}

void SwSampler::redraw_serial() {
  const auto edges = graph_->random_edges();
  const auto prob = graph_->probabilities();
  auto words = omega_.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = 0;
    const std::size_t end = std::min(edges.size(), (w + 1) * 64);
    for (std::size_t e = w * 64; e < end; ++e) {
      const auto& ed = edges[e];
      if (spins_[ed.u] == spins_[ed.v] && counter_uniform(key_, sweep_counter(sweep_, e)) < prob[e])
        bits |= std::uint64_t{1} << (e - w * 64);
    }
    words[w] = bits;
  }
}

void SwSampler::redraw_parallel() {
  const auto edges = graph_->random_edges();
  const auto prob = graph_->probabilities();
  auto words = omega_.words();
  const auto nw = static_cast<std::int64_t>(words.size());
  // One 64-bond word per iteration: no two threads write the same word.
#pragma omp parallel for schedule(static)
  for (std::int64_t w = 0; w < nw; ++w) {
    std::uint64_t bits = 0;
    const std::size_t lo = static_cast<std::size_t>(w) * 64;
    const std::size_t end = std::min(edges.size(), lo + 64);
    for (std::size_t e = lo; e < end; ++e) {
      const auto& ed = edges[e];
      if (spins_[ed.u] == spins_[ed.v] && counter_uniform(key_, sweep_counter(sweep_, e)) < prob[e])
        bits |= std::uint64_t{1} << (e - lo);
    }
    words[static_cast<std::size_t>(w)] = bits;
  }
}

void SwSampler::resample() {
  clusters();
  if (exec_ == Exec::kParallel) {
    assign_spins_parallel();
    redraw_parallel();
  } else {
    assign_spins_serial();
    redraw_serial();
  }
  ++sweep_;
  built_ = false;
}

Observable indicator(Event event) {
  return [event = std::move(event)](const SweepView& v) { return event(v.clusters, v.omega) ? 1.0 : 0.0; };
}

namespace {

struct Plan {
  std::uint64_t burn;
  std::uint64_t kept;
};

Plan plan_of(const RunSpec& spec) {
  if (!(spec.burn_in >= 0.0 && spec.burn_in < 1.0)) throw std::invalid_argument("RunSpec: burn-in fraction must lie in [0, 1)");
  if (spec.chains == 0) throw std::invalid_argument("RunSpec: need at least one chain");
  const auto burn = static_cast<std::uint64_t>(std::floor(spec.burn_in * static_cast<double>(spec.sweeps)));
  const std::uint64_t rest = spec.sweeps - burn;
  const std::uint64_t kept = spec.batches == 0 ? 0 : rest / spec.batches * spec.batches;
  if (kept == 0) throw std::invalid_argument("RunSpec: not enough sweeps for the requested batches");
  // Leftover sweeps are folded into the burn-in.
  return {spec.sweeps - kept, kept};
}

}  // namespace

std::vector<Estimate> estimate_observables(std::shared_ptr<const FkGraph> graph, const std::vector<Observable>& obs,
                                           const RunSpec& spec) {
  const Plan plan = plan_of(spec);
  const std::size_t nc = spec.chains;
  std::vector<std::vector<BatchAccumulator>> acc(obs.size());
  for (auto& a : acc) a.assign(nc, BatchAccumulator(plan.kept, spec.batches));

  const auto nchains = static_cast<std::int64_t>(nc);
  std::vector<std::string> errors(nc);
#pragma omp parallel for schedule(dynamic, 1) if (nc > 1)
  for (std::int64_t c = 0; c < nchains; ++c) {
    try {
      SwSampler s(graph, spec.seed, spec.chain_offset + static_cast<std::uint64_t>(c),
                  nc > 1 ? Exec::kSerial : spec.exec);
      for (std::uint64_t t = 0; t < spec.sweeps; ++t) {
        const ClusterPartition& cl = s.clusters();
        if (t >= plan.burn) {
          const SweepView view{cl, s.omega()};
          for (std::size_t k = 0; k < obs.size(); ++k) acc[k][static_cast<std::size_t>(c)].add(obs[k](view));
        }
        s.resample();
      }
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(c)] = ex.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);

  std::vector<Estimate> out;
  out.reserve(obs.size());
  for (const auto& a : acc) out.push_back(finalize(a));
  return out;
}

Estimate estimate_event(std::shared_ptr<const FkGraph> graph, const Event& event, const RunSpec& spec) {
  return estimate_observables(std::move(graph), {indicator(event)}, spec).front();
}

Estimate estimate_psi(std::shared_ptr<const Lattice> lattice, const SlabPartition& part,
                      const std::vector<std::uint8_t>& Z, double beta, const RunSpec& spec) {
  if (std::none_of(Z.begin(), Z.end(), [](std::uint8_t z) { return z != 0; })) return exact_estimate(0.0);
  const BoundaryCondition bc = mixed_boundary(*lattice, part, Z);
  auto graph = std::make_shared<const FkGraph>(lattice, bc, make_intensities(*lattice, beta));
  return estimate_event(graph, events::origin_to_ghost(*lattice), spec);
}

Estimate sample_with_boundary_field(std::shared_ptr<const Lattice> lattice, double beta, double h, const RunSpec& spec) {
  if (!(h > 0.0)) throw std::invalid_argument("sample_with_boundary_field: the boundary field h must be positive");
  auto graph = std::make_shared<const FkGraph>(lattice, wired_boundary(), make_intensities_with_field(*lattice, beta, h));
  return estimate_event(graph, events::origin_to_ghost(*lattice), spec);
}

MetropolisSampler::MetropolisSampler(std::shared_ptr<const FkGraph> graph, std::uint64_t seed, std::uint64_t chain)
    : graph_(std::move(graph)), rng_(seed, chain), omega_(graph_->num_random(), true) {
  adj_.resize(graph_->num_nodes());
  const auto edges = graph_->random_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj_[edges[e].u].push_back({edges[e].v, static_cast<std::int64_t>(e)});
    adj_[edges[e].v].push_back({edges[e].u, static_cast<std::int64_t>(e)});
  }
  for (const auto& f : graph_->frozen_edges()) {
    adj_[f.u].push_back({f.v, -1});
    adj_[f.v].push_back({f.u, -1});
  }
  mark_.assign(graph_->num_nodes(), 0);
}

bool MetropolisSampler::joined_without(std::uint32_t e) {
  const auto& ed = graph_->random_edges()[e];
  if (ed.u == ed.v) return true;
  ++stamp_;
  stack_.assign(1, ed.u);
  mark_[ed.u] = stamp_;
  while (!stack_.empty()) {
    const auto x = stack_.back();
    stack_.pop_back();
    for (const auto& [y, f] : adj_[x]) {
      if (f == static_cast<std::int64_t>(e)) continue;
      if (f >= 0 && !omega_.test(static_cast<std::size_t>(f))) continue;
      if (mark_[y] == stamp_) continue;
      if (y == ed.v) return true;
      mark_[y] = stamp_;
      stack_.push_back(y);
    }
  }
  return false;
}

void MetropolisSampler::step() {
  const auto prob = graph_->probabilities();
  const std::size_t n = prob.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto e = static_cast<std::uint32_t>(rng_() % n);
    const double p = prob[e];
    // Weight ratio of the flipped state to the current one.
    const double open_over_closed = joined_without(e) ? p / (1.0 - p) : p / (2.0 * (1.0 - p));
    const double ratio = omega_.test(e) ? 1.0 / open_over_closed : open_over_closed;
    if (ratio >= 1.0 || rng_.uniform() < ratio) omega_.flip(e);
  }
}

Estimate metropolis_event(std::shared_ptr<const FkGraph> graph, const Event& event, const RunSpec& spec) {
  const Plan plan = plan_of(spec);
  std::vector<BatchAccumulator> acc(spec.chains, BatchAccumulator(plan.kept, spec.batches));
  ClusterPartition cl;
  for (std::size_t c = 0; c < spec.chains; ++c) {
    MetropolisSampler s(graph, spec.seed, spec.chain_offset + c);
    for (std::uint64_t t = 0; t < spec.sweeps; ++t) {
      if (t >= plan.burn) {
        cl.build(*graph, s.omega());
        acc[c].add(event(cl, s.omega()) ? 1.0 : 0.0);
      }
      s.step();
    }
  }
  return finalize(acc);
}

namespace {

// Per-site constant part of the local field from the boundary.
std::vector<double> boundary_field(const Lattice& lat, double beta, SpinBoundary boundary) {
  std::vector<double> f(lat.num_sites(), 0.0);
  if (boundary.kind == SpinBoundary::Kind::kFree) return f;
  const double scale = boundary.kind == SpinBoundary::Kind::kPlus ? beta : boundary.h;
  for (std::size_t e = 0; e < lat.num_exterior(); ++e) f[lat.exterior_inner(e)] += scale * lat.bonds().exterior[e].J;
  return f;
}

}  // namespace

Estimate glauber_magnetization(std::shared_ptr<const Lattice> lattice, double beta, SpinBoundary boundary,
                               const RunSpec& spec) {
  const Lattice& lat = *lattice;
  const Plan plan = plan_of(spec);
  const std::vector<double> hb = boundary_field(lat, beta, boundary);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> nb(lat.num_sites());
  for (std::size_t e = 0; e < lat.num_interior(); ++e) {
    const double J = lat.bonds().interior[e].J;
    nb[lat.interior_u(e)].push_back({lat.interior_v(e), J});
    nb[lat.interior_v(e)].push_back({lat.interior_u(e), J});
  }
  const auto origin = static_cast<std::uint32_t>(lat.box().index_of(lat.box().origin()));
  std::vector<BatchAccumulator> acc(spec.chains, BatchAccumulator(plan.kept, spec.batches));
  const auto nchains = static_cast<std::int64_t>(spec.chains);
#pragma omp parallel for schedule(dynamic, 1) if (spec.chains > 1)
  for (std::int64_t c = 0; c < nchains; ++c) {
    CounterStream rng(spec.seed, spec.chain_offset + static_cast<std::uint64_t>(c));
    std::vector<std::int8_t> sigma(lat.num_sites(), 1);
    for (std::uint64_t t = 0; t < spec.sweeps; ++t) {
      if (t >= plan.burn) acc[static_cast<std::size_t>(c)].add(sigma[origin]);
      for (std::size_t i = 0; i < sigma.size(); ++i) {
        double H = hb[i];
        for (const auto& [j, J] : nb[i]) H += beta * J * sigma[j];
        sigma[i] = rng.uniform() * (1.0 + std::exp(-2.0 * H)) < 1.0 ? 1 : -1;
      }
    }
  }
  return finalize(acc);
}

double exact_spin_magnetization(const Lattice& lat, double beta, SpinBoundary boundary) {
  const std::size_t V = lat.num_sites();
  if (V > 24) throw std::invalid_argument("exact_spin_magnetization: box too large to enumerate");
  const std::vector<double> hb = boundary_field(lat, beta, boundary);
  const auto origin = lat.box().index_of(lat.box().origin());
  std::vector<double> logw(std::size_t{1} << V);
  double mx = -INFINITY;
  for (std::uint64_t s = 0; s < logw.size(); ++s) {
    auto spin = [&](std::size_t i) { return ((s >> i) & 1u) ? 1.0 : -1.0; };
    double lw = 0.0;
    for (std::size_t e = 0; e < lat.num_interior(); ++e)
      lw += beta * lat.bonds().interior[e].J * spin(lat.interior_u(e)) * spin(lat.interior_v(e));
    for (std::size_t i = 0; i < V; ++i) lw += hb[i] * spin(i);
    logw[s] = lw;
    mx = std::max(mx, lw);
  }
  double z = 0.0, m = 0.0;
  for (std::uint64_t s = 0; s < logw.size(); ++s) {
    const double w = std::exp(logw[s] - mx);
    z += w;
    m += ((s >> origin) & 1u) ? w : -w;
  }
  return m / z;
}

namespace {

constexpr char kMagic[4] = {'F', 'K', 'L', 'B'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

template <class T>
T get(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("checkpoint: truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{in[pos + i]} << (8 * i);
  pos += sizeof(T);
  return static_cast<T>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const SwSampler& sampler) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  const Box& box = sampler.graph().lattice().box();
  put<std::uint16_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(box.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(box.half_side()));
  put<std::uint64_t>(out, sampler.omega().size());
  const auto bits = sampler.omega().to_bytes();
  out.insert(out.end(), bits.begin(), bits.end());
  put<std::uint64_t>(out, 16);
  put<std::uint64_t>(out, sampler.key());
  put<std::uint64_t>(out, sampler.sweep());
  return out;
}

void decode_checkpoint(std::span<const std::uint8_t> in, SwSampler& sampler) {
  if (in.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), in.begin())) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  std::size_t pos = 4;
  if (get<std::uint16_t>(in, pos) != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  const Box& box = sampler.graph().lattice().box();
  const auto d = get<std::uint32_t>(in, pos);
  const auto N = get<std::uint32_t>(in, pos);
  if (d != static_cast<std::uint32_t>(box.dim()) || N != static_cast<std::uint32_t>(box.half_side())) {
    throw std::runtime_error("checkpoint: box differs from the sampler's");
  }
  const auto n = get<std::uint64_t>(in, pos);
  if (n != sampler.omega().size()) throw std::runtime_error("checkpoint: bond count differs from the sampler's");
  const std::size_t nbytes = static_cast<std::size_t>((n + 7) / 8);
  if (pos + nbytes > in.size()) throw std::runtime_error("checkpoint: truncated");
  BondConfig omega = BondConfig::from_bytes(in.subspan(pos, nbytes), static_cast<std::size_t>(n));
  pos += nbytes;
  if (get<std::uint64_t>(in, pos) != 16) throw std::runtime_error("checkpoint: unexpected RNG blob length");
  const auto key = get<std::uint64_t>(in, pos);
  const auto sweep = get<std::uint64_t>(in, pos);
  if (pos != in.size()) throw std::runtime_error("checkpoint: trailing bytes");
  sampler.set_omega(std::move(omega));
  sampler.restore(key, sweep);
}

void write_checkpoint(const std::string& path, const SwSampler& sampler) {
  const auto bytes = encode_checkpoint(sampler);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void read_checkpoint(const std::string& path, SwSampler& sampler) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  decode_checkpoint(bytes, sampler);
}

}  // namespace fklab
