#include "fklab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fklab/coarsegrain.hpp"
#include "fklab/lattice.hpp"

namespace fklab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  const auto x = to_int(key, v);
  if (x < 0) throw ConfigError("config: " + key + " must be nonnegative");
  return static_cast<std::uint64_t>(x);
}

// Shortest text that reads back to the same double.
std::string fmt(double x) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::stod(buf) == x) break;
  }
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += fmt(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

std::vector<CouplingKernel::Entry> parse_couplings(int d, const std::string& text) {
  std::vector<CouplingKernel::Entry> out;
  for (const auto& item : split(text, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("config: coupling '" + item + "' needs the form dx,dy,...:J");
    const auto comps = split(item.substr(0, colon), ',');
    if (static_cast<int>(comps.size()) != d)
      throw ConfigError("config: coupling '" + item + "' has " + std::to_string(comps.size()) + " components, d = " +
                        std::to_string(d));
    Site v(d);
    for (int a = 0; a < d; ++a) v[a] = static_cast<int>(to_int("couplings", comps[a]));
    out.push_back({v, to_real("couplings", trim(item.substr(colon + 1)))});
  }
  return out;
}

std::string couplings_text(const std::vector<CouplingKernel::Entry>& c) {
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ';';
    for (int a = 0; a < c[i].displacement.dim; ++a) s += (a ? "," : "") + std::to_string(c[i].displacement[a]);
    s += ':' + fmt(c[i].J);
  }
  return s;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("config: range '" + text + "' needs lo:hi:step");
    const double lo = to_real("range", parts[0]), hi = to_real("range", parts[1]), step = to_real("range", parts[2]);
    if (!(step > 0) || hi < lo) throw ConfigError("config: range '" + text + "' is empty or has a nonpositive step");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + i * step) * 1e12) / 1e12);
    return out;
  }
  for (const auto& p : split(text, ',')) out.push_back(to_real("list", p));
  if (out.empty()) throw ConfigError("config: empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& p : split(text, ',')) out.push_back(static_cast<int>(to_int("list", p)));
  if (out.empty()) throw ConfigError("config: empty list");
  return out;
}

CouplingKernel ExperimentConfig::make_kernel() const {
  if (kernel == "nearest-neighbor") return CouplingKernel::nearest_neighbor(d, J);
  if (kernel == "list") {
    if (couplings.empty()) throw ConfigError("config: kernel = list needs model.couplings");
    return CouplingKernel(d, couplings);
  }
  throw ConfigError("config: unknown kernel '" + kernel + "' (nearest-neighbor | list)");
}

int ExperimentConfig::default_window(int k) const {
  const int need = N + 3 * k / 2 + 2 * k;
  int W = k / 2;
  while (W < need) W += k;
  return W;
}

std::string ExperimentConfig::canonical() const {
  std::vector<std::pair<std::string, std::string>> kv{
      {"model.q", std::to_string(q)},
      {"model.d", std::to_string(d)},
      {"model.kernel", kernel},
      {"model.J", fmt(J)},
      {"model.couplings", couplings_text(couplings)},
      {"model.beta", join(betas)},
      {"model.h", fmt(h)},
      {"model.s", fmt(s)},
      {"model.bc", bc},
      {"model.pattern", pattern},
      {"geometry.N", std::to_string(N)},
      {"geometry.N_grid", join(N_grid)},
      {"geometry.L", std::to_string(L)},
      {"geometry.K", std::to_string(K)},
      {"geometry.K_grid", join(K_grid)},
      {"geometry.window", std::to_string(window)},
      {"run.sweeps", std::to_string(sweeps)},
      {"run.burn_in", fmt(burn_in)},
      {"run.batches", std::to_string(batches)},
      {"run.chains", std::to_string(chains)},
      {"run.seed", std::to_string(seed)},
      {"run.samples", std::to_string(samples)},
      {"run.thinning", std::to_string(thinning)},
      {"run.burn", std::to_string(burn)},
      {"domination.n_min", std::to_string(n_min)},
      {"domination.field_sweeps", std::to_string(field_sweeps)},
      {"domination.coupled_draws", std::to_string(coupled_draws)},
      {"domination.psi_sweeps", std::to_string(psi_sweeps)},
      {"domination.q", fmt(q_oracle)},
      {"domination.qhat", fmt(qhat_oracle)},
      {"domination.chain_length", std::to_string(chain_length)},
  };
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void set_config_value(ExperimentConfig& c, const std::string& full_key, const std::string& raw) {
  const std::string value = trim(raw);
  const auto dot = full_key.rfind('.');
  const std::string key = dot == std::string::npos ? full_key : full_key.substr(dot + 1);
  const std::string section = dot == std::string::npos ? "" : full_key.substr(0, dot);

  if (key == "q" && section == "domination") c.q_oracle = to_real(key, value);
  else if (key == "q") c.q = static_cast<int>(to_int(key, value));
  else if (key == "d") c.d = static_cast<int>(to_int(key, value));
  else if (key == "kernel") c.kernel = value;
  else if (key == "J") c.J = to_real(key, value);
  else if (key == "couplings") c.couplings = parse_couplings(c.d, value);
  else if (key == "beta") c.betas = parse_real_list(value);
  else if (key == "h") c.h = to_real(key, value);
  else if (key == "s") c.s = to_real(key, value);
  else if (key == "bc") c.bc = value;
  else if (key == "pattern") c.pattern = value;
  else if (key == "N") c.N = static_cast<int>(to_int(key, value));
  else if (key == "N_grid") c.N_grid = parse_int_list(value);
  else if (key == "L") c.L = static_cast<int>(to_int(key, value));
  else if (key == "K") c.K = static_cast<int>(to_int(key, value));
  else if (key == "K_grid") c.K_grid = parse_int_list(value);
  else if (key == "window") c.window = static_cast<int>(to_int(key, value));
  else if (key == "sweeps") c.sweeps = to_count(key, value);
  else if (key == "burn_in") c.burn_in = to_real(key, value);
  else if (key == "batches") c.batches = to_count(key, value);
  else if (key == "chains") c.chains = to_count(key, value);
  else if (key == "seed") c.seed = to_count(key, value);
  else if (key == "samples") c.samples = to_count(key, value);
  else if (key == "thinning") c.thinning = to_count(key, value);
  else if (key == "burn") c.burn = to_count(key, value);
  else if (key == "n_min") c.n_min = to_count(key, value);
  else if (key == "field_sweeps") c.field_sweeps = to_count(key, value);
  else if (key == "coupled_draws") c.coupled_draws = to_count(key, value);
  else if (key == "psi_sweeps") c.psi_sweeps = to_count(key, value);
  else if (key == "qhat") c.qhat_oracle = to_real(key, value);
  else if (key == "chain_length") c.chain_length = to_count(key, value);
  else if (key == "out_dir") c.out_dir = value;
  else throw ConfigError("config: unknown key '" + full_key + "'");
}

void read_config_into(ExperimentConfig& cfg, std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  // d first, so that coupling lists parse against the right dimension.
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      kv.emplace_back(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty()) throw ConfigError("config: nested sections are not supported");
      kv.emplace_back(name + "." + key, leaf.data());
    }
  }
  std::stable_partition(kv.begin(), kv.end(), [](const auto& p) { return p.first == "model.d" || p.first == "d"; });
  for (const auto& [k, v] : kv) set_config_value(cfg, k, v);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  read_config_into(cfg, in);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  load_config_into(cfg, path);
  return cfg;
}

void load_config_into(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  read_config_into(cfg, in);
}

void validate(const ExperimentConfig& c, Needs needs) {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (c.q != 2) fail("only q = 2 is supported (got q = " + std::to_string(c.q) + ")");
  if (c.d < 1 || c.d > kMaxDim) fail("d must lie in [1, " + std::to_string(kMaxDim) + "]");
  for (double b : c.betas)
    if (!(b >= 0.0) || !std::isfinite(b)) fail("beta must be finite and nonnegative");
  if (c.betas.empty()) fail("beta grid is empty");
  if (c.s >= 1.0) fail("s must lie in (0, 1)");
  if (c.bc != "free" && c.bc != "wired" && c.bc != "mixed") fail("bc must be free, wired or mixed");
  if (c.sweeps == 0) fail("sweeps must be positive");
  if (!(c.burn_in >= 0.0 && c.burn_in < 1.0)) fail("burn_in must lie in [0, 1)");
  if (c.batches < 2) fail("batches must be at least 2");
  if (c.chains < 1) fail("chains must be at least 1");
  if (c.thinning < 1) fail("thinning must be positive");
  const auto ns = c.n_values();
  for (int n : ns)
    if (n < 1) fail("N must be positive");
  if (!std::is_sorted(ns.begin(), ns.end())) fail("N grid must be ascending");
  (void)c.make_kernel();

  if (needs.slabs || c.bc == "mixed") {
    for (int n : c.n_values())
      if (c.L < 1 || (2 * n) % c.L != 0)
        fail("slab relation L | 2N violated: L = " + std::to_string(c.L) + ", 2N = " + std::to_string(2 * n));
  }
  if (needs.blocks || needs.detector) {
    for (int k : c.k_values()) {
      try {
        validate_block_size(k, c.d);
      } catch (const std::invalid_argument& e) {
        fail(std::string("block size relation (K even perfect square, K^(1/2d) >= 2) violated: ") + e.what());
      }
      const int W = c.window_for(k);
      if (((W - k / 2) % k + k) % k != 0)
        fail("grid relation W = K/2 mod K violated: W = " + std::to_string(W) + ", K = " + std::to_string(k));
    }
  }
  if (needs.detector) {
    const int k = c.K;
    for (int n : c.n_values()) {
      if (n % (k / 2) != 0)
        fail("scale relation N = n K/2 violated: N = " + std::to_string(n) + ", K/2 = " + std::to_string(k / 2));
      const int need = n + 3 * k / 2 + 2 * k;
      if (c.window_for(k) < need)
        fail("window relation W >= N + 3K/2 + 2K violated: W = " + std::to_string(c.window_for(k)) + " < " +
             std::to_string(need));
    }
  }
}

}  // namespace fklab
