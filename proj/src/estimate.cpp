#include "fklab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fklab {

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

Moments moments(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) return m;
  // Summed in sorted order so that any permutation gives the same bits.
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  double acc = 0.0;
  for (double x : s) acc += x;
  m.mean = acc / static_cast<double>(s.size());
  if (s.size() > 1) {
    double q = 0.0;
    for (double x : s) q += (x - m.mean) * (x - m.mean);
    m.var = q / static_cast<double>(s.size() - 1);
  }
  return m;
}

// First half of the batches against the second half.
bool halves_agree(std::span<const double> bm) {
  if (bm.size() < 4) return true;
  const std::size_t h = bm.size() / 2;
  const Moments a = moments(bm.subspan(0, h));
  const Moments b = moments(bm.subspan(h));
  const double se = std::sqrt(a.var / static_cast<double>(h) + b.var / static_cast<double>(bm.size() - h));
  const double diff = std::abs(a.mean - b.mean);
  if (se == 0.0) return diff == 0.0;
  return diff / se <= 5.0;
}

}  // namespace

double Estimate::z_against(double target) const {
  const double d = mean - target;
  if (std_error == 0.0) return d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
  return d / std_error;
}

Estimate exact_estimate(double value) {
  Estimate e;
  e.mean = value;
  e.exact = true;
  return e;
}

BatchAccumulator::BatchAccumulator(std::uint64_t samples, std::size_t batches) : nb_(batches) {
  if (batches < 2) throw std::invalid_argument("BatchAccumulator: need at least two batches");
  size_ = samples / batches;
  if (size_ == 0) throw std::invalid_argument("BatchAccumulator: fewer samples than batches");
  means_.reserve(batches);
}

void BatchAccumulator::add(double x) {
  if (means_.size() == nb_) return;  // remainder samples beyond the last full batch
  ++n_;
  sum_ += x;
  sum_sq_ += x * x;
  cur_ += x;
  if (n_ % size_ == 0) {
    means_.push_back(cur_ / static_cast<double>(size_));
    cur_ = 0.0;
  }
}

Estimate finalize(std::span<const BatchAccumulator> chains) {
  Estimate e;
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& c : chains) {
    if (c.batch_means().size() != c.batches()) throw std::logic_error("finalize: chain ended before its last batch");
    e.batch_means.insert(e.batch_means.end(), c.batch_means().begin(), c.batch_means().end());
    e.n_samples += c.count();
    sum += c.sum();
    sum_sq += c.sum_sq();
    if (!halves_agree(c.batch_means())) e.converged = false;
  }
  const Moments m = moments(e.batch_means);
  e.mean = m.mean;
  e.std_error = std::sqrt(m.var / static_cast<double>(e.batch_means.size()));
  const double n = static_cast<double>(e.n_samples);
  const double per_sample_var = n > 1 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1)) : 0.0;
  e.n_eff = e.std_error > 0.0 ? std::min(n, per_sample_var / (e.std_error * e.std_error)) : n;
  if (!halves_agree(e.batch_means)) e.converged = false;
  return e;
}

double paired_stderr(const Estimate& a, const Estimate& b) {
  if (a.exact) return b.std_error;
  if (b.exact) return a.std_error;
  if (a.batch_means.size() != b.batch_means.size()) throw std::invalid_argument("paired_stderr: batch layouts differ");
  std::vector<double> d(a.batch_means.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.batch_means[i] - b.batch_means[i];
  return std::sqrt(moments(d).var / static_cast<double>(d.size()));
}

double combined_stderr(const Estimate& a, const Estimate& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

Estimate merge(std::span<const Estimate> parts) {
  Estimate e;
  if (parts.empty()) return e;
  bool all_exact = true;
  for (const auto& p : parts) {
    all_exact = all_exact && p.exact;
    e.batch_means.insert(e.batch_means.end(), p.batch_means.begin(), p.batch_means.end());
    e.n_samples += p.n_samples;
    e.n_eff += p.n_eff;
    e.converged = e.converged && p.converged;
  }
  if (all_exact) {
    std::vector<double> v;
    for (const auto& p : parts) v.push_back(p.mean);
    e.mean = moments(v).mean;
    e.exact = true;
    return e;
  }
  std::sort(e.batch_means.begin(), e.batch_means.end());
  const Moments m = moments(e.batch_means);
  e.mean = m.mean;
  e.std_error = std::sqrt(m.var / static_cast<double>(e.batch_means.size()));
  return e;
}

}  // namespace fklab
