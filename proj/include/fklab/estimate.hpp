#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fklab {

// Monte Carlo estimate from batch means.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  double n_eff = 0.0;
  bool converged = true;
  bool exact = false;  // no sampling was needed
  std::vector<double> batch_means;  // chain-id order, batches of equal size

  double z_against(double target) const;
};

Estimate exact_estimate(double value);

// Streams one observable of one chain into fixed-size batches.
class BatchAccumulator {
 public:
  BatchAccumulator(std::uint64_t samples, std::size_t batches);

  void add(double x);
  std::size_t batches() const { return nb_; }
  std::uint64_t batch_size() const { return size_; }
  std::uint64_t count() const { return n_; }
  const std::vector<double>& batch_means() const { return means_; }
  double sum() const { return sum_; }
  double sum_sq() const { return sum_sq_; }

 private:
  std::size_t nb_;
  std::uint64_t size_;
  std::uint64_t n_ = 0;
  double cur_ = 0.0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  std::vector<double> means_;
};

// Merge per-chain accumulators (already in chain-id order).
Estimate finalize(std::span<const BatchAccumulator> chains);

// Standard error of mean(a) - mean(b) when both arms share batching and
// random numbers.
double paired_stderr(const Estimate& a, const Estimate& b);
double combined_stderr(const Estimate& a, const Estimate& b);

// Order-independent merge of estimates of the same quantity.
Estimate merge(std::span<const Estimate> parts);

}  // namespace fklab
