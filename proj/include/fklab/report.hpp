#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fklab/config.hpp"

namespace fklab {

// Fixed CSV layout; bump kCsvVersion when columns change.
inline constexpr int kCsvVersion = 1;
inline constexpr const char* kCsvHeader = "beta,h,N,L,K,bc,observable,mean,stderr,n_samples,seed,manifest";

struct CsvRow {
  double beta = 0.0;
  double h = 0.0;
  int N = 0, L = 0, K = 0;
  std::string bc;
  std::string observable;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

std::string format_real(double x);

// Output of one command: <out>/<command>.csv, <command>.jsonl, extra text
// files, and <command>.manifest.json. Rows are buffered and written by
// finish(); every row carries the config hash.
class RunOutput {
 public:
  RunOutput(const ExperimentConfig& cfg, std::string command);

  const std::string& manifest_hash() const { return hash_; }
  void row(const CsvRow& r);
  void json(nlohmann::json obj);
  void text(const std::string& name, const std::string& content);
  void seed(std::uint64_t s);

  // Returns the written paths (manifest last).
  std::vector<std::string> finish();

  const std::string& csv_buffer() const { return csv_; }
  const std::string& jsonl_buffer() const { return jsonl_; }

 private:
  std::string dir_, command_, hash_, canonical_;
  std::string csv_, jsonl_;
  std::vector<std::pair<std::string, std::string>> texts_;
  std::vector<std::uint64_t> seeds_;
  std::chrono::steady_clock::time_point start_;
};

std::string code_version();

}  // namespace fklab
