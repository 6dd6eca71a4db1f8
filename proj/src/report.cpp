#include "fklab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#ifndef FKLAB_VERSION
#define FKLAB_VERSION "dev"
#endif

namespace fklab {

std::string code_version() { return FKLAB_VERSION; }

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

RunOutput::RunOutput(const ExperimentConfig& cfg, std::string command)
    : dir_(cfg.out_dir),
      command_(std::move(command)),
      hash_(cfg.hash_hex()),
      canonical_(cfg.canonical()),
      start_(std::chrono::steady_clock::now()) {
  csv_ = std::string(kCsvHeader) + "\n";
}

void RunOutput::row(const CsvRow& r) {
  csv_ += format_real(r.beta) + ',' + format_real(r.h) + ',' + std::to_string(r.N) + ',' + std::to_string(r.L) + ',' +
          std::to_string(r.K) + ',' + r.bc + ',' + r.observable + ',' + format_real(r.mean) + ',' +
          format_real(r.std_error) + ',' + std::to_string(r.n_samples) + ',' + std::to_string(r.seed) + ',' + hash_ +
          '\n';
}

void RunOutput::json(nlohmann::json obj) {
  obj["manifest"] = hash_;
  jsonl_ += obj.dump() + '\n';
}

void RunOutput::text(const std::string& name, const std::string& content) { texts_.emplace_back(name, content); }

void RunOutput::seed(std::uint64_t s) {
  if (std::find(seeds_.begin(), seeds_.end(), s) == seeds_.end()) seeds_.push_back(s);
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

}  // namespace

std::vector<std::string> RunOutput::finish() {
  namespace fs = std::filesystem;
  fs::create_directories(dir_);
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    write_file(fs::path(dir_) / name, content);
    files.push_back(name);
  };
  put(command_ + ".csv", csv_);
  if (!jsonl_.empty()) put(command_ + ".jsonl", jsonl_);
  for (const auto& [name, content] : texts_) put(name, content);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  nlohmann::json m;
  m["config_hash"] = hash_;
  m["code_version"] = code_version();
  m["command"] = command_;
  m["csv_version"] = kCsvVersion;
  m["seeds"] = seeds_;
  m["wall_time_s"] = wall;
  m["outputs"] = files;
  m["config"] = canonical_;
  const std::string name = command_ + ".manifest.json";
  write_file(fs::path(dir_) / name, m.dump(2) + "\n");
  files.push_back(name);
  return files;
}

}  // namespace fklab
