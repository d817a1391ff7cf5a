#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "oukit/bench.hpp"
#include "oukit/lstm.hpp"
#include "oukit/simulate.hpp"
#include "oukit/train.hpp"

namespace oukit::io {

/// Shortest 17-significant-digit decimal form; round-trips any double.
std::string format_double(double value);

/// FNV-1a 64-bit hash, used for dataset file checksums.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// --- trajectory CSV: header "t,x", rows "i*dt,x_i" at full precision ---
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

// --- dataset manifest (JSON) ---
struct ManifestCombo {
  OUParams params;
  int count = 0;
};

struct ManifestFile {
  std::string file;
  OUParams params;
  std::string checksum;  // fnv1a64 of the file bytes, hex
};

struct DatasetManifest {
  std::uint64_t master_seed = 0;
  GridSpec grid;
  InitMode init_mode = InitMode::uniform_k_sigma;
  double k = 30.0;
  std::vector<ManifestCombo> combos;
  std::vector<ManifestFile> files;
};

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

// --- model binary: magic, version, hidden, layers, alpha, normalizer, then
// each tensor as (rank, dims, row-major float64), little-endian throughout ---
void save_model(const std::filesystem::path& path, const LstmModel& model);
LstmModel load_model(const std::filesystem::path& path);

// --- loss curve CSV: "epoch,train_loss,val_loss" ---
void write_loss_curve_csv(const std::filesystem::path& path,
                          const std::vector<EpochStats>& curve);

// --- benchmark report bundle ---
void write_report_markdown(const std::filesystem::path& path, const BenchmarkReport& report);
void write_report_csv(const std::filesystem::path& path, const BenchmarkReport& report);
void write_report_json(const std::filesystem::path& path, const BenchmarkReport& report);
void write_estimates_csv(const std::filesystem::path& path, const BenchmarkReport& report);
void write_timing_json(const std::filesystem::path& path, const BenchmarkReport& report);
std::vector<PathEstimate> read_estimates_csv(const std::filesystem::path& path);

std::string to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& name);

}  // namespace oukit::io
