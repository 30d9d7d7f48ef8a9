// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gfnm/nn/features.hpp"
#include "gfnm/nn/train.hpp"
#include "gfnm/signal/frame.hpp"

namespace gfnm::data {

inline constexpr std::uint32_t kDatasetVersion = 1;

struct DatasetHeader {
  SystemConfig system;
  std::uint64_t seed = 0;         // generator seed (fixes the codebook)
  std::uint64_t first_index = 0;  // frame index of record 0
  double snr_min_db = 0.0;
  double snr_max_db = 20.0;
  bool operator==(const DatasetHeader&) const = default;
};

/// What training needs from a frame. Channels and noise are not stored: they
/// are reproducible from (seed, index) through FrameGenerator.
struct DatasetRecord {
  std::uint64_t index = 0;
  double snr_db = 0.0;
  double noise_variance = 0.0;
  std::vector<Support> supports;
  Bits bits;
  CVector observation;
  bool operator==(const DatasetRecord&) const = default;
};

struct Dataset {
  DatasetHeader header;
  std::vector<DatasetRecord> records;
};

DatasetRecord record_from_frame(std::uint64_t index, const ReceivedFrame& frame);

/// `count` frames from `generator`, index first_index + i, SNR uniform over
/// [snr_min, snr_max].
Dataset generate_dataset(const FrameGenerator& generator, std::size_t count, double snr_min_db,
                         double snr_max_db, std::uint64_t first_index = 0);

/// "GFNM", version, header, record count, records.
std::vector<std::uint8_t> serialize(const Dataset& dataset);
/// Throws DataError on a malformed, truncated or inconsistent buffer.
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// One JSON object per record: {index, snr_db, noise_variance, supports}.
std::string dataset_sidecar(const Dataset& dataset);

/// Throws DataError naming both shapes when (K, N, S, J) differ.
void check_compatible(const DatasetHeader& header, const SystemConfig& expected);

/// Network inputs and labels for each record.
class DatasetSamples : public nn::SampleSource {
 public:
  DatasetSamples(const Dataset& dataset, nn::InputMode mode) : dataset_(dataset), mode_(mode) {}
  std::size_t size() const override { return dataset_.records.size(); }
  nn::Sample sample(std::size_t i) const override;

 private:
  const Dataset& dataset_;
  nn::InputMode mode_;
};

}  // namespace gfnm::data
