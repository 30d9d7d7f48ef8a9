// SPDX-License-Identifier: Apache-2.0
#include "gfnm/data/dataset.hpp"

#include <json.hpp>

#include "gfnm/errors.hpp"
#include "gfnm/io/binary.hpp"

namespace gfnm::data {

namespace {

constexpr std::string_view kMagic = "GFNM";
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 24;

void write_system(io::BinaryWriter& w, const SystemConfig& s) {
  w.u64(s.num_devices);
  w.u64(s.spreading_length);
  w.u64(s.sparsity);
  w.u64(s.slots);
  w.f64(s.eta);
  w.boolean(s.path_loss.enabled);
  w.f64(s.path_loss.min_distance_km);
  w.f64(s.path_loss.max_distance_km);
  w.u64(s.path_loss.distances_km.size());
  w.f64_array(s.path_loss.distances_km);
}

std::size_t dim(io::BinaryReader& r, const char* what) {
  const std::uint64_t v = r.u64();
  if (v > kMaxDim) throw DataError(std::string("dataset: implausible ") + what);
  return static_cast<std::size_t>(v);
}

SystemConfig read_system(io::BinaryReader& r) {
  SystemConfig s;
  s.num_devices = dim(r, "K");
  s.spreading_length = dim(r, "N");
  s.sparsity = dim(r, "S");
  s.slots = dim(r, "J");
  s.eta = r.f64();
  s.path_loss.enabled = r.boolean();
  s.path_loss.min_distance_km = r.f64();
  s.path_loss.max_distance_km = r.f64();
  s.path_loss.distances_km.resize(dim(r, "distance count"));
  r.f64_array(s.path_loss.distances_km);
  return s;
}

}  // namespace

DatasetRecord record_from_frame(std::uint64_t index, const ReceivedFrame& frame) {
  return {index,
          frame.snr_db,
          frame.noise_variance,
          frame.truth.activity.supports,
          frame.truth.bits,
          frame.observation};
}

Dataset generate_dataset(const FrameGenerator& generator, std::size_t count, double snr_min_db,
                         double snr_max_db, std::uint64_t first_index) {
  Dataset d;
  d.header = {generator.config(), generator.seed(), first_index, snr_min_db, snr_max_db};
  d.records.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    d.records.push_back(record_from_frame(
        first_index + i, generator.frame_random_snr(first_index + i, snr_min_db, snr_max_db)));
  return d;
}

std::vector<std::uint8_t> serialize(const Dataset& d) {
  const SystemConfig& s = d.header.system;
  io::BinaryWriter w;
  w.magic(kMagic);
  w.u32(kDatasetVersion);
  write_system(w, s);
  w.u64(d.header.seed);
  w.u64(d.header.first_index);
  w.f64(d.header.snr_min_db);
  w.f64(d.header.snr_max_db);
  w.u64(d.records.size());
  const std::size_t obs = s.spreading_length * s.slots;
  const std::size_t nbits = s.slots * s.num_devices * 2;
  for (const DatasetRecord& r : d.records) {
    if (r.supports.size() != s.slots || r.observation.size() != obs || r.bits.size() != nbits)
      throw InputError("dataset: record " + std::to_string(r.index) + " does not match the header");
    w.u64(r.index);
    w.f64(r.snr_db);
    w.f64(r.noise_variance);
    for (const Support& sup : r.supports) {
      w.u32(static_cast<std::uint32_t>(sup.size()));
      for (std::uint32_t k : sup) w.u32(k);
    }
    w.bytes(r.bits);
    for (const cplx& z : r.observation) {
      w.f64(z.real());
      w.f64(z.imag());
    }
  }
  return w.buffer();
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  io::BinaryReader r(bytes, "dataset");
  r.expect_magic(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion)
    throw DataError("dataset: unsupported version " + std::to_string(version));
  Dataset d;
  d.header.system = read_system(r);
  d.header.seed = r.u64();
  d.header.first_index = r.u64();
  d.header.snr_min_db = r.f64();
  d.header.snr_max_db = r.f64();
  const SystemConfig& s = d.header.system;
  try {
    validate(s);
  } catch (const ConfigError& e) {
    throw DataError(std::string("dataset: invalid header: ") + e.what());
  }
  const std::uint64_t count = r.u64();
  const std::size_t obs = s.spreading_length * s.slots;
  const std::size_t nbits = s.slots * s.num_devices * 2;
  // Each record needs at least its fixed-size part.
  const std::size_t min_record = 24 + 4 * s.slots + nbits + 16 * obs;
  if (count > r.remaining() / std::max<std::size_t>(min_record, 1))
    throw DataError("dataset: record count exceeds file size");
  d.records.resize(static_cast<std::size_t>(count));
  for (DatasetRecord& rec : d.records) {
    rec.index = r.u64();
    rec.snr_db = r.f64();
    rec.noise_variance = r.f64();
    rec.supports.resize(s.slots);
    for (Support& sup : rec.supports) {
      const std::uint32_t n = r.u32();
      if (n > s.num_devices) throw DataError("dataset: support larger than K");
      sup.resize(n);
      for (auto& k : sup) {
        k = r.u32();
        if (k >= s.num_devices) throw DataError("dataset: device index out of range");
      }
    }
    rec.bits.resize(nbits);
    r.bytes(rec.bits);
    rec.observation.resize(obs);
    for (cplx& z : rec.observation) {
      const double re = r.f64();
      z = {re, r.f64()};
    }
  }
  if (!r.done()) throw DataError("dataset: trailing bytes");
  return d;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return deserialize_dataset(io::read_file(path));
}

std::string dataset_sidecar(const Dataset& dataset) {
  std::string out;
  for (const DatasetRecord& r : dataset.records) {
    nlohmann::json j;
    j["index"] = r.index;
    j["snr_db"] = r.snr_db;
    j["noise_variance"] = r.noise_variance;
    j["supports"] = r.supports;
    out += j.dump() + "\n";
  }
  return out;
}

void check_compatible(const DatasetHeader& header, const SystemConfig& expected) {
  const SystemConfig& h = header.system;
  if (h.num_devices != expected.num_devices || h.spreading_length != expected.spreading_length ||
      h.sparsity != expected.sparsity || h.slots != expected.slots) {
    auto shape = [](const SystemConfig& s) {
      return "K=" + std::to_string(s.num_devices) + " N=" + std::to_string(s.spreading_length) +
             " S=" + std::to_string(s.sparsity) + " J=" + std::to_string(s.slots);
    };
    throw DataError("dataset shape " + shape(h) + " does not match configured " + shape(expected));
  }
}

nn::Sample DatasetSamples::sample(std::size_t i) const {
  const DatasetRecord& r = dataset_.records.at(i);
  const SystemConfig& s = dataset_.header.system;
  ReceivedFrame f;
  f.subcarriers = s.spreading_length;
  f.slots = s.slots;
  f.observation = r.observation;
  ActivityFrame a;
  a.num_devices = s.num_devices;
  a.sparsity = s.sparsity;
  a.supports = r.supports;
  return {nn::frame_input(f, mode_), nn::frame_labels(a, mode_)};
}

}  // namespace gfnm::data
