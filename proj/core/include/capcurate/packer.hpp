#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "capcurate/jsonl.hpp"

namespace capcurate {

struct TokenSequence {
  std::string sample_id;
  std::uint32_t length = 0;
};

struct Segment {
  std::string sample_id;
  std::uint32_t offset = 0;
  std::uint32_t length = 0;

  bool operator==(const Segment&) const = default;
};

// A fixed-capacity packed sequence. Segments are laid out back to back from
// offset 0; the constructor rejects anything else, including an empty batch
// and a zero capacity.
class PackedBatch {
 public:
  PackedBatch(std::uint32_t capacity, std::vector<Segment> segments);

  std::uint32_t capacity() const noexcept { return capacity_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::uint32_t used() const noexcept { return used_; }
  std::uint32_t pad() const noexcept { return capacity_ - used_; }

  Json to_json() const;
  static PackedBatch from_json(const Json& obj, std::size_t line = 0);

 private:
  std::uint32_t capacity_;
  std::vector<Segment> segments_;
  std::uint32_t used_ = 0;
};

struct PackRejection {
  std::string sample_id;
  std::uint32_t length = 0;
  std::string reason;

  Json to_json() const;
};

// Buffers up to micro_batch_size sequences, then packs that window with
// greedy first-fit in arrival order and emits the bins. Sequences never
// split; ones longer than the capacity (or empty) become rejections.
class StreamPacker {
 public:
  StreamPacker(std::uint32_t capacity, std::size_t micro_batch_size);

  // Returns the batches completed by this push (empty until a window fills).
  std::vector<PackedBatch> push(TokenSequence sequence);
  // Packs whatever is buffered.
  std::vector<PackedBatch> finish();

  const std::vector<PackRejection>& rejections() const noexcept { return rejections_; }
  std::size_t buffered() const noexcept { return window_.size(); }
  std::size_t peak_buffered() const noexcept { return peak_; }
  std::uint32_t capacity() const noexcept { return capacity_; }
  std::size_t micro_batch_size() const noexcept { return micro_batch_size_; }

 private:
  std::vector<PackedBatch> pack_window();

  std::uint32_t capacity_;
  std::size_t micro_batch_size_;
  std::vector<TokenSequence> window_;
  std::vector<PackRejection> rejections_;
  std::size_t peak_ = 0;
};

struct PackResult {
  std::vector<PackedBatch> batches;
  std::vector<PackRejection> rejections;
  std::size_t peak_buffered = 0;
};

PackResult pack(std::span<const TokenSequence> sequences, std::uint32_t capacity, std::size_t micro_batch_size);

// Sum of pad over sum of capacity. Throws on an empty list.
double padding_waste(std::span<const PackedBatch> batches);
// Waste of one sequence per capacity-sized row, over sequences that fit.
double naive_padding_waste(std::span<const TokenSequence> sequences, std::uint32_t capacity);

// Log-normal lengths, rounded and clipped to [1, capacity].
std::vector<TokenSequence> lognormal_sequences(std::size_t n, double mu, double sigma, std::uint32_t capacity,
                                               std::uint64_t seed);

struct PackBenchResult {
  std::size_t sequences = 0;
  std::size_t batches = 0;
  std::size_t rejected = 0;
  double packed_waste = 0.0;
  double naive_waste = 0.0;
  double waste_ratio = 0.0;  // packed / naive
  std::size_t peak_buffered = 0;
  double seconds = 0.0;
  double sequences_per_second = 0.0;

  Json to_json() const;
};

inline constexpr std::size_t kDefaultMicroBatch = 64;

PackBenchResult pack_bench(std::span<const TokenSequence> sequences, std::uint32_t capacity,
                           std::size_t micro_batch_size = kDefaultMicroBatch);

// Writes one PackedBatch per line.
void write_pack_manifest(std::span<const PackedBatch> batches, const std::filesystem::path& path);

}  // namespace capcurate
