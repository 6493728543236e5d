#include "capcurate/packer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "capcurate/error.hpp"

namespace capcurate {

PackedBatch::PackedBatch(std::uint32_t capacity, std::vector<Segment> segments)
    : capacity_(capacity), segments_(std::move(segments)) {
  if (capacity_ == 0) throw Error(ErrorCode::invalid_argument, "packed batch capacity must be > 0");
  if (segments_.empty()) throw Error(ErrorCode::invalid_argument, "packed batch must hold at least one segment");
  std::uint64_t expected = 0;
  for (const auto& s : segments_) {
    if (s.length == 0) throw Error(ErrorCode::invalid_argument, "segment '" + s.sample_id + "' has length 0");
    if (s.offset != expected) {
      throw Error(ErrorCode::invalid_argument, "segment '" + s.sample_id + "' at offset " + std::to_string(s.offset) +
                                                   ", expected " + std::to_string(expected));
    }
    expected += s.length;
  }
  if (expected > capacity_) {
    throw Error(ErrorCode::invalid_argument, "segments use " + std::to_string(expected) + " tokens, capacity is " +
                                                 std::to_string(capacity_));
  }
  used_ = static_cast<std::uint32_t>(expected);
}

Json PackedBatch::to_json() const {
  Json segs = Json::array();
  for (const auto& s : segments_) {
    segs.push_back(Json{{"sample_id", s.sample_id}, {"offset", s.offset}, {"length", s.length}});
  }
  return Json{{"capacity", capacity_}, {"segments", segs}, {"used", used_}, {"pad", pad()}};
}

PackedBatch PackedBatch::from_json(const Json& obj, std::size_t line) {
  try {
    std::vector<Segment> segs;
    for (const auto& s : obj.at("segments")) {
      segs.push_back(Segment{s.at("sample_id").get<std::string>(), s.at("offset").get<std::uint32_t>(),
                             s.at("length").get<std::uint32_t>()});
    }
    return PackedBatch(obj.at("capacity").get<std::uint32_t>(), std::move(segs));
  } catch (const Json::exception& e) {
    throw ParseError(line, "packed_batch", e.what());
  } catch (const Error& e) {
    throw ParseError(line, "packed_batch", e.what());
  }
}

Json PackRejection::to_json() const { return Json{{"sample_id", sample_id}, {"length", length}, {"reason", reason}}; }

StreamPacker::StreamPacker(std::uint32_t capacity, std::size_t micro_batch_size)
    : capacity_(capacity), micro_batch_size_(micro_batch_size) {
  if (capacity_ == 0) throw Error(ErrorCode::invalid_argument, "capacity must be > 0");
  if (micro_batch_size_ == 0) throw Error(ErrorCode::invalid_argument, "micro_batch_size must be >= 1");
  window_.reserve(micro_batch_size_);
}

std::vector<PackedBatch> StreamPacker::push(TokenSequence sequence) {
  if (sequence.length == 0) {
    rejections_.push_back(PackRejection{std::move(sequence.sample_id), 0, "empty sequence"});
    return {};
  }
  if (sequence.length > capacity_) {
    rejections_.push_back(PackRejection{std::move(sequence.sample_id), sequence.length,
                                        "length " + std::to_string(sequence.length) + " exceeds capacity " +
                                            std::to_string(capacity_)});
    return {};
  }
  window_.push_back(std::move(sequence));
  peak_ = std::max(peak_, window_.size());
  if (window_.size() < micro_batch_size_) return {};
  return pack_window();
}

std::vector<PackedBatch> StreamPacker::finish() { return pack_window(); }

std::vector<PackedBatch> StreamPacker::pack_window() {
  struct Bin {
    std::uint32_t used = 0;
    std::vector<Segment> segments;
  };
  std::vector<Bin> bins;
  for (auto& seq : window_) {
    Bin* target = nullptr;
    for (auto& b : bins) {
      if (capacity_ - b.used >= seq.length) {
        target = &b;
        break;
      }
    }
    if (target == nullptr) target = &bins.emplace_back();
    target->segments.push_back(Segment{std::move(seq.sample_id), target->used, seq.length});
    target->used += seq.length;
  }
  window_.clear();
  std::vector<PackedBatch> out;
  out.reserve(bins.size());
  for (auto& b : bins) out.emplace_back(capacity_, std::move(b.segments));
  return out;
}

PackResult pack(std::span<const TokenSequence> sequences, std::uint32_t capacity, std::size_t micro_batch_size) {
  StreamPacker packer(capacity, micro_batch_size);
  PackResult r;
  auto take = [&](std::vector<PackedBatch>&& bs) {
    for (auto& b : bs) r.batches.push_back(std::move(b));
  };
  for (const auto& s : sequences) take(packer.push(s));
  take(packer.finish());
  r.rejections = packer.rejections();
  r.peak_buffered = packer.peak_buffered();
  return r;
}

double padding_waste(std::span<const PackedBatch> batches) {
  if (batches.empty()) throw Error(ErrorCode::invalid_argument, "no batches to measure");
  std::uint64_t pad = 0, cap = 0;
  for (const auto& b : batches) {
    pad += b.pad();
    cap += b.capacity();
  }
  return static_cast<double>(pad) / static_cast<double>(cap);
}

double naive_padding_waste(std::span<const TokenSequence> sequences, std::uint32_t capacity) {
  if (capacity == 0) throw Error(ErrorCode::invalid_argument, "capacity must be > 0");
  std::uint64_t pad = 0, rows = 0;
  for (const auto& s : sequences) {
    if (s.length == 0 || s.length > capacity) continue;
    pad += capacity - s.length;
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::invalid_argument, "no sequences fit the capacity");
  return static_cast<double>(pad) / (static_cast<double>(rows) * capacity);
}

std::vector<TokenSequence> lognormal_sequences(std::size_t n, double mu, double sigma, std::uint32_t capacity,
                                               std::uint64_t seed) {
  if (capacity == 0) throw Error(ErrorCode::invalid_argument, "capacity must be > 0");
  if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be > 0");
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> dist(mu, sigma);
  std::vector<TokenSequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::clamp(std::round(dist(rng)), 1.0, static_cast<double>(capacity));
    out.push_back(TokenSequence{"seq-" + std::to_string(i), static_cast<std::uint32_t>(v)});
  }
  return out;
}

Json PackBenchResult::to_json() const {
  return Json{{"sequences", sequences},
              {"batches", batches},
              {"rejected", rejected},
              {"packed_waste", packed_waste},
              {"naive_waste", naive_waste},
              {"waste_ratio", waste_ratio},
              {"peak_buffered", peak_buffered},
              {"seconds", seconds},
              {"sequences_per_second", sequences_per_second}};
}

PackBenchResult pack_bench(std::span<const TokenSequence> sequences, std::uint32_t capacity,
                           std::size_t micro_batch_size) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = pack(sequences, capacity, micro_batch_size);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  PackBenchResult b;
  b.sequences = sequences.size();
  b.batches = r.batches.size();
  b.rejected = r.rejections.size();
  b.packed_waste = padding_waste(r.batches);
  b.naive_waste = naive_padding_waste(sequences, capacity);
  b.waste_ratio = b.naive_waste > 0.0 ? b.packed_waste / b.naive_waste : 0.0;
  b.peak_buffered = r.peak_buffered;
  b.seconds = secs;
  b.sequences_per_second = secs > 0.0 ? static_cast<double>(sequences.size()) / secs : 0.0;
  return b;
}

void write_pack_manifest(std::span<const PackedBatch> batches, const std::filesystem::path& path) {
  std::string body;
  for (const auto& b : batches) body += b.to_json().dump() + "\n";
  atomic_write_file(path, body);
}

}  // namespace capcurate
