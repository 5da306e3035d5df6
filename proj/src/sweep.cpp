#include "fitzcal/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include "fitzcal/checksum.hpp"
#include "fitzcal/error.hpp"

namespace fitzcal {
namespace {

constexpr std::size_t kCacheBytes = 4 + 8 * (2 + 2 * kGridSize);

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 0; shift < 64; shift += 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

ImageSweep sweep_one(const DatasetManifest& manifest, const ImageRecord& r,
                     const SweepOptions& options, bool* from_cache) {
  const auto prob_path = manifest.resolve(r.prob_path);
  const auto mask_path = manifest.resolve(r.mask_path);
  const auto prob_bytes = read_file_bytes(prob_path);
  const auto mask_bytes = read_file_bytes(mask_path);

  std::filesystem::path cache_path;
  if (options.cache_dir) {
    Sha256 h;
    h.update(prob_bytes);
    const std::uint8_t separator = 0;
    h.update(std::span(&separator, 1));
    h.update(mask_bytes);
    cache_path = *options.cache_dir / cache_file_name(r.image_id, h.hex_digest());
    if (std::filesystem::exists(cache_path)) {
      if (auto counts = decode_count_curve(read_file_bytes(cache_path))) {
        *from_cache = true;
        return make_sweep(r.image_id, r.group, *counts);
      }
    }
  }

  const ProbMap prob = decode_probmap(prob_bytes);
  const BinaryMask mask = decode_mask(mask_bytes);
  if (prob.width() != mask.width() || prob.height() != mask.height()) {
    throw DataError("dimension-mismatch",
                    "image '" + r.image_id +
                        "': probability map and mask sizes differ");
  }
  const CountCurve counts = sweep_counts(prob, mask);
  if (options.cache_dir) {
    auto tmp = cache_path;
    tmp += ".tmp";
    write_file_bytes(tmp, encode_count_curve(counts));
    std::filesystem::rename(tmp, cache_path);
  }
  *from_cache = false;
  return make_sweep(r.image_id, r.group, counts);
}

}  // namespace

ImageSweep make_sweep(std::string image_id, GroupLabel group,
                      const CountCurve& counts) {
  ImageSweep s;
  s.image_id = std::move(image_id);
  s.group = group;
  s.counts = counts;
  s.dice = curve_from_counts(counts, Metric::kDice);
  s.biou = curve_from_counts(counts, Metric::kBiou);
  return s;
}

ImageSweep make_sweep(std::string image_id, GroupLabel group,
                      const ProbMap& prob, const BinaryMask& mask) {
  return make_sweep(std::move(image_id), group, sweep_counts(prob, mask));
}

unsigned default_thread_count() {
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::size_t error_index = n;
  std::exception_ptr error;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

std::vector<ImageRecord> records_in_split(const DatasetManifest& manifest,
                                          Split split) {
  std::vector<ImageRecord> out;
  std::copy_if(manifest.records.begin(), manifest.records.end(),
               std::back_inserter(out),
               [split](const ImageRecord& r) { return r.split == split; });
  return out;
}

std::vector<ImageSweep> sweep_records(const DatasetManifest& manifest,
                                      std::span<const ImageRecord> records,
                                      const SweepOptions& options,
                                      SweepStats* stats) {
  if (options.cache_dir) std::filesystem::create_directories(*options.cache_dir);

  std::vector<const ImageRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const ImageRecord* a, const ImageRecord* b) {
              return a->image_id < b->image_id;
            });

  std::vector<ImageSweep> out(ordered.size());
  std::vector<char> hit(ordered.size(), 0);
  parallel_for(ordered.size(), options.threads, [&](std::size_t i) {
    bool from_cache = false;
    out[i] = sweep_one(manifest, *ordered[i], options, &from_cache);
    hit[i] = from_cache;
  });
  if (stats != nullptr) {
    stats->cache_hits = static_cast<std::size_t>(
        std::count(hit.begin(), hit.end(), 1));
    stats->computed = out.size() - stats->cache_hits;
  }
  return out;
}

std::vector<std::uint8_t> encode_count_curve(const CountCurve& counts) {
  std::vector<std::uint8_t> out;
  out.reserve(kCacheBytes);
  out.insert(out.end(), {'F', 'C', 'V', '1'});
  put_u64(out, counts.positives);
  put_u64(out, counts.total);
  for (auto v : counts.tp) put_u64(out, v);
  for (auto v : counts.fp) put_u64(out, v);
  return out;
}

std::optional<CountCurve> decode_count_curve(
    std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kCacheBytes || std::memcmp(bytes.data(), "FCV1", 4) != 0) {
    return std::nullopt;
  }
  CountCurve c;
  const std::uint8_t* p = bytes.data() + 4;
  c.positives = get_u64(p);
  c.total = get_u64(p + 8);
  p += 16;
  for (auto& v : c.tp) {
    v = get_u64(p);
    p += 8;
  }
  for (auto& v : c.fp) {
    v = get_u64(p);
    p += 8;
  }
  return c;
}

std::string safe_file_stem(const std::string& image_id) {
  std::string safe;
  for (char ch : image_id) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' ||
                    ch == '.';
    safe.push_back(ok ? ch : '_');
  }
  return safe;
}

std::string cache_file_name(const std::string& image_id,
                            const std::string& content_hash) {
  return safe_file_stem(image_id) + "-" + content_hash.substr(0, 16) + ".fcv";
}

}  // namespace fitzcal
