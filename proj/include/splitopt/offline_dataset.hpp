#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "splitopt/config_space.hpp"
#include "splitopt/rng.hpp"

namespace splitopt {

// One simulated measurement: a configuration evaluated at one channel SNR.
struct OfflineRecord {
  Configuration config;
  double snr_db = 0.0;
  std::int64_t flops = 0;
  double accuracy = 0.0;  // percent, in [0, 100]

  friend bool operator==(const OfflineRecord&, const OfflineRecord&) = default;
};

// CSV header used for on-disk corpora.
inline constexpr const char* kDatasetCsvHeader =
    "f,k,l_s,m,snr_db,flops,accuracy";

// Immutable record store with an exact-match index on (config, snr).
// SNR keys are rounded to 0.1 dB so float formatting never breaks lookups.
class OfflineDataset {
 public:
  OfflineDataset() = default;

  // Validates every record against the space and the record invariants,
  // and rejects duplicate (config, snr) keys.
  static OfflineDataset from_records(std::vector<OfflineRecord> records,
                                     const ParameterSpace& space);

  // Loads the CSV schema above; throws with a line-numbered message on the
  // first violation.
  static OfflineDataset load_csv(const std::filesystem::path& path,
                                 const ParameterSpace& space);

  // Collects every violation instead of stopping at the first one. An empty
  // result means the file is valid.
  static std::vector<std::string> validate_csv(
      const std::filesystem::path& path, const ParameterSpace& space);

  void save_csv(const std::filesystem::path& path) const;

  const std::vector<OfflineRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }

  const OfflineRecord* lookup(const Configuration& c, double snr_db) const;

  // Disjoint random partition {train, test}. The test side gets
  // round(size * test_fraction) records, clamped so both sides are
  // non-empty. Requires at least 2 records.
  std::pair<OfflineDataset, OfflineDataset> train_test_split(
      double test_fraction, Rng& rng) const;

  static std::int64_t snr_key(double snr_db);

 private:
  struct Key {
    int filters;
    int kernel;
    int latent_dim;
    int split;
    std::int64_t snr_tenths;

    friend bool operator==(const Key&, const Key&) = default;
  };

  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  static Key make_key(const Configuration& c, double snr_db);

  // Builds the index without revalidating (records already checked).
  explicit OfflineDataset(std::vector<OfflineRecord> records);

  std::vector<OfflineRecord> records_;
  std::unordered_map<Key, std::size_t, KeyHash> index_;
};

}  // namespace splitopt
