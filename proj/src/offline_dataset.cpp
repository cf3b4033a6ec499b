#include "splitopt/offline_dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "splitopt/number_format.hpp"

namespace splitopt {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.push_back("");
  }
  return fields;
}

bool parse_int_field(const std::string& s, int& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && !s.empty();
}

bool parse_int64_field(const std::string& s, std::int64_t& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && !s.empty();
}

bool parse_double_field(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

// Returns an error message, or empty string on success.
std::string parse_record_line(const std::string& line, OfflineRecord& rec) {
  const auto fields = split_fields(line);
  if (fields.size() != 7) {
    return "expected 7 fields, got " + std::to_string(fields.size());
  }
  if (!parse_int_field(fields[0], rec.config.filters)) {
    return "bad integer in column f: '" + fields[0] + "'";
  }
  if (!parse_int_field(fields[1], rec.config.kernel)) {
    return "bad integer in column k: '" + fields[1] + "'";
  }
  if (!parse_int_field(fields[2], rec.config.latent_dim)) {
    return "bad integer in column l_s: '" + fields[2] + "'";
  }
  if (!parse_int_field(fields[3], rec.config.split)) {
    return "bad integer in column m: '" + fields[3] + "'";
  }
  if (!parse_double_field(fields[4], rec.snr_db)) {
    return "bad number in column snr_db: '" + fields[4] + "'";
  }
  if (!parse_int64_field(fields[5], rec.flops)) {
    return "bad integer in column flops: '" + fields[5] + "'";
  }
  if (!parse_double_field(fields[6], rec.accuracy)) {
    return "bad number in column accuracy: '" + fields[6] + "'";
  }
  return "";
}

// Invariant check against the owning space; empty string on success.
std::string check_record(const OfflineRecord& rec, const ParameterSpace& space) {
  const auto in_axis = [](const std::vector<int>& axis, int v) {
    return std::binary_search(axis.begin(), axis.end(), v);
  };
  if (!in_axis(space.filters(), rec.config.filters)) {
    return "f=" + std::to_string(rec.config.filters) +
           " not in space axis filters";
  }
  if (!in_axis(space.kernels(), rec.config.kernel)) {
    return "k=" + std::to_string(rec.config.kernel) +
           " not in space axis kernels";
  }
  if (!in_axis(space.latent_dims(), rec.config.latent_dim)) {
    return "l_s=" + std::to_string(rec.config.latent_dim) +
           " not in space axis latent_dims";
  }
  if (!in_axis(space.splits(), rec.config.split)) {
    return "m=" + std::to_string(rec.config.split) +
           " not in space axis splits";
  }
  if (rec.flops <= 0) {
    return "flops must be positive, got " + std::to_string(rec.flops);
  }
  if (!(rec.accuracy >= 0.0 && rec.accuracy <= 100.0)) {
    return "accuracy must be within [0, 100], got " +
           format_double(rec.accuracy);
  }
  return "";
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::int64_t OfflineDataset::snr_key(double snr_db) {
  return std::llround(snr_db * 10.0);
}

OfflineDataset::Key OfflineDataset::make_key(const Configuration& c,
                                             double snr_db) {
  return Key{c.filters, c.kernel, c.latent_dim, c.split, snr_key(snr_db)};
}

std::size_t OfflineDataset::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = 0x9E3779B97F4A7C15ULL;
  for (std::uint64_t v :
       {static_cast<std::uint64_t>(k.filters),
        static_cast<std::uint64_t>(k.kernel),
        static_cast<std::uint64_t>(k.latent_dim),
        static_cast<std::uint64_t>(k.split),
        static_cast<std::uint64_t>(k.snr_tenths)}) {
    h = Rng::mix(h, v);
  }
  return static_cast<std::size_t>(h);
}

OfflineDataset::OfflineDataset(std::vector<OfflineRecord> records)
    : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    index_.emplace(make_key(records_[i].config, records_[i].snr_db), i);
  }
}

OfflineDataset OfflineDataset::from_records(std::vector<OfflineRecord> records,
                                            const ParameterSpace& space) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string err = check_record(records[i], space);
    if (!err.empty()) {
      throw std::runtime_error("record " + std::to_string(i) + ": " + err);
    }
  }
  OfflineDataset dataset(std::move(records));
  if (dataset.index_.size() != dataset.records_.size()) {
    throw std::runtime_error("duplicate (config, snr) records in dataset");
  }
  return dataset;
}

OfflineDataset OfflineDataset::load_csv(const std::filesystem::path& path,
                                        const ParameterSpace& space) {
  const auto errors = validate_csv(path, space);
  if (!errors.empty()) {
    throw std::runtime_error(errors.front());
  }

  // Re-read now that the file is known to be clean.
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<OfflineRecord> records;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    OfflineRecord rec;
    parse_record_line(line, rec);
    records.push_back(rec);
  }
  return OfflineDataset(std::move(records));
}

std::vector<std::string> OfflineDataset::validate_csv(
    const std::filesystem::path& path, const ParameterSpace& space) {
  std::vector<std::string> errors;
  std::ifstream in(path);
  if (!in) {
    errors.push_back("cannot open dataset file: " + path.string());
    return errors;
  }

  const std::string tag = path.filename().string();
  std::string line;
  if (!std::getline(in, line)) {
    errors.push_back(tag + ":1: missing header row");
    return errors;
  }
  if (strip_cr(line) != kDatasetCsvHeader) {
    errors.push_back(tag + ":1: bad header, expected '" +
                     std::string(kDatasetCsvHeader) + "'");
    return errors;
  }

  std::unordered_map<Key, int, KeyHash> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;

    OfflineRecord rec;
    std::string err = parse_record_line(line, rec);
    if (err.empty()) err = check_record(rec, space);
    if (!err.empty()) {
      errors.push_back(tag + ":" + std::to_string(line_no) + ": " + err);
      continue;
    }

    const Key key = make_key(rec.config, rec.snr_db);
    const auto [it, inserted] = seen.emplace(key, line_no);
    if (!inserted) {
      errors.push_back(tag + ":" + std::to_string(line_no) +
                       ": duplicate record for " + to_string(rec.config) +
                       " at snr " + format_double(rec.snr_db) +
                       " dB (first seen on line " +
                       std::to_string(it->second) + ")");
    }
  }
  return errors;
}

void OfflineDataset::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write dataset file: " + path.string());
  }
  out << kDatasetCsvHeader << '\n';
  for (const auto& rec : records_) {
    out << rec.config.filters << ',' << rec.config.kernel << ','
        << rec.config.latent_dim << ',' << rec.config.split << ','
        << format_double(rec.snr_db) << ',' << rec.flops << ','
        << format_double(rec.accuracy) << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

const OfflineRecord* OfflineDataset::lookup(const Configuration& c,
                                            double snr_db) const {
  const auto it = index_.find(make_key(c, snr_db));
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::pair<OfflineDataset, OfflineDataset> OfflineDataset::train_test_split(
    double test_fraction, Rng& rng) const {
  if (records_.size() < 2) {
    throw std::invalid_argument(
        "train_test_split needs at least 2 records, have " +
        std::to_string(records_.size()));
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must be inside (0, 1)");
  }

  const std::size_t n = records_.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(order[i], order[j]);
  }

  auto test_count = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * test_fraction));
  test_count = std::clamp<std::size_t>(test_count, 1, n - 1);

  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < test_count; ++i) in_test[order[i]] = true;

  std::vector<OfflineRecord> train;
  std::vector<OfflineRecord> test;
  train.reserve(n - test_count);
  test.reserve(test_count);
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).push_back(records_[i]);
  }
  return {OfflineDataset(std::move(train)), OfflineDataset(std::move(test))};
}

}  // namespace splitopt
