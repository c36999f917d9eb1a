#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace subrep {

// Error taxonomy maps to CLI exit codes: validation = 2, io = 3, internal = 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct InternalError : Error {
  using Error::Error;
};

// Lowercase, trim, collapse internal whitespace runs to single spaces.
// Idempotent. Returns empty string for all-whitespace input.
std::string normalize_tag(const std::string& raw);

struct ImageRecord {
  std::string id;
  std::string label;           // normalized class label text
  std::set<std::string> tags;  // normalized
  std::vector<double> features;

  bool has_tag(const std::string& t) const { return tags.count(t) != 0; }
};

// Ordered class list with label -> index lookup.
class ClassIndex {
 public:
  ClassIndex() = default;
  explicit ClassIndex(std::vector<std::string> labels);

  // Collect distinct labels from records, ordered by first occurrence.
  static ClassIndex from_records(const std::vector<ImageRecord>& records);

  int index_of(const std::string& label) const;  // -1 when absent
  const std::string& label(int idx) const { return labels_.at(idx); }
  const std::vector<std::string>& labels() const { return labels_; }
  int size() const { return static_cast<int>(labels_.size()); }

 private:
  std::vector<std::string> labels_;
};

}  // namespace subrep
