#include "subrep/types.hpp"

#include <cctype>

namespace subrep {

std::string normalize_tag(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char ch : raw) {
    if (std::isspace(ch)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

ClassIndex::ClassIndex(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    for (std::size_t j = i + 1; j < labels_.size(); ++j)
      if (labels_[i] == labels_[j])
        throw ValidationError("duplicate class label: " + labels_[i]);
}

ClassIndex ClassIndex::from_records(const std::vector<ImageRecord>& records) {
  std::vector<std::string> labels;
  for (const auto& r : records) {
    bool seen = false;
    for (const auto& l : labels)
      if (l == r.label) { seen = true; break; }
    if (!seen) labels.push_back(r.label);
  }
  return ClassIndex(std::move(labels));
}

int ClassIndex::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  return -1;
}

}  // namespace subrep
