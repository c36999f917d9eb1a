#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "subrep/types.hpp"

namespace subrep {

class TagVocabulary {
 public:
  // order = first occurrence
  int intern(const std::string& tag);           // adds when missing
  int index_of(const std::string& tag) const;   // -1 when absent
  const std::string& tag(int idx) const { return tags_.at(idx); }
  const std::vector<std::string>& tags() const { return tags_; }
  int size() const { return static_cast<int>(tags_.size()); }

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, int> index_;
};

struct CooccurrenceMatrix {
  TagVocabulary vocabulary;
  ClassIndex classes;
  std::vector<std::vector<std::int64_t>> counts;  // [tag][class]

  std::int64_t at(int tag, int cls) const { return counts[tag][cls]; }
  std::int64_t tag_total(int tag) const;
};

struct DistinctiveScores {
  std::vector<std::vector<double>> scores;  // [tag][class], rows sum to 1
};

struct MiningConfig {
  double thr_distin = 0.6;
  int top_k = 10;
  std::int64_t min_photos = 0;
  bool exclude_class_tags = true;
};

struct CatalogEntry {
  std::string parent;
  std::string tag;
  std::int64_t photo_count = 0;  // count within the parent class
  double score = 0.0;
};

struct SubclassCatalog {
  std::vector<CatalogEntry> entries;
  int size() const { return static_cast<int>(entries.size()); }
};

CooccurrenceMatrix build_cooccurrence(const std::vector<ImageRecord>& records,
                                      const ClassIndex& classes);

// S_ij = C_ij / sum_j C_ij
DistinctiveScores distinctive_scores(const CooccurrenceMatrix& c);

// Per class: tags with score strictly above thr_distin, minus the class's own
// label tag, ranked by photo count descending (tie: tag text ascending),
// truncated to top_k, dropped below min_photos. Classes concatenated in index
// order.
SubclassCatalog select_subclasses(const DistinctiveScores& s,
                                  const CooccurrenceMatrix& c,
                                  const MiningConfig& config);

void write_catalog_csv(const std::string& path, const SubclassCatalog& cat);
void write_cooccurrence_csv(const std::string& path,
                            const CooccurrenceMatrix& c);

}  // namespace subrep
