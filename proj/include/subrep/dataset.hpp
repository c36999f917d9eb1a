#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subrep/types.hpp"

namespace subrep {

struct DatasetSplit {
  std::vector<ImageRecord> part_subclass;  // stage-1 training
  std::vector<ImageRecord> part_top;       // stage-2 training
  std::vector<ImageRecord> part_val;       // validation
  std::uint64_t seed = 0;
};

struct SubclassId {
  std::string parent;  // class label
  std::string tag;
};

struct BinaryTrainingSet {
  std::vector<ImageRecord> positives;
  std::vector<ImageRecord> negatives;
  SubclassId subclass;
};

struct LoadOptions {
  std::optional<int> expected_dim;
  std::optional<std::vector<std::string>> label_whitelist;
};

// JSONL, one object per line:
//   {"id": ..., "label": ..., "tags": [...], "features": [...]}
// Tags and label are normalized on ingestion. Errors name the line number.
std::vector<ImageRecord> load_records(const std::string& path,
                                      const LoadOptions& opts = {});

void save_records(const std::string& path,
                  const std::vector<ImageRecord>& records);

// Stratified per class: within each class, seeded shuffle then floor-
// proportional partition; remainder goes to parts in order 1, 2, 3.
DatasetSplit split_dataset(const std::vector<ImageRecord>& records,
                           int r1, int r2, int r3, std::uint64_t seed);

// Positives: records carrying the subclass tag AND the parent label,
// capped by seeded subsampling. Negatives: seeded sample of non-tagged
// records, spread as evenly as possible across top-level classes.
BinaryTrainingSet build_binary_set(const std::vector<ImageRecord>& pool,
                                   const SubclassId& subclass, int cap,
                                   double neg_ratio, std::uint64_t seed);

}  // namespace subrep
