#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lightpath/road_network.hpp"

namespace lightpath {

struct PathRecord {
    std::int64_t id = 0;
    Path path;
    std::optional<double> travel_time; // seconds
    std::optional<double> rank_score;  // in [0, 1]
    std::string split;                 // "", "train", "val" or "test"
};

// Paths with optional labels and split tags.
//
// File format (LF line endings):
//   path line:   path_id<TAB>e1 e2 ... eN
//   label line:  label<TAB>path_id<TAB>tt=<float>      travel time
//                label<TAB>path_id<TAB>rank=<float>    ranking score
//   split line:  split<TAB>path_id<TAB>train|val|test  (optional)
class PathDataset {
public:
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    PathRecord& record(std::size_t i) { return records_[i]; }
    const PathRecord& record(std::size_t i) const { return records_[i]; }
    const std::vector<PathRecord>& records() const { return records_; }

    // Rejects duplicate ids and paths shorter than 2 edges.
    void add(PathRecord rec);
    bool contains(std::int64_t id) const;
    PathRecord& by_id(std::int64_t id);

    std::vector<std::size_t> indices_with_split(const std::string& split) const;

    static PathDataset load(const std::string& file);
    void save(const std::string& file) const;

private:
    std::vector<PathRecord> records_;
};

} // namespace lightpath
