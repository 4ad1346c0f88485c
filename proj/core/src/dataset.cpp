#include "lightpath/dataset.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace lightpath {

namespace {

std::unordered_map<std::int64_t, std::size_t> id_index(const std::vector<PathRecord>& recs) {
    std::unordered_map<std::int64_t, std::size_t> m;
    for (std::size_t i = 0; i < recs.size(); ++i) m[recs[i].id] = i;
    return m;
}

} // namespace

void PathDataset::add(PathRecord rec) {
    if (rec.path.length() < 2) {
        throw std::invalid_argument("path " + std::to_string(rec.id) +
                                    " has fewer than 2 edges");
    }
    if (contains(rec.id)) {
        throw std::invalid_argument("duplicate path id " + std::to_string(rec.id));
    }
    if (rec.rank_score && (*rec.rank_score < 0.0 || *rec.rank_score > 1.0)) {
        throw std::invalid_argument("rank score out of [0,1] for path " +
                                    std::to_string(rec.id));
    }
    records_.push_back(std::move(rec));
}

bool PathDataset::contains(std::int64_t id) const {
    for (const auto& r : records_) {
        if (r.id == id) return true;
    }
    return false;
}

PathRecord& PathDataset::by_id(std::int64_t id) {
    for (auto& r : records_) {
        if (r.id == id) return r;
    }
    throw std::out_of_range("unknown path id " + std::to_string(id));
}

std::vector<std::size_t> PathDataset::indices_with_split(const std::string& split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (records_[i].split == split) out.push_back(i);
    }
    return out;
}

PathDataset PathDataset::load(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open dataset file: " + file);
    PathDataset ds;
    auto index = id_index(ds.records_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto bad = [&](const std::string& why) {
            return std::runtime_error("dataset line " + std::to_string(lineno) + ": " + why);
        };
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw bad("missing tab separator");
        const std::string head = line.substr(0, tab);
        if (head == "label") {
            std::size_t tab2 = line.find('\t', tab + 1);
            if (tab2 == std::string::npos) throw bad("malformed label line");
            const std::string id_str = line.substr(tab + 1, tab2 - tab - 1);
            const std::string kv = line.substr(tab2 + 1);
            std::int64_t id = 0;
            try {
                id = std::stoll(id_str);
            } catch (...) {
                throw bad("bad path id '" + id_str + "'");
            }
            auto it = index.find(id);
            if (it == index.end()) throw bad("label references unknown path " + id_str);
            PathRecord& rec = ds.records_[it->second];
            double v = 0.0;
            if (kv.rfind("tt=", 0) == 0) {
                try {
                    v = std::stod(kv.substr(3));
                } catch (...) {
                    throw bad("bad travel time value");
                }
                rec.travel_time = v;
            } else if (kv.rfind("rank=", 0) == 0) {
                try {
                    v = std::stod(kv.substr(5));
                } catch (...) {
                    throw bad("bad rank value");
                }
                if (v < 0.0 || v > 1.0) throw bad("rank score out of [0,1]");
                rec.rank_score = v;
            } else {
                throw bad("unknown label kind '" + kv + "'");
            }
        } else if (head == "split") {
            std::size_t tab2 = line.find('\t', tab + 1);
            if (tab2 == std::string::npos) throw bad("malformed split line");
            const std::string id_str = line.substr(tab + 1, tab2 - tab - 1);
            const std::string tag = line.substr(tab2 + 1);
            if (tag != "train" && tag != "val" && tag != "test") {
                throw bad("unknown split tag '" + tag + "'");
            }
            std::int64_t id = 0;
            try {
                id = std::stoll(id_str);
            } catch (...) {
                throw bad("bad path id '" + id_str + "'");
            }
            auto it = index.find(id);
            if (it == index.end()) throw bad("split references unknown path " + id_str);
            ds.records_[it->second].split = tag;
        } else {
            PathRecord rec;
            try {
                rec.id = std::stoll(head);
            } catch (...) {
                throw bad("bad path id '" + head + "'");
            }
            std::istringstream edges(line.substr(tab + 1));
            EdgeId e;
            while (edges >> e) rec.path.edge_ids.push_back(e);
            if (rec.path.length() < 2) throw bad("path must have at least 2 edges");
            if (index.count(rec.id)) throw bad("duplicate path id");
            index[rec.id] = ds.records_.size();
            ds.records_.push_back(std::move(rec));
        }
    }
    return ds;
}

void PathDataset::save(const std::string& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write dataset file: " + file);
    char buf[64];
    for (const auto& rec : records_) {
        out << rec.id << '\t';
        for (std::size_t i = 0; i < rec.path.edge_ids.size(); ++i) {
            if (i) out << ' ';
            out << rec.path.edge_ids[i];
        }
        out << '\n';
    }
    for (const auto& rec : records_) {
        if (rec.travel_time) {
            std::snprintf(buf, sizeof(buf), "%.17g", *rec.travel_time);
            out << "label\t" << rec.id << "\ttt=" << buf << '\n';
        }
        if (rec.rank_score) {
            std::snprintf(buf, sizeof(buf), "%.17g", *rec.rank_score);
            out << "label\t" << rec.id << "\trank=" << buf << '\n';
        }
    }
    for (const auto& rec : records_) {
        if (!rec.split.empty()) {
            out << "split\t" << rec.id << '\t' << rec.split << '\n';
        }
    }
}

} // namespace lightpath
