#include "lightpath/road_network.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace lightpath {

void RoadNetwork::add_vertex(VertexId v) {
    vertices_.try_emplace(v);
}

void RoadNetwork::add_edge(const Edge& e) {
    if (!has_vertex(e.src) || !has_vertex(e.dst)) {
        throw std::invalid_argument("add_edge: endpoint vertex does not exist");
    }
    if (e.length_m <= 0.0 || e.base_time_s <= 0.0) {
        throw std::invalid_argument("add_edge: length and base time must be positive");
    }
    if (has_edge(e.id)) {
        throw std::invalid_argument("add_edge: duplicate edge id");
    }
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e.id,
                               [](const Edge& a, EdgeId id) { return a.id < id; });
    edges_.insert(it, e);
    edge_pos_.clear();
    for (std::size_t i = 0; i < edges_.size(); ++i) edge_pos_[edges_[i].id] = i;
    auto& out = vertices_[e.src];
    out.insert(std::lower_bound(out.begin(), out.end(), e.id), e.id);
}

const Edge& RoadNetwork::edge(EdgeId id) const {
    auto it = edge_pos_.find(id);
    if (it == edge_pos_.end()) {
        throw std::out_of_range("unknown edge id " + std::to_string(id));
    }
    return edges_[it->second];
}

std::size_t RoadNetwork::edge_index(EdgeId id) const {
    auto it = edge_pos_.find(id);
    if (it == edge_pos_.end()) {
        throw std::out_of_range("unknown edge id " + std::to_string(id));
    }
    return it->second;
}

const std::vector<EdgeId>& RoadNetwork::out_edges(VertexId v) const {
    static const std::vector<EdgeId> empty;
    auto it = vertices_.find(v);
    return it == vertices_.end() ? empty : it->second;
}

std::vector<VertexId> RoadNetwork::vertex_ids() const {
    std::vector<VertexId> out;
    out.reserve(vertices_.size());
    for (const auto& [v, _] : vertices_) out.push_back(v);
    return out;
}

RoadNetwork RoadNetwork::load(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open network file: " + file);
    RoadNetwork net;
    std::string line;
    std::size_t lineno = 0;
    std::vector<Edge> pending;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Edge e;
        long long id, src, dst;
        double len, bt;
        if (std::sscanf(line.c_str(), "%lld,%lld,%lld,%lf,%lf", &id, &src, &dst, &len, &bt) != 5) {
            throw std::runtime_error("malformed network line " + std::to_string(lineno) + ": " +
                                     line);
        }
        e.id = id;
        e.src = src;
        e.dst = dst;
        e.length_m = len;
        e.base_time_s = bt;
        pending.push_back(e);
    }
    for (const Edge& e : pending) {
        net.add_vertex(e.src);
        net.add_vertex(e.dst);
    }
    for (const Edge& e : pending) net.add_edge(e);
    return net;
}

void RoadNetwork::save(const std::string& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write network file: " + file);
    char buf[160];
    for (const Edge& e : edges_) {
        std::snprintf(buf, sizeof(buf), "%" PRId64 ",%" PRId64 ",%" PRId64 ",%.17g,%.17g\n",
                      e.id, e.src, e.dst, e.length_m, e.base_time_s);
        out << buf;
    }
}

PathValidation validate_path(const RoadNetwork& network, const Path& path) {
    for (std::size_t i = 0; i < path.edge_ids.size(); ++i) {
        if (!network.has_edge(path.edge_ids[i])) {
            return {false, i, "unknown edge " + std::to_string(path.edge_ids[i])};
        }
    }
    for (std::size_t i = 0; i + 1 < path.edge_ids.size(); ++i) {
        const Edge& a = network.edge(path.edge_ids[i]);
        const Edge& b = network.edge(path.edge_ids[i + 1]);
        const bool shares = a.src == b.src || a.src == b.dst || a.dst == b.src || a.dst == b.dst;
        if (!shares) {
            return {false, i + 1,
                    "edges " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                        " share no vertex"};
        }
    }
    return {};
}

double path_similarity(const Path& a, const Path& b) {
    std::set<EdgeId> sa(a.edge_ids.begin(), a.edge_ids.end());
    std::set<EdgeId> sb(b.edge_ids.begin(), b.edge_ids.end());
    std::size_t inter = 0;
    for (EdgeId e : sa) inter += sb.count(e);
    const std::size_t uni = sa.size() + sb.size() - inter;
    if (uni == 0) return 1.0; // both empty
    return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace lightpath
