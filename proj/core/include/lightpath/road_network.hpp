#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace lightpath {

using VertexId = std::int64_t;
using EdgeId = std::int64_t;

struct Edge {
    EdgeId id;
    VertexId src;
    VertexId dst;
    double length_m;
    double base_time_s;
};

// Directed road graph. Edges are kept sorted by id, which defines the dense
// vocabulary index used by edge embedding tables.
class RoadNetwork {
public:
    void add_vertex(VertexId v);
    void add_edge(const Edge& e);

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    bool has_vertex(VertexId v) const { return vertices_.count(v) != 0; }
    bool has_edge(EdgeId id) const { return edge_pos_.count(id) != 0; }
    const Edge& edge(EdgeId id) const;

    // Dense index in [0, edge_count) by ascending edge id.
    std::size_t edge_index(EdgeId id) const;
    EdgeId edge_id_at(std::size_t index) const { return edges_[index].id; }

    // Outgoing edge ids of a vertex, ascending. Empty for dead ends.
    const std::vector<EdgeId>& out_edges(VertexId v) const;

    const std::vector<Edge>& edges() const { return edges_; }
    std::vector<VertexId> vertex_ids() const;

    // Text format, one edge per line:
    //   edge_id,src_vertex,dst_vertex,length_m,base_time_s
    static RoadNetwork load(const std::string& file);
    void save(const std::string& file) const;

private:
    std::map<VertexId, std::vector<EdgeId>> vertices_; // vertex -> out edges
    std::vector<Edge> edges_;                          // sorted by id
    std::unordered_map<EdgeId, std::size_t> edge_pos_;
};

// Ordered edge sequence; implicit order indices run 1..N.
struct Path {
    std::vector<EdgeId> edge_ids;

    std::size_t length() const { return edge_ids.size(); }
    bool operator==(const Path&) const = default;
};

// Order-preserving subsequence of a path. `omega` holds the surviving
// 1-based order indices of the parent path and is strictly increasing.
struct SparsePath {
    std::vector<EdgeId> edge_ids;
    std::vector<std::size_t> omega;

    std::size_t length() const { return edge_ids.size(); }
};

struct PathValidation {
    bool ok = true;
    std::size_t index = 0; // first offending position when !ok
    std::string message;
};

// A path is accepted iff all edge ids exist and every adjacent pair of
// edges shares a vertex.
PathValidation validate_path(const RoadNetwork& network, const Path& path);

// Jaccard index of the edge-id sets: 1 iff identical sets, 0 iff disjoint.
double path_similarity(const Path& a, const Path& b);

} // namespace lightpath
