#include "lightpath/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "lightpath/rng.hpp"

namespace lightpath {

RoadNetwork generate_grid_network(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (rows < 2 || cols < 2) {
        throw std::invalid_argument("grid network needs rows, cols >= 2");
    }
    Rng rng = Rng(seed).fork("grid");
    RoadNetwork net;
    auto vid = [cols](std::size_t r, std::size_t c) {
        return static_cast<VertexId>(r * cols + c);
    };
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) net.add_vertex(vid(r, c));
    }
    EdgeId next_id = 0;
    auto link = [&](VertexId a, VertexId b) {
        for (auto [src, dst] : {std::pair{a, b}, std::pair{b, a}}) {
            const double length = rng.uniform(50.0, 500.0);
            const double speed = rng.uniform(8.0, 16.0);
            net.add_edge({next_id++, src, dst, length, length / speed});
        }
    };
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) link(vid(r, c), vid(r, c + 1));
            if (r + 1 < rows) link(vid(r, c), vid(r + 1, c));
        }
    }
    return net;
}

namespace {

// One walk of exactly walk_length edges starting at `start`; false if a
// dead end was hit before reaching the target length.
bool try_walk(const RoadNetwork& net, VertexId start, std::size_t walk_length, Rng& rng,
              Path& out) {
    out.edge_ids.clear();
    VertexId cur = start;
    for (std::size_t i = 0; i < walk_length; ++i) {
        const auto& outs = net.out_edges(cur);
        if (outs.empty()) return false;
        const EdgeId e = outs[rng.uniform_index(outs.size())];
        out.edge_ids.push_back(e);
        cur = net.edge(e).dst;
    }
    return true;
}

} // namespace

PathDataset generate_synthetic_paths(const RoadNetwork& network, std::size_t n_seeds,
                                     std::size_t walk_length, std::size_t repeats,
                                     std::uint64_t seed) {
    if (walk_length < 2) {
        throw std::invalid_argument("walk_length must be >= 2");
    }
    if (network.vertex_count() == 0) {
        throw std::invalid_argument("empty network");
    }
    Rng root(seed);
    Rng pick = root.fork("seed-vertices");
    const auto vertices = network.vertex_ids();
    std::vector<std::size_t> chosen =
        pick.sample_distinct(vertices.size(), std::min(n_seeds, vertices.size()));
    while (chosen.size() < n_seeds) {
        // more seeds than vertices: continue drawing with replacement
        chosen.push_back(pick.uniform_index(vertices.size()));
    }

    PathDataset ds;
    std::int64_t next_id = 0;
    constexpr int kMaxRetries = 100;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        const VertexId start = vertices[chosen[s]];
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            Rng walk_rng = root.fork("walk", s * 1000003ull + rep);
            Path p;
            bool ok = false;
            for (int attempt = 0; attempt < kMaxRetries && !ok; ++attempt) {
                ok = try_walk(network, start, walk_length, walk_rng, p);
            }
            if (!ok) {
                throw std::runtime_error(
                    "could not complete a walk of length " + std::to_string(walk_length) +
                    " from vertex " + std::to_string(start));
            }
            PathRecord rec;
            rec.id = next_id++;
            rec.path = std::move(p);
            ds.add(std::move(rec));
        }
    }
    return ds;
}

double synth_travel_time(const RoadNetwork& network, const Path& path, std::uint64_t noise_seed,
                         double sigma) {
    Rng rng = Rng(noise_seed).fork("travel-time");
    double total = 0.0;
    for (EdgeId e : path.edge_ids) {
        const double factor = sigma > 0.0 ? rng.lognormal(sigma) : 1.0;
        total += network.edge(e).base_time_s * factor;
    }
    return total;
}

namespace {

// Shortest path between two vertices under the given per-edge weights.
// Returns an empty path when unreachable.
Path dijkstra(const RoadNetwork& net, VertexId from, VertexId to,
              const std::unordered_map<EdgeId, double>& weight) {
    using Entry = std::pair<double, VertexId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::unordered_map<VertexId, double> dist;
    std::unordered_map<VertexId, EdgeId> via;
    heap.push({0.0, from});
    dist[from] = 0.0;
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        if (v == to) break;
        for (EdgeId e : net.out_edges(v)) {
            const Edge& edge = net.edge(e);
            const double nd = d + weight.at(e);
            auto it = dist.find(edge.dst);
            if (it == dist.end() || nd < it->second) {
                dist[edge.dst] = nd;
                via[edge.dst] = e;
                heap.push({nd, edge.dst});
            }
        }
    }
    Path p;
    if (!dist.count(to) || from == to) return p;
    VertexId cur = to;
    while (cur != from) {
        const EdgeId e = via.at(cur);
        p.edge_ids.push_back(e);
        cur = net.edge(e).src;
    }
    std::reverse(p.edge_ids.begin(), p.edge_ids.end());
    return p;
}

} // namespace

std::vector<std::pair<Path, double>> ranking_candidates(const RoadNetwork& network,
                                                        const Path& trajectory, std::size_t k,
                                                        std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("ranking_candidates: k must be >= 1");
    if (trajectory.edge_ids.empty()) {
        throw std::invalid_argument("ranking_candidates: empty trajectory");
    }
    const VertexId from = network.edge(trajectory.edge_ids.front()).src;
    const VertexId to = network.edge(trajectory.edge_ids.back()).dst;

    std::vector<std::pair<Path, double>> out;
    out.emplace_back(trajectory, 1.0);

    Rng root(seed);
    std::set<std::vector<EdgeId>> seen;
    seen.insert(trajectory.edge_ids);

    const std::size_t max_attempts = 20 * k;
    std::size_t attempt = 0;
    constexpr double kJitterSigma = 0.6;
    while (out.size() < k + 1 && attempt < max_attempts) {
        Rng jitter = root.fork("jitter", attempt);
        ++attempt;
        std::unordered_map<EdgeId, double> weight;
        for (const Edge& e : network.edges()) {
            weight[e.id] = e.length_m * jitter.lognormal(kJitterSigma);
        }
        Path cand = dijkstra(network, from, to, weight);
        if (cand.edge_ids.size() < 2) continue;
        if (!seen.insert(cand.edge_ids).second) continue;
        out.emplace_back(cand, path_similarity(cand, trajectory));
    }
    if (out.size() == 1) {
        throw std::runtime_error("ranking_candidates: no alternative route found");
    }
    return out;
}

} // namespace lightpath
