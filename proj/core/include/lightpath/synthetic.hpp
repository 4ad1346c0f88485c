#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lightpath/dataset.hpp"
#include "lightpath/road_network.hpp"

namespace lightpath {

// 4-connected rows x cols grid with two directed edges per neighboring pair.
// Edge lengths are uniform in [50, 500] m; base travel times follow from a
// per-edge speed uniform in [8, 16] m/s.
RoadNetwork generate_grid_network(std::size_t rows, std::size_t cols, std::uint64_t seed);

// n_seeds random start vertices, each expanded `repeats` times into a random
// walk of exactly walk_length edges. Dead ends restart the walk from the
// seed vertex, up to 100 retries per path.
PathDataset generate_synthetic_paths(const RoadNetwork& network, std::size_t n_seeds,
                                     std::size_t walk_length, std::size_t repeats,
                                     std::uint64_t seed);

// Sum of base travel times with a per-edge lognormal congestion factor of
// the given sigma (sigma = 0 gives the exact base-time sum).
double synth_travel_time(const RoadNetwork& network, const Path& path, std::uint64_t noise_seed,
                         double sigma = 0.2);

// Up to k alternative paths between the trajectory's origin and destination,
// found by shortest-path searches under jittered edge weights, each scored
// by Jaccard similarity to the trajectory. The trajectory itself is first,
// with score 1.
std::vector<std::pair<Path, double>> ranking_candidates(const RoadNetwork& network,
                                                        const Path& trajectory, std::size_t k,
                                                        std::uint64_t seed);

} // namespace lightpath
