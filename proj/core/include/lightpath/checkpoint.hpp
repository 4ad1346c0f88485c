#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "lightpath/optim.hpp"

namespace lightpath {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary checkpoint: magic "LPCK", version u32, length-prefixed JSON config
// block, then each parameter in set order as name length u32, name bytes,
// rank u32, one u64 per dimension and the values as little-endian 64-bit
// floats. Round trips are bit-exact.
void save_checkpoint(const std::string& file, const nlohmann::json& config,
                     const ParameterSet& params);

struct Checkpoint {
    nlohmann::json config;
    ParameterSet params;
};

Checkpoint load_checkpoint(const std::string& file);

} // namespace lightpath
