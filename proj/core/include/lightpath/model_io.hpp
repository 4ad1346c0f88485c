#pragma once

#include <string>

#include "json.hpp"
#include "lightpath/checkpoint.hpp"
#include "lightpath/ssl.hpp"

namespace lightpath {

nlohmann::json encoder_config_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

// kind = "encoder": a single model.
void save_encoder_checkpoint(const std::string& file, const EncoderModel& model,
                             const nlohmann::json& extra = nlohmann::json::object());

// Accepts both kinds; a pretrain checkpoint yields its main encoder.
EncoderModel load_encoder_checkpoint(const std::string& file);

// kind = "pretrain": main and auxiliary encoders plus the relation head,
// stored under the prefixes "main.", "aux." and "head.".
void save_pretrain_checkpoint(const std::string& file, const DualEncoderState& dual,
                              const RelationHead& head,
                              const nlohmann::json& extra = nlohmann::json::object());

struct PretrainCheckpoint {
    DualEncoderState dual;
    RelationHead head;
    nlohmann::json config;
};

PretrainCheckpoint load_pretrain_checkpoint(const std::string& file);

} // namespace lightpath
