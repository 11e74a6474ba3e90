#pragma once

#include <filesystem>

#include <json.hpp>

#include "bbt/mcmc.hpp"

namespace bbt {

nlohmann::ordered_json to_json(const SamplerConfig& config);
SamplerConfig sampler_config_from_json(const nlohmann::json& j);

/// Binary chain dump:
///   "BBTCHAIN" | u32 version | u64 n | n bytes of JSON metadata |
///   kept rows of (alpha2, loglik, quadform, mu_1..mu_M) as little-endian f64.
/// Metadata carries entities, sampler config, acceptance counts and the row count,
/// so truncation is detected on load.
void save_chain(const ChainSamples& samples, const std::filesystem::path& path);
ChainSamples load_chain(const std::filesystem::path& path);

}  // namespace bbt
