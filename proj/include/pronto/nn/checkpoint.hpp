#pragma once

#include <filesystem>
#include <string>

#include "pronto/nn/net.hpp"
#include "pronto/nn/spec.hpp"

namespace pronto::nn {

// Model file layout (little-endian): magic "PRNT", u32 version, u32 JSON length, the
// model spec as JSON, then for each weighted layer its weight tensor followed by its
// bias tensor as raw f32 in storage order.
inline constexpr char kModelMagic[4] = {'P', 'R', 'N', 'T'};
inline constexpr std::uint32_t kModelVersion = 1;

struct Checkpoint {
    ModelSpec spec;
    Params<float> params;
};

void save_model(const std::filesystem::path& path, const ModelSpec& spec,
                const Params<float>& params);

Checkpoint load_model(const std::filesystem::path& path);

}  // namespace pronto::nn
