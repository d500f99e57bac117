#pragma once

#include "stua/model.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace stua::checkpoint {

/// Text format, version 1:
///
///   stua-checkpoint 1
///   meta <key> <value...>
///   tensor <name> <rows> <cols>
///   <rows lines of cols space-separated values, %.17g>
///   end
///
/// Tensors appear in parameter visiting order.
inline constexpr int kFormatVersion = 1;

using Metadata = std::map<std::string, std::string>;

void save(const std::filesystem::path& path, const model::ModelParams& params, const Metadata& meta = {});

/// Overwrites `params` in place. Every tensor of `params` must be present
/// with the same shape; throws Checkpoint otherwise.
Metadata load(const std::filesystem::path& path, model::ModelParams& params);

}  // namespace stua::checkpoint
