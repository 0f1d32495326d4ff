#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgwave/net.hpp"

namespace cgw {

/// Writes manifest.json plus one little-endian f64 file per epsilon (row-major, t-major).
/// Returns the written paths, manifest first.
std::vector<std::filesystem::path> save_net(const Net& net, const std::filesystem::path& dir,
                                            const std::optional<SpacingRule>& rule = {});

Net load_net(const std::filesystem::path& dir);

/// CSV with columns epsilon,value.
void write_sup_csv(const std::filesystem::path& file, const EpsilonLadder& ladder,
                   const std::vector<double>& values);

/// Fixed-format decimal text for doubles, shared by every CSV writer.
std::string format_double(double v);

}  // namespace cgw
