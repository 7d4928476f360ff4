#pragma once

#include "voxpath/grid.hpp"
#include "voxpath/paths.hpp"

#include <filesystem>
#include <string>

namespace voxpath {

enum class VolumeDtype { F32, U8 };

/// Raw little-endian payload `<stem>.raw` plus a JSON sidecar `<stem>.json`
/// (dims, spacing, origin, dtype, byte_order). Values run x-fastest. u8
/// payloads are normalized to [0,1] on load. Pass either path; the pair is
/// derived from the stem. Throws voxpath::io_error with byte counts on size
/// mismatches.
ScalarField3 load_volume(const std::filesystem::path& path);
void save_volume(const ScalarField3& field, const std::filesystem::path& path,
                 VolumeDtype dtype = VolumeDtype::F32);

/// CSV columns: path_id,point_index,x,y,z,action (one row per point).
void export_network_csv(const PathNetwork& net, const std::filesystem::path& path);
PathNetwork import_network_csv(const std::filesystem::path& path);

/// ASCII PLY: vertices carry (x,y,z,action); polylines are edge elements.
void export_network_ply(const PathNetwork& net, const std::filesystem::path& path);

}  // namespace voxpath
