#ifndef BRANCH_CLOUD_IO_H
#define BRANCH_CLOUD_IO_H

#include <string>

#include "branch/maths.h"

namespace branch
{
/// Reads a point cloud, auto-detecting binary PLY (by magic) vs ASCII XYZ.
/// Throws IoError on missing files or malformed content.
Cloud read_cloud(const std::string &path);

/// Writes .ply as binary little-endian float64 x,y,z; anything else as ASCII
/// XYZ, one "x y z" per line in meters.
void write_cloud(const std::string &path, const Cloud &cloud);

Cloud read_xyz(const std::string &path);
void write_xyz(const std::string &path, const Cloud &cloud);
Cloud read_ply(const std::string &path);
void write_ply(const std::string &path, const Cloud &cloud);

}  // namespace branch

#endif  // BRANCH_CLOUD_IO_H
