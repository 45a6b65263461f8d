#include "branch/cloud_io.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "branch/errors.h"

namespace branch
{
Cloud read_xyz(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path);
  Cloud cloud;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line))
  {
    line_no++;
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream ss(line);
    Vec3 p;
    if (!(ss >> p[0] >> p[1] >> p[2]))
      throw IoError(path + ": bad XYZ line " + std::to_string(line_no));
    cloud.push_back(p);
  }
  return cloud;
}

void write_xyz(const std::string &path, const Cloud &cloud)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path);
  char buf[96];
  for (const auto &p : cloud)
  {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
    out << buf;
  }
}

namespace
{
struct PlyProperty
{
  std::string type;
  std::string name;
};
}  // namespace

Cloud read_ply(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw IoError(path + ": not a PLY file");

  size_t vertex_count = 0;
  std::vector<PlyProperty> props;
  bool binary_le = false;
  bool in_vertex_element = false;
  while (std::getline(in, line))
  {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format")
    {
      std::string fmt;
      ss >> fmt;
      binary_le = fmt == "binary_little_endian";
      if (!binary_le && fmt != "ascii")
        throw IoError(path + ": unsupported PLY format " + fmt);
    }
    else if (word == "element")
    {
      std::string name;
      size_t count;
      ss >> name >> count;
      in_vertex_element = name == "vertex";
      if (in_vertex_element)
        vertex_count = count;
      else if (count > 0)
        throw IoError(path + ": unsupported PLY element " + name);
    }
    else if (word == "property" && in_vertex_element)
    {
      PlyProperty p;
      ss >> p.type >> p.name;
      props.push_back(p);
    }
    else if (word == "end_header")
      break;
  }
  int ix = -1, iy = -1, iz = -1;
  for (size_t i = 0; i < props.size(); i++)
  {
    if (props[i].name == "x") ix = static_cast<int>(i);
    if (props[i].name == "y") iy = static_cast<int>(i);
    if (props[i].name == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw IoError(path + ": PLY lacks x/y/z vertex properties");

  Cloud cloud(vertex_count);
  if (binary_le)
  {
    for (size_t n = 0; n < vertex_count; n++)
    {
      Vec3 p;
      for (size_t i = 0; i < props.size(); i++)
      {
        double value = 0.0;
        if (props[i].type == "double" || props[i].type == "float64")
        {
          if (!in.read(reinterpret_cast<char *>(&value), 8))
            throw IoError(path + ": truncated PLY data");
        }
        else if (props[i].type == "float" || props[i].type == "float32")
        {
          float f;
          if (!in.read(reinterpret_cast<char *>(&f), 4))
            throw IoError(path + ": truncated PLY data");
          value = f;
        }
        else
          throw IoError(path + ": unsupported PLY property type " + props[i].type);
        if (static_cast<int>(i) == ix) p[0] = value;
        if (static_cast<int>(i) == iy) p[1] = value;
        if (static_cast<int>(i) == iz) p[2] = value;
      }
      cloud[n] = p;
    }
  }
  else
  {
    for (size_t n = 0; n < vertex_count; n++)
    {
      if (!std::getline(in, line))
        throw IoError(path + ": truncated PLY data");
      std::istringstream ss(line);
      std::vector<double> values(props.size());
      for (auto &v : values)
      {
        if (!(ss >> v))
          throw IoError(path + ": bad PLY vertex line");
      }
      cloud[n] = Vec3(values[static_cast<size_t>(ix)], values[static_cast<size_t>(iy)],
                      values[static_cast<size_t>(iz)]);
    }
  }
  return cloud;
}

void write_ply(const std::string &path, const Cloud &cloud)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path);
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "end_header\n";
  for (const auto &p : cloud)
  {
    double xyz[3] = {p[0], p[1], p[2]};
    out.write(reinterpret_cast<const char *>(xyz), sizeof(xyz));
  }
}

Cloud read_cloud(const std::string &path)
{
  std::ifstream probe(path, std::ios::binary);
  if (!probe)
    throw IoError("cannot open " + path);
  char magic[3] = {0, 0, 0};
  probe.read(magic, 3);
  probe.close();
  if (std::memcmp(magic, "ply", 3) == 0)
    return read_ply(path);
  return read_xyz(path);
}

void write_cloud(const std::string &path, const Cloud &cloud)
{
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".ply")
    write_ply(path, cloud);
  else
    write_xyz(path, cloud);
}

}  // namespace branch
