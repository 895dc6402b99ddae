#pragma once

#include <filesystem>
#include <string_view>

#include "curvetac/mesh.hpp"

namespace curvetac {

enum class MeshFormat { stl, obj };

/// Guess the format from the file extension (.stl / .obj, case-insensitive).
MeshFormat mesh_format_from_path(const std::filesystem::path& path);

/// Vertices closer than this are merged on load (metres).
inline constexpr double kVertexMergeTolerance = 1e-9;

/// Read and validate a mesh. STL may be binary or ASCII; OBJ reads `v` and `f`
/// records only. Throws FormatError on parse failure and ValidationError when
/// the geometry is not a connected manifold.
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path);

TriangleMesh parse_stl(std::string_view bytes);
TriangleMesh parse_obj(std::string_view text);

void save_stl_binary(const TriangleMesh& mesh, const std::filesystem::path& path);
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace curvetac
