#pragma once

#include "curvetac/mesh.hpp"

namespace curvetac {

// Procedural membranes used by tests, fixtures and the mesh generator tool.

/// Subdivided icosahedron projected onto a sphere; 10 * 4^n + 2 vertices.
TriangleMesh make_icosphere(int subdivisions, double radius = 1.0, const Vec3& centre = Vec3::Zero());

/// Flat square grid in the plane z = `height`, spanning [-half_extent, half_extent]^2,
/// with `cells` quads per side. Normals point along +z.
TriangleMesh make_grid(int cells, double half_extent, double height = 0.0);

/// Flat mesh of near-equilateral triangles in the plane z = `height`:
/// `cells` edges per row across [-half_extent, half_extent], rows spaced
/// sqrt(3)/2 apart with every other row shifted by half an edge. The middle
/// row lies on y = 0 unshifted, so even `cells` put a vertex at the origin.
TriangleMesh make_tri_grid(int cells, double half_extent, double height = 0.0);

/// Open tube around the z axis from z0 to z1 with outward normals.
TriangleMesh make_cylinder(double radius, double z0, double z1, int segments, int rings);

/// Finger-shaped membrane: open tube from z = 0 to `length` capped by a
/// hemisphere, axis along +z, outward normals.
TriangleMesh make_fingertip(double radius, double length, int segments, int tube_rings, int cap_rings);

}  // namespace curvetac
