#pragma once

#include "heprep/camera.hpp"
#include "heprep/model.hpp"
#include "heprep/scene.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Reference implementations written independently of the library: they
// share only the data types.
namespace heprep::oracle {

/// Materializes the whole lookup chain (instance, ancestor instances,
/// type, ancestor types) and scans it for the first case-insensitive hit.
std::optional<AttValue> resolve_attribute(const Document& doc, const InstancePath& path, const std::string& name);

using Mat4 = std::array<double, 16>; // row-major

Mat4 look_at(const Camera& cam);
Mat4 projection_matrix(const Camera& cam);
Mat4 multiply(const Mat4& a, const Mat4& b);

struct Projected
{
    double x, y, depth;
};

/// Composes viewport * projection * view on a homogeneous point. Returns
/// nullopt when the eye-space distance lies outside [near, far].
std::optional<Projected> project(const Camera& cam, const Point3& p);

/// Window depth of the eye-space distance clamped to [near, far].
double clamped_depth(const Camera& cam, const Point3& p);

/// Order by (layer rank, mean clamped depth descending, input index) by
/// repeatedly extracting the minimum. Returns input indices.
std::vector<std::size_t> depth_sort(const Camera& cam, std::span<const Primitive> prims,
                                    std::span<const std::string> layer_order);

/// Nearest primitive within tolerance measured in screen space; among
/// those, the smallest depth at the closest approach wins and exact ties
/// go to the later primitive. Every vertex must lie between the clip
/// planes.
std::optional<std::size_t> pick(const Camera& cam, std::span<const Primitive> prims, double x, double y,
                                double tol);

} // namespace heprep::oracle
