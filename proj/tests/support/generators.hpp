#pragma once

#include "heprep/camera.hpp"
#include "heprep/model.hpp"
#include "heprep/scene.hpp"

#include <random>
#include <string>
#include <vector>

namespace heprep::testing {

using Rng = std::mt19937_64;

/// Random valid document: every alternative of Value, names that need XML
/// escaping, non-ASCII text, extreme reals and a random layer order.
Document random_document(Rng& rng);

/// Every instance path of the document, trees in order, depth first.
std::vector<InstancePath> all_paths(const Document& doc);

/// Every attribute name the document mentions anywhere.
std::vector<std::string> all_attribute_names(const Document& doc);

/// Camera with random pose, projection, viewport and clip range.
Camera random_camera(Rng& rng);

/// Primitives scattered in and around the camera's frustum. With
/// `inside_depth` every vertex lies strictly between the clip planes.
std::vector<Primitive> random_scene(Rng& rng, const Camera& cam, std::size_t count, bool inside_depth);

/// A world point at camera-space (x, y, distance).
Point3 from_camera_space(const Camera& cam, double x, double y, double distance);

} // namespace heprep::testing
