#pragma once

#include "heprep/camera.hpp"
#include "heprep/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heprep {

enum class Shape { Marker, Polyline, Loop };

struct Style
{
    Color color;              // default opaque white
    double line_width = 1.0;  // px
    double marker_size = 3.0; // px

    bool operator==(const Style&) const = default;
};

/// A fully resolved drawable. Markers carry one point, polylines at least
/// two, loops at least three (closed implicitly).
struct Primitive
{
    Shape shape = Shape::Polyline;
    std::vector<Point3> points;
    Style style;
    std::string layer = "default";
    InstancePath origin;

    bool operator==(const Primitive&) const = default;
};

struct FlattenResult
{
    std::vector<Primitive> primitives;
    std::vector<Violation> violations; // instances skipped, e.g. malformed prisms
};

/// Depth-first walk of every instance tree emitting wireframe primitives
/// from the resolved drawas / color / linewidth / markersize / visibility /
/// layer attributes. Prisms take 2n points: bottom face then top face.
FlattenResult flatten(const Document& doc);

struct ScreenSegment
{
    ScreenPoint a;
    ScreenPoint b;
};

/// Screen-space segments of a primitive after clipping each world segment
/// to the near/far range. Markers yield one degenerate segment per visible
/// point; loops include the closing edge.
std::vector<ScreenSegment> projected_segments(const Camera& cam, const ViewFrame<double>& frame,
                                              const Primitive& prim);

/// Liang-Barsky clip against the closed viewport rectangle [0,W] x [0,H].
std::optional<ScreenSegment> clip_to_viewport(const Camera& cam, const ScreenSegment& seg);

/// Drops primitives whose bounding sphere lies entirely outside the view
/// frustum. Never drops a primitive that could touch the viewport.
std::vector<Primitive> cull(const Camera& cam, std::span<const Primitive> prims);

/// Mean clamped projection depth over the primitive's vertices.
double mean_depth(const Camera& cam, const ViewFrame<double>& frame, const Primitive& prim);

/// Painter's order: layer rank (unlisted layers first, by name; then
/// `layer_order`), then mean depth far to near, then input order.
std::vector<Primitive> depth_sort(const Camera& cam, std::vector<Primitive> prims,
                                  std::span<const std::string> layer_order);

/// Index of the primitive picked at (x, y): among primitives whose projected
/// geometry passes within `tolerance_px`, the one with the smallest depth at
/// its nearest approach. Exact depth ties go to the later primitive.
std::optional<std::size_t> pick_index(const Camera& cam, std::span<const Primitive> prims, double x,
                                      double y, double tolerance_px);

std::optional<InstancePath> pick(const Camera& cam, std::span<const Primitive> prims, double x, double y,
                                 double tolerance_px);

} // namespace heprep
