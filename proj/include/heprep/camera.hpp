#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

namespace heprep {

template <typename Scalar>
struct Perspective
{
    Scalar fov_y; // radians, in (0, pi)

    bool operator==(const Perspective&) const = default;
};

template <typename Scalar>
struct Orthographic
{
    Scalar height; // world mm spanned by the viewport height

    bool operator==(const Orthographic&) const = default;
};

template <typename Scalar>
using Projection = std::variant<Perspective<Scalar>, Orthographic<Scalar>>;

/// Right-handed look-at camera. `up` need not be unit length; it is
/// orthonormalized against the view direction.
template <typename Scalar>
struct BasicCamera
{
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

    Vec3 eye = Vec3(0, 0, 10);
    Vec3 target = Vec3::Zero();
    Vec3 up = Vec3::UnitY();
    Projection<Scalar> projection = Perspective<Scalar>{std::numbers::pi_v<Scalar> / 4};
    int width = 800;
    int height = 800;
    Scalar near_plane = 1;
    Scalar far_plane = 10000;

    bool operator==(const BasicCamera& o) const
    {
        return eye == o.eye && target == o.target && up == o.up && projection == o.projection &&
               width == o.width && height == o.height && near_plane == o.near_plane &&
               far_plane == o.far_plane;
    }

    Scalar aspect() const { return Scalar(width) / Scalar(height); }
};

using Camera = BasicCamera<double>;

/// Reason the camera violates its invariants, or nullopt when usable.
template <typename Scalar>
std::optional<std::string> camera_problem(const BasicCamera<Scalar>& cam)
{
    if (!cam.eye.allFinite() || !cam.target.allFinite() || !cam.up.allFinite())
        return "camera vectors must be finite";
    const auto dir = (cam.target - cam.eye).eval();
    if (dir.norm() == Scalar(0))
        return "eye and target coincide";
    if (cam.up.norm() == Scalar(0))
        return "up vector is zero";
    if (dir.normalized().cross(cam.up.normalized()).norm() < Scalar(1e-9))
        return "up vector is parallel to the view direction";
    if (cam.width < 1 || cam.height < 1)
        return "viewport must be at least 1x1";
    if (!(cam.near_plane > Scalar(0)) || !(cam.far_plane > cam.near_plane) || !std::isfinite(cam.far_plane))
        return "clip planes must satisfy 0 < near < far";
    if (const auto* p = std::get_if<Perspective<Scalar>>(&cam.projection)) {
        if (!(p->fov_y > Scalar(0) && p->fov_y < std::numbers::pi_v<Scalar>))
            return "field of view must lie in (0, pi)";
    } else {
        const auto& o = std::get<Orthographic<Scalar>>(cam.projection);
        if (!(o.height > Scalar(0)) || !std::isfinite(o.height))
            return "orthographic height must be positive";
    }
    return std::nullopt;
}

/// Orthonormal look-at frame. Camera space is (right, up, forward) dotted
/// with (p - eye), so the third component is the distance along the view
/// direction (the negated z of the usual right-handed eye space).
template <typename Scalar>
struct ViewFrame
{
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

    Vec3 eye;
    Vec3 right;
    Vec3 up;
    Vec3 forward;

    explicit ViewFrame(const BasicCamera<Scalar>& cam)
        : eye(cam.eye), forward((cam.target - cam.eye).normalized())
    {
        right = forward.cross(cam.up).normalized();
        up = right.cross(forward);
    }

    /// (x, y, distance) in camera space.
    Vec3 to_camera(const Vec3& p) const
    {
        const Vec3 rel = p - eye;
        return Vec3(right.dot(rel), up.dot(rel), forward.dot(rel));
    }
};

template <typename Scalar>
struct BasicScreenPoint
{
    Scalar x;     // pixels, origin top-left
    Scalar y;     // pixels, y down
    Scalar depth; // 0 at the near plane, 1 at the far plane
};

using ScreenPoint = BasicScreenPoint<double>;

/// Maps a camera-space point (x, y, distance) to the screen without any
/// clipping; `distance` must be positive for perspective cameras.
template <typename Scalar>
BasicScreenPoint<Scalar> project_camera_space(const BasicCamera<Scalar>& cam,
                                              const Eigen::Matrix<Scalar, 3, 1>& c)
{
    const Scalar n = cam.near_plane;
    const Scalar f = cam.far_plane;
    const Scalar d = c.z();
    Scalar x_ndc;
    Scalar y_ndc;
    Scalar depth;
    if (const auto* p = std::get_if<Perspective<Scalar>>(&cam.projection)) {
        const Scalar t = std::tan(p->fov_y / 2);
        x_ndc = c.x() / (d * t * cam.aspect());
        y_ndc = c.y() / (d * t);
        depth = f * (d - n) / ((f - n) * d);
    } else {
        const Scalar half_h = std::get<Orthographic<Scalar>>(cam.projection).height / 2;
        x_ndc = c.x() / (half_h * cam.aspect());
        y_ndc = c.y() / half_h;
        depth = (d - n) / (f - n);
    }
    return {(x_ndc + 1) / 2 * Scalar(cam.width), (1 - y_ndc) / 2 * Scalar(cam.height), depth};
}

/// World point to screen. nullopt ("clipped") when the point is outside
/// the near/far range, which includes everything behind the eye.
template <typename Scalar>
std::optional<BasicScreenPoint<Scalar>> project(const BasicCamera<Scalar>& cam,
                                                const Eigen::Matrix<Scalar, 3, 1>& p)
{
    const auto c = ViewFrame<Scalar>(cam).to_camera(p);
    if (!(c.z() >= cam.near_plane && c.z() <= cam.far_plane))
        return std::nullopt;
    return project_camera_space(cam, c);
}

/// Projection depth with the camera distance clamped into [near, far], so
/// the result always lies in [0, 1]. Used as the painter's sort key.
template <typename Scalar>
Scalar clamped_depth(const BasicCamera<Scalar>& cam, Scalar distance)
{
    const Scalar d = std::clamp(distance, cam.near_plane, cam.far_plane);
    const Scalar n = cam.near_plane;
    const Scalar f = cam.far_plane;
    if (std::holds_alternative<Perspective<Scalar>>(cam.projection))
        return f * (d - n) / ((f - n) * d);
    return (d - n) / (f - n);
}

} // namespace heprep
