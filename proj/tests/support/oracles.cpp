#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

namespace heprep::oracle {

namespace {

std::string lower(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

struct V3
{
    double x, y, z;
};

V3 sub(V3 a, V3 b)
{
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}

V3 cross(V3 a, V3 b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double dot(V3 a, V3 b)
{
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

V3 unit(V3 a)
{
    const double n = std::sqrt(dot(a, a));
    return {a.x / n, a.y / n, a.z / n};
}

V3 v3(const Eigen::Vector3d& v)
{
    return {v[0], v[1], v[2]};
}

std::array<double, 4> apply(const Mat4& m, const std::array<double, 4>& v)
{
    std::array<double, 4> out{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            out[r] += m[4 * r + c] * v[c];
    return out;
}

double eye_distance(const Camera& cam, const Point3& p)
{
    const auto e = apply(look_at(cam), {p[0], p[1], p[2], 1.0});
    return -e[2];
}

} // namespace

std::optional<AttValue> resolve_attribute(const Document& doc, const InstancePath& path, const std::string& name)
{
    const InstanceTree* itree = nullptr;
    for (const auto& t : doc.instance_trees)
        if (t.name == path.tree_name)
            itree = &t;
    if (!itree)
        return std::nullopt;

    std::vector<const std::vector<AttValue>*> chain;
    std::vector<const InstanceNode*> lineage{&itree->root};
    for (std::size_t i : path.indices) {
        if (i >= lineage.back()->children.size())
            return std::nullopt;
        lineage.push_back(&lineage.back()->children[i]);
    }
    for (auto it = lineage.rbegin(); it != lineage.rend(); ++it)
        chain.push_back(&(*it)->att_values);

    const TypeTree* ttree = nullptr;
    for (const auto& t : doc.type_trees)
        if (t.name == itree->type_tree_name)
            ttree = &t;
    if (ttree) {
        std::vector<std::string> segments;
        std::string seg;
        for (char c : lineage.back()->type_path) {
            if (c == '/') {
                segments.push_back(seg);
                seg.clear();
            } else {
                seg += c;
            }
        }
        segments.push_back(seg);
        std::vector<const TypeNode*> types;
        if (!segments.empty() && segments[0] == ttree->root.name) {
            types.push_back(&ttree->root);
            for (std::size_t k = 1; k < segments.size() && types.size() == k; ++k)
                for (const auto& child : types.back()->children)
                    if (child.name == segments[k]) {
                        types.push_back(&child);
                        break;
                    }
            if (types.size() != segments.size())
                types.clear();
        }
        for (auto it = types.rbegin(); it != types.rend(); ++it)
            chain.push_back(&(*it)->att_values);
    }

    const std::string wanted = lower(name);
    for (const auto* values : chain)
        for (const auto& v : *values)
            if (lower(v.name) == wanted)
                return v;
    return std::nullopt;
}

Mat4 look_at(const Camera& cam)
{
    const V3 eye = v3(cam.eye);
    const V3 f = unit(sub(v3(cam.target), eye));
    const V3 s = unit(cross(f, v3(cam.up)));
    const V3 u = cross(s, f);
    Mat4 rot = {s.x, s.y, s.z, 0, u.x, u.y, u.z, 0, -f.x, -f.y, -f.z, 0, 0, 0, 0, 1};
    Mat4 trans = {1, 0, 0, -eye.x, 0, 1, 0, -eye.y, 0, 0, 1, -eye.z, 0, 0, 0, 1};
    return multiply(rot, trans);
}

Mat4 projection_matrix(const Camera& cam)
{
    const double n = cam.near_plane;
    const double f = cam.far_plane;
    const double aspect = double(cam.width) / double(cam.height);
    if (const auto* p = std::get_if<Perspective<double>>(&cam.projection)) {
        const double fy = 1.0 / std::tan(p->fov_y / 2);
        return {fy / aspect, 0, 0, 0, 0, fy, 0, 0, 0, 0, (f + n) / (n - f), 2 * f * n / (n - f), 0, 0, -1, 0};
    }
    const double t = std::get<Orthographic<double>>(cam.projection).height / 2;
    const double r = t * aspect;
    return {1 / r, 0, 0, 0, 0, 1 / t, 0, 0, 0, 0, -2 / (f - n), -(f + n) / (f - n), 0, 0, 0, 1};
}

Mat4 multiply(const Mat4& a, const Mat4& b)
{
    Mat4 out{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            for (int k = 0; k < 4; ++k)
                out[4 * r + c] += a[4 * r + k] * b[4 * k + c];
    return out;
}

std::optional<Projected> project(const Camera& cam, const Point3& p)
{
    const double d = eye_distance(cam, p);
    if (!(d >= cam.near_plane && d <= cam.far_plane))
        return std::nullopt;
    const double w = cam.width;
    const double h = cam.height;
    // NDC [-1,1] to window: x right, y down, depth [0,1].
    const Mat4 viewport = {w / 2, 0, 0, w / 2, 0, -h / 2, 0, h / 2, 0, 0, 0.5, 0.5, 0, 0, 0, 1};
    const Mat4 clip = multiply(projection_matrix(cam), look_at(cam));
    const auto c = apply(clip, {p[0], p[1], p[2], 1.0});
    const std::array<double, 4> ndc = {c[0] / c[3], c[1] / c[3], c[2] / c[3], 1.0};
    const auto s = apply(viewport, ndc);
    return Projected{s[0], s[1], s[2]};
}

double clamped_depth(const Camera& cam, const Point3& p)
{
    const double d = eye_distance(cam, p);
    // The clip planes map to window depth 0 and 1 by definition.
    if (d <= cam.near_plane)
        return 0.0;
    if (d >= cam.far_plane)
        return 1.0;
    const auto c = apply(projection_matrix(cam), {0.0, 0.0, -d, 1.0});
    return (c[2] / c[3] + 1.0) / 2.0;
}

std::vector<std::size_t> depth_sort(const Camera& cam, std::span<const Primitive> prims,
                                    std::span<const std::string> layer_order)
{
    std::set<std::string> unlisted;
    for (const auto& p : prims)
        if (std::find(layer_order.begin(), layer_order.end(), p.layer) == layer_order.end())
            unlisted.insert(p.layer);
    const auto rank = [&](const std::string& layer) -> std::size_t {
        const auto it = std::find(layer_order.begin(), layer_order.end(), layer);
        if (it != layer_order.end())
            return unlisted.size() + static_cast<std::size_t>(it - layer_order.begin());
        return static_cast<std::size_t>(std::distance(unlisted.begin(), unlisted.find(layer)));
    };
    std::vector<double> depth(prims.size(), 0.0);
    for (std::size_t i = 0; i < prims.size(); ++i) {
        double sum = 0.0;
        for (const auto& p : prims[i].points)
            sum += clamped_depth(cam, p);
        depth[i] = prims[i].points.empty() ? 0.0 : sum / double(prims[i].points.size());
    }

    std::vector<bool> taken(prims.size(), false);
    std::vector<std::size_t> order;
    for (std::size_t round = 0; round < prims.size(); ++round) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < prims.size(); ++i) {
            if (taken[i])
                continue;
            if (!best) {
                best = i;
                continue;
            }
            const auto ri = rank(prims[i].layer);
            const auto rb = rank(prims[*best].layer);
            // Earlier: lower rank, then farther (greater depth), then lower index.
            if (ri < rb || (ri == rb && depth[i] > depth[*best]))
                best = i;
        }
        taken[*best] = true;
        order.push_back(*best);
    }
    return order;
}

std::optional<std::size_t> pick(const Camera& cam, std::span<const Primitive> prims, double x, double y, double tol)
{
    std::optional<std::size_t> best;
    double best_depth = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prims.size(); ++i) {
        const auto& pts = prims[i].points;
        std::vector<std::pair<Point3, Point3>> segments;
        if (prims[i].shape == Shape::Marker) {
            for (const auto& p : pts)
                segments.emplace_back(p, p);
        } else {
            for (std::size_t k = 0; k + 1 < pts.size(); ++k)
                segments.emplace_back(pts[k], pts[k + 1]);
            if (prims[i].shape == Shape::Loop && pts.size() > 1)
                segments.emplace_back(pts.back(), pts.front());
        }
        double dist = std::numeric_limits<double>::infinity();
        double depth = std::numeric_limits<double>::infinity();
        for (const auto& [pa, pb] : segments) {
            const auto a = project(cam, pa);
            const auto b = project(cam, pb);
            if (!a || !b)
                continue;
            const double dx = b->x - a->x;
            const double dy = b->y - a->y;
            const double len2 = dx * dx + dy * dy;
            const double t = len2 > 0 ? std::clamp(((x - a->x) * dx + (y - a->y) * dy) / len2, 0.0, 1.0) : 0.0;
            const double d = std::hypot(x - (a->x + t * dx), y - (a->y + t * dy));
            const double z = a->depth + t * (b->depth - a->depth);
            if (d < dist || (d == dist && z < depth)) {
                dist = d;
                depth = z;
            }
        }
        if (dist <= tol && depth <= best_depth) {
            best = i;
            best_depth = depth;
        }
    }
    return best;
}

} // namespace heprep::oracle
