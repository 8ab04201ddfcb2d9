#include "heprep/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace heprep {

namespace {

// ----------------------------------------------------------------- flatten

class Flattener
{
public:
    explicit Flattener(const Document& doc) : doc_(doc) {}

    FlattenResult run()
    {
        for (const auto& tree : doc_.instance_trees) {
            types_ = find_type_tree(doc_, tree.type_tree_name);
            type_cache_.clear();
            path_ = InstancePath{tree.name, {}};
            visit(tree.root);
        }
        return std::move(result_);
    }

private:
    void visit(const InstanceNode& node)
    {
        lineage_.push_back(&node);
        if (!node.points.empty())
            emit(node);
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            path_.indices.push_back(i);
            visit(node.children[i]);
            path_.indices.pop_back();
        }
        lineage_.pop_back();
    }

    const std::vector<const TypeNode*>& types_for(const std::string& type_path)
    {
        auto it = type_cache_.find(type_path);
        if (it == type_cache_.end()) {
            std::vector<const TypeNode*> chain;
            if (types_)
                chain = type_chain(*types_, type_path);
            it = type_cache_.emplace(type_path, std::move(chain)).first;
        }
        return it->second;
    }

    const Value* lookup(std::string_view key, const std::vector<const TypeNode*>& types) const
    {
        const auto local = [&](const std::vector<AttValue>& values) -> const Value* {
            for (const auto& v : values)
                if (v.name == key)
                    return &v.value;
            return nullptr;
        };
        for (auto it = lineage_.rbegin(); it != lineage_.rend(); ++it)
            if (const Value* v = local((*it)->att_values))
                return v;
        for (auto it = types.rbegin(); it != types.rend(); ++it)
            if (const Value* v = local((*it)->att_values))
                return v;
        return nullptr;
    }

    static std::optional<double> as_real(const Value* v)
    {
        if (!v)
            return std::nullopt;
        if (const auto* d = std::get_if<double>(v))
            return *d;
        if (const auto* i = std::get_if<std::int64_t>(v))
            return static_cast<double>(*i);
        return std::nullopt;
    }

    void emit(const InstanceNode& node)
    {
        const auto& types = types_for(node.type_path);

        if (const Value* vis = lookup("visibility", types))
            if (const auto* b = std::get_if<bool>(vis); b && !*b)
                return;

        Primitive proto;
        proto.origin = path_;
        if (const Value* c = lookup("color", types))
            if (const auto* color = std::get_if<Color>(c))
                proto.style.color = *color;
        if (const auto w = as_real(lookup("linewidth", types)); w && *w >= 0.0)
            proto.style.line_width = *w;
        if (const auto m = as_real(lookup("markersize", types)); m && *m >= 0.0)
            proto.style.marker_size = *m;
        if (const Value* l = lookup("layer", types))
            if (const auto* layer = std::get_if<std::string>(l))
                proto.layer = *layer;
        std::string drawas;
        if (const Value* d = lookup("drawas", types))
            if (const auto* s = std::get_if<std::string>(d))
                drawas = normalize_name(*s);

        const auto& pts = node.points;
        const auto add = [&](Shape shape, std::vector<Point3> points) {
            Primitive p = proto;
            p.shape = shape;
            p.points = std::move(points);
            result_.primitives.push_back(std::move(p));
        };
        // Shapes that need more points than given degrade to the next
        // simpler one instead of being dropped.
        const auto line_or_marker = [&](Shape preferred, std::size_t min_points) {
            if (pts.size() >= min_points)
                add(preferred, pts);
            else if (pts.size() >= 2)
                add(Shape::Polyline, pts);
            else
                add(Shape::Marker, pts);
        };

        if (drawas == "point") {
            for (const auto& p : pts)
                add(Shape::Marker, {p});
        } else if (drawas == "polygon") {
            line_or_marker(Shape::Loop, 3);
        } else if (drawas == "prism") {
            if (pts.size() % 2 != 0 || pts.size() < 6) {
                result_.violations.push_back(
                    {"BadPrism", to_string(path_),
                     "prism needs an even number of points, at least 6; got " + std::to_string(pts.size())});
                return;
            }
            const std::size_t n = pts.size() / 2;
            add(Shape::Loop, std::vector<Point3>(pts.begin(), pts.begin() + n));
            add(Shape::Loop, std::vector<Point3>(pts.begin() + n, pts.end()));
            for (std::size_t i = 0; i < n; ++i)
                add(Shape::Polyline, {pts[i], pts[n + i]});
        } else {
            line_or_marker(Shape::Polyline, 2);
        }
    }

    const Document& doc_;
    const TypeTree* types_ = nullptr;
    std::map<std::string, std::vector<const TypeNode*>, std::less<>> type_cache_;
    std::vector<const InstanceNode*> lineage_;
    InstancePath path_;
    FlattenResult result_;
};

// ------------------------------------------------------------ projection

ScreenPoint lerp(const ScreenPoint& a, const ScreenPoint& b, double t)
{
    return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.depth + t * (b.depth - a.depth)};
}

// Clips the camera-space segment to near <= distance <= far.
bool clip_depth(const Camera& cam, Eigen::Vector3d& a, Eigen::Vector3d& b)
{
    double t0 = 0.0;
    double t1 = 1.0;
    const double da = a.z();
    const double dd = b.z() - a.z();
    const auto clip = [&](double p, double q) {
        // p * t <= q
        if (p == 0.0)
            return q >= 0.0;
        const double r = q / p;
        if (p < 0.0) {
            if (r > t1)
                return false;
            t0 = std::max(t0, r);
        } else {
            if (r < t0)
                return false;
            t1 = std::min(t1, r);
        }
        return true;
    };
    if (!clip(-dd, da - cam.near_plane) || !clip(dd, cam.far_plane - da))
        return false;
    const Eigen::Vector3d delta = b - a;
    const Eigen::Vector3d a0 = a;
    if (t0 > 0.0)
        a = a0 + t0 * delta;
    if (t1 < 1.0)
        b = a0 + t1 * delta;
    return true;
}

} // namespace

FlattenResult flatten(const Document& doc)
{
    return Flattener(doc).run();
}

std::vector<ScreenSegment> projected_segments(const Camera& cam, const ViewFrame<double>& frame,
                                              const Primitive& prim)
{
    std::vector<ScreenSegment> out;
    if (prim.shape == Shape::Marker) {
        for (const auto& p : prim.points) {
            const Eigen::Vector3d c = frame.to_camera(p);
            if (c.z() >= cam.near_plane && c.z() <= cam.far_plane) {
                const ScreenPoint s = project_camera_space(cam, c);
                out.push_back({s, s});
            }
        }
        return out;
    }
    const std::size_t n = prim.points.size();
    const std::size_t edges = prim.shape == Shape::Loop ? n : (n == 0 ? 0 : n - 1);
    out.reserve(edges);
    for (std::size_t i = 0; i < edges; ++i) {
        Eigen::Vector3d a = frame.to_camera(prim.points[i]);
        Eigen::Vector3d b = frame.to_camera(prim.points[(i + 1) % n]);
        if (!clip_depth(cam, a, b))
            continue;
        out.push_back({project_camera_space(cam, a), project_camera_space(cam, b)});
    }
    return out;
}

std::optional<ScreenSegment> clip_to_viewport(const Camera& cam, const ScreenSegment& seg)
{
    const double w = cam.width;
    const double h = cam.height;
    const double dx = seg.b.x - seg.a.x;
    const double dy = seg.b.y - seg.a.y;
    double t0 = 0.0;
    double t1 = 1.0;
    const auto clip = [&](double p, double q) {
        if (p == 0.0)
            return q >= 0.0;
        const double r = q / p;
        if (p < 0.0) {
            if (r > t1)
                return false;
            t0 = std::max(t0, r);
        } else {
            if (r < t0)
                return false;
            t1 = std::min(t1, r);
        }
        return true;
    };
    if (!clip(-dx, seg.a.x) || !clip(dx, w - seg.a.x) || !clip(-dy, seg.a.y) || !clip(dy, h - seg.a.y))
        return std::nullopt;
    ScreenSegment out = seg;
    if (t0 > 0.0)
        out.a = lerp(seg.a, seg.b, t0);
    if (t1 < 1.0)
        out.b = lerp(seg.a, seg.b, t1);
    // Keep interpolation noise from pushing endpoints just outside.
    for (ScreenPoint* p : {&out.a, &out.b}) {
        p->x = std::clamp(p->x, 0.0, w);
        p->y = std::clamp(p->y, 0.0, h);
    }
    return out;
}

std::vector<Primitive> cull(const Camera& cam, std::span<const Primitive> prims)
{
    const ViewFrame<double> frame(cam);
    const double n = cam.near_plane;
    const double f = cam.far_plane;

    // Side planes as (a, b, c, d): a*x + b*y + c*dist + d >= 0 inside.
    std::vector<Eigen::Vector4d> planes;
    planes.emplace_back(0.0, 0.0, 1.0, -n);
    planes.emplace_back(0.0, 0.0, -1.0, f);
    if (const auto* p = std::get_if<Perspective<double>>(&cam.projection)) {
        const double ty = std::tan(p->fov_y / 2);
        const double tx = ty * cam.aspect();
        planes.emplace_back(1.0, 0.0, tx, 0.0);
        planes.emplace_back(-1.0, 0.0, tx, 0.0);
        planes.emplace_back(0.0, 1.0, ty, 0.0);
        planes.emplace_back(0.0, -1.0, ty, 0.0);
    } else {
        const double hh = std::get<Orthographic<double>>(cam.projection).height / 2;
        const double hw = hh * cam.aspect();
        planes.emplace_back(1.0, 0.0, 0.0, hw);
        planes.emplace_back(-1.0, 0.0, 0.0, hw);
        planes.emplace_back(0.0, 1.0, 0.0, hh);
        planes.emplace_back(0.0, -1.0, 0.0, hh);
    }
    for (auto& plane : planes)
        plane /= plane.head<3>().norm();

    std::vector<Primitive> kept;
    kept.reserve(prims.size());
    for (const auto& prim : prims) {
        if (prim.points.empty())
            continue;
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        for (const auto& p : prim.points)
            centroid += p;
        centroid /= static_cast<double>(prim.points.size());
        double radius = 0.0;
        for (const auto& p : prim.points)
            radius = std::max(radius, (p - centroid).norm());

        const Eigen::Vector3d c = frame.to_camera(centroid);
        const double slack = 1e-9 * (1.0 + radius + c.norm() + f);
        const bool outside = std::any_of(planes.begin(), planes.end(), [&](const Eigen::Vector4d& plane) {
            return plane.head<3>().dot(c) + plane.w() < -(radius + slack);
        });
        if (!outside)
            kept.push_back(prim);
    }
    return kept;
}

double mean_depth(const Camera& cam, const ViewFrame<double>& frame, const Primitive& prim)
{
    if (prim.points.empty())
        return 0.0;
    double sum = 0.0;
    for (const auto& p : prim.points)
        sum += clamped_depth(cam, frame.forward.dot(p - frame.eye));
    return sum / static_cast<double>(prim.points.size());
}

std::vector<Primitive> depth_sort(const Camera& cam, std::vector<Primitive> prims,
                                  std::span<const std::string> layer_order)
{
    const ViewFrame<double> frame(cam);

    std::map<std::string, std::size_t, std::less<>> listed;
    for (std::size_t i = 0; i < layer_order.size(); ++i)
        listed.try_emplace(layer_order[i], i);
    std::set<std::string, std::less<>> unlisted;
    for (const auto& p : prims)
        if (!listed.count(p.layer))
            unlisted.insert(p.layer);
    std::map<std::string, std::size_t, std::less<>> rank;
    std::size_t next = 0;
    for (const auto& name : unlisted)
        rank[name] = next++;
    for (const auto& [name, index] : listed)
        rank[name] = unlisted.size() + index;

    struct Key
    {
        std::size_t rank;
        double depth;
        std::size_t index;
    };
    std::vector<Key> keys(prims.size());
    for (std::size_t i = 0; i < prims.size(); ++i)
        keys[i] = {rank.find(prims[i].layer)->second, mean_depth(cam, frame, prims[i]), i};
    std::stable_sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (a.rank != b.rank)
            return a.rank < b.rank;
        return a.depth > b.depth;
    });

    std::vector<Primitive> out;
    out.reserve(prims.size());
    for (const auto& k : keys)
        out.push_back(std::move(prims[k.index]));
    return out;
}

std::optional<std::size_t> pick_index(const Camera& cam, std::span<const Primitive> prims, double x,
                                      double y, double tolerance_px)
{
    const ViewFrame<double> frame(cam);
    std::optional<std::size_t> best;
    double best_depth = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < prims.size(); ++i) {
        double near_dist = std::numeric_limits<double>::infinity();
        double near_depth = std::numeric_limits<double>::infinity();
        for (const auto& seg : projected_segments(cam, frame, prims[i])) {
            const double dx = seg.b.x - seg.a.x;
            const double dy = seg.b.y - seg.a.y;
            const double len2 = dx * dx + dy * dy;
            double t = 0.0;
            if (len2 > 0.0)
                t = std::clamp(((x - seg.a.x) * dx + (y - seg.a.y) * dy) / len2, 0.0, 1.0);
            const double px = seg.a.x + t * dx;
            const double py = seg.a.y + t * dy;
            const double dist = std::hypot(x - px, y - py);
            const double depth = seg.a.depth + t * (seg.b.depth - seg.a.depth);
            if (dist < near_dist || (dist == near_dist && depth < near_depth)) {
                near_dist = dist;
                near_depth = depth;
            }
        }
        if (near_dist <= tolerance_px && near_depth <= best_depth) {
            best = i;
            best_depth = near_depth;
        }
    }
    return best;
}

std::optional<InstancePath> pick(const Camera& cam, std::span<const Primitive> prims, double x, double y,
                                 double tolerance_px)
{
    if (const auto index = pick_index(cam, prims, x, y, tolerance_px))
        return prims[*index].origin;
    return std::nullopt;
}

} // namespace heprep
