#include "heprep/control.hpp"

#include "heprep/error.hpp"

#include <algorithm>

namespace heprep {

using nlohmann::json;

namespace {

Error bad_request(const std::string& message)
{
    return Error("bad_request", message);
}

const json& field(const json& payload, const char* name)
{
    if (!payload.is_object() || !payload.contains(name))
        throw bad_request(std::string("missing field '") + name + "'");
    return payload[name];
}

double number_field(const json& payload, const char* name)
{
    const json& v = field(payload, name);
    if (!v.is_number())
        throw bad_request(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

int int_field(const json& payload, const char* name)
{
    const json& v = field(payload, name);
    if (!v.is_number_integer())
        throw bad_request(std::string("field '") + name + "' must be an integer");
    return v.get<int>();
}

json vector_to_json(const Eigen::Vector3d& v)
{
    return json::array({v.x(), v.y(), v.z()});
}

Eigen::Vector3d vector_from_json(const json& payload, const char* name)
{
    const json& v = field(payload, name);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
        throw bad_request(std::string("field '") + name + "' must be [x,y,z]");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::vector<std::string> strings_from_json(const json& payload, const char* name)
{
    const json& v = field(payload, name);
    if (!v.is_array())
        throw bad_request(std::string("field '") + name + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string())
            throw bad_request(std::string("field '") + name + "' must be a list of strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

json color_to_json(const Color& c)
{
    return json::array({c.r, c.g, c.b, c.a});
}

json value_to_json(const Value& v)
{
    return std::visit(
        [](const auto& x) -> json {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Color>)
                return color_to_json(x);
            else
                return x;
        },
        v);
}

std::string_view shape_name(Shape s)
{
    switch (s) {
    case Shape::Marker:
        return "marker";
    case Shape::Polyline:
        return "polyline";
    case Shape::Loop:
        return "loop";
    }
    return "polyline";
}

json skeleton(const InstanceNode& node)
{
    json children = json::array();
    for (const auto& c : node.children)
        children.push_back(skeleton(c));
    const auto slash = node.type_path.rfind('/');
    return {{"name", slash == std::string::npos ? node.type_path : node.type_path.substr(slash + 1)},
            {"typePath", node.type_path},
            {"childCount", node.children.size()},
            {"children", std::move(children)}};
}

json cursor_to_json(const EventCursor& c)
{
    return {{"sourceId", c.source_id}, {"index", c.index}, {"count", c.count ? json(*c.count) : json(nullptr)}};
}

} // namespace

json camera_to_json(const Camera& cam)
{
    json j = {{"eye", vector_to_json(cam.eye)},
              {"target", vector_to_json(cam.target)},
              {"up", vector_to_json(cam.up)},
              {"width", cam.width},
              {"height", cam.height},
              {"near", cam.near_plane},
              {"far", cam.far_plane}};
    if (const auto* p = std::get_if<Perspective<double>>(&cam.projection))
        j["fovY"] = p->fov_y;
    else
        j["orthoHeight"] = std::get<Orthographic<double>>(cam.projection).height;
    return j;
}

Camera camera_from_json(const json& j)
{
    if (!j.is_object())
        throw bad_request("camera must be an object");
    Camera cam;
    cam.eye = vector_from_json(j, "eye");
    cam.target = vector_from_json(j, "target");
    cam.up = vector_from_json(j, "up");
    cam.width = int_field(j, "width");
    cam.height = int_field(j, "height");
    cam.near_plane = number_field(j, "near");
    cam.far_plane = number_field(j, "far");
    const bool persp = j.contains("fovY");
    const bool ortho = j.contains("orthoHeight");
    if (persp == ortho)
        throw bad_request("camera needs exactly one of fovY and orthoHeight");
    if (persp)
        cam.projection = Perspective<double>{number_field(j, "fovY")};
    else
        cam.projection = Orthographic<double>{number_field(j, "orthoHeight")};
    if (const auto problem = camera_problem(cam))
        throw Error("bad_camera", *problem);
    return cam;
}

json path_to_json(const InstancePath& path)
{
    return {{"tree", path.tree_name}, {"indices", path.indices}};
}

InstancePath path_from_json(const json& j)
{
    const json& tree = field(j, "tree");
    const json& indices = field(j, "indices");
    if (!tree.is_string() || !indices.is_array())
        throw bad_request("path must be {tree, indices}");
    InstancePath path{tree.get<std::string>(), {}};
    for (const auto& i : indices) {
        if (!i.is_number_unsigned())
            throw bad_request("path indices must be non-negative integers");
        path.indices.push_back(i.get<std::size_t>());
    }
    return path;
}

Controller::Controller(RenderConfig defaults) : defaults_(std::move(defaults))
{
    validate(defaults_);
    views_.push_back(ViewState{next_view_id_++, defaults_.to_camera(), defaults_.layers});
    focused_ = views_.front().id;
}

void Controller::set_notify(Notify notify)
{
    std::unique_lock lock(mutex_);
    notify_ = std::move(notify);
}

WireMessage Controller::dispatch(const WireMessage& request)
{
    if (request.kind != MessageKind::Request)
        return make_error(request.id, "bad_request", "expected a request");
    const json& p = request.payload;
    const std::string& m = request.method;
    try {
        json result;
        if (m == "hello")
            result = {{"protocol", protocol_name}};
        else if (m == "get_state")
            result = state();
        else if (m == "open_source")
            result = do_open_source(p);
        else if (m == "next_event")
            result = do_step(true);
        else if (m == "prev_event")
            result = do_step(false);
        else if (m == "get_tree")
            result = do_get_tree();
        else if (m == "get_attributes")
            result = do_get_attributes(p);
        else if (m == "get_geometry")
            result = do_get_geometry();
        else if (m == "set_camera")
            result = do_set_camera(p);
        else if (m == "add_view")
            result = do_add_view(p);
        else if (m == "remove_view")
            result = do_remove_view(p);
        else if (m == "focus_view")
            result = do_focus_view(p);
        else if (m == "set_layers")
            result = do_set_layers(p);
        else if (m == "pick")
            result = do_pick(p);
        else if (m == "select")
            result = do_select(p);
        else if (m == "render")
            result = do_render(p);
        else
            return make_error(request.id, "unknown_method", "unknown method '" + m + "'");
        return make_reply(request, std::move(result));
    } catch (const Error& e) {
        return make_error(request.id, e.code(), e.what());
    } catch (const std::exception& e) {
        return make_error(request.id, "internal", e.what());
    }
}

json Controller::state() const
{
    std::shared_lock lock(mutex_);
    return state_locked();
}

json Controller::state_locked() const
{
    json views = json::array();
    for (const auto& v : views_)
        views.push_back({{"viewId", v.id}, {"camera", camera_to_json(v.camera)}, {"layerOrder", v.layer_order}});
    return {{"source", uri_ ? json(uri_->to_string()) : json(nullptr)},
            {"cursor", cursor_ ? cursor_to_json(*cursor_) : json(nullptr)},
            {"views", std::move(views)},
            {"focusedView", focused_},
            {"selected", selected_ ? path_to_json(*selected_) : json(nullptr)}};
}

void Controller::commit(const std::function<void()>& change)
{
    std::unique_lock lock(mutex_);
    const json before = state_locked();
    change();
    json after = state_locked();
    if (after != before && notify_)
        notify_(make_notification("state_changed", std::move(after)));
}

const ViewState& Controller::view_locked(const json& payload) const
{
    const int id = int_field(payload, "viewId");
    const auto it = std::find_if(views_.begin(), views_.end(), [&](const ViewState& v) { return v.id == id; });
    if (it == views_.end())
        throw Error("bad_view", "no view " + std::to_string(id));
    return *it;
}

ViewState& Controller::view_locked(const json& payload)
{
    return const_cast<ViewState&>(std::as_const(*this).view_locked(payload));
}

const Controller::Event& Controller::event_locked() const
{
    if (!event_)
        throw Error("no_event", "no event loaded");
    return *event_;
}

json Controller::do_open_source(const json& payload)
{
    const json& uri_field = field(payload, "uri");
    if (!uri_field.is_string())
        throw bad_request("uri must be a string");
    std::lock_guard source_lock(source_mutex_);
    const SourceUri uri = parse_uri(uri_field.get<std::string>());
    auto source = open_source(uri);
    if (source->count() == 0)
        throw Error("empty_source", uri.to_string() + " has no events");
    auto event = std::make_shared<Event>();
    event->doc = source->get_event(0);
    event->primitives = flatten(event->doc).primitives;
    const EventCursor cursor{uri.to_string(), 0, source->count()};
    commit([&] {
        uri_ = uri;
        cursor_ = cursor;
        event_ = event;
        selected_.reset();
    });
    source_ = std::move(source);
    return {{"count", cursor.count.value()}, {"index", 0}};
}

json Controller::do_step(bool forward)
{
    std::lock_guard source_lock(source_mutex_);
    EventCursor current;
    {
        std::shared_lock lock(mutex_);
        if (!cursor_ || !source_)
            throw Error("no_source", "no source is open");
        current = *cursor_;
    }
    const EventCursor moved = forward ? next(current) : prev(current);
    if (moved.index != current.index) {
        auto event = std::make_shared<Event>();
        event->doc = source_->get_event(moved.index);
        event->primitives = flatten(event->doc).primitives;
        commit([&] {
            cursor_ = moved;
            event_ = event;
            selected_.reset();
        });
    }
    return {{"index", moved.index}};
}

json Controller::do_get_tree() const
{
    std::shared_lock lock(mutex_);
    const Document& doc = event_locked().doc;
    json trees = json::array();
    for (const auto& t : doc.instance_trees)
        trees.push_back({{"name", t.name}, {"typeTree", t.type_tree_name}, {"root", skeleton(t.root)}});
    return {{"trees", std::move(trees)}};
}

json Controller::do_get_attributes(const json& payload) const
{
    const InstancePath path = path_from_json(field(payload, "path"));
    std::shared_lock lock(mutex_);
    const Document& doc = event_locked().doc;
    try {
        json attrs = json::array();
        for (const auto& r : resolve_all_attributes(doc, path))
            attrs.push_back({{"name", r.attribute.name},
                             {"type", value_type_name(r.attribute.value)},
                             {"value", value_to_json(r.attribute.value)},
                             {"origin", to_string(r.origin)}});
        return {{"path", path_to_json(path)}, {"attributes", std::move(attrs)}};
    } catch (const PathError& e) {
        throw Error("bad_path", e.what());
    }
}

json Controller::do_get_geometry() const
{
    std::shared_lock lock(mutex_);
    const Event& event = event_locked();
    json prims = json::array();
    for (const auto& p : event.primitives) {
        json points = json::array();
        for (const auto& pt : p.points)
            points.push_back(vector_to_json(pt));
        prims.push_back({{"shape", shape_name(p.shape)},
                         {"points", std::move(points)},
                         {"color", color_to_json(p.style.color)},
                         {"lineWidth", p.style.line_width},
                         {"markerSize", p.style.marker_size},
                         {"layer", p.layer},
                         {"path", path_to_json(p.origin)}});
    }
    return {{"primitives", std::move(prims)}, {"layerOrder", event.doc.layer_order}};
}

json Controller::do_set_camera(const json& payload)
{
    const Camera cam = camera_from_json(field(payload, "camera"));
    commit([&] { view_locked(payload).camera = cam; });
    return json::object();
}

json Controller::do_add_view(const json& payload)
{
    std::optional<Camera> cam;
    std::optional<std::vector<std::string>> layers;
    if (payload.is_object() && payload.contains("camera"))
        cam = camera_from_json(payload["camera"]);
    if (payload.is_object() && payload.contains("layerOrder"))
        layers = strings_from_json(payload, "layerOrder");
    int id = 0;
    commit([&] {
        const auto focused = std::find_if(views_.begin(), views_.end(),
                                          [&](const ViewState& v) { return v.id == focused_; });
        ViewState view{next_view_id_++, cam ? *cam : focused->camera,
                       layers ? *layers : focused->layer_order};
        id = view.id;
        views_.push_back(std::move(view));
    });
    return {{"viewId", id}};
}

json Controller::do_remove_view(const json& payload)
{
    commit([&] {
        const ViewState& view = view_locked(payload);
        if (views_.size() == 1)
            throw Error("last_view", "cannot remove the only view");
        const auto it = views_.begin() + (&view - views_.data());
        const bool was_focused = it->id == focused_;
        const auto next_it = views_.erase(it);
        if (was_focused)
            focused_ = (next_it == views_.end() ? views_.back() : *next_it).id;
    });
    return json::object();
}

json Controller::do_focus_view(const json& payload)
{
    commit([&] { focused_ = view_locked(payload).id; });
    return json::object();
}

json Controller::do_set_layers(const json& payload)
{
    const auto layers = strings_from_json(payload, "layerOrder");
    commit([&] { view_locked(payload).layer_order = layers; });
    return json::object();
}

json Controller::do_pick(const json& payload)
{
    const double x = number_field(payload, "x");
    const double y = number_field(payload, "y");
    const double tol = payload.contains("tol") ? number_field(payload, "tol") : 3.0;
    if (!std::isfinite(x) || !std::isfinite(y) || !(tol >= 0) || !std::isfinite(tol))
        throw bad_request("pick needs finite x, y and a non-negative tol");
    std::optional<InstancePath> hit;
    commit([&] {
        const ViewState& view = view_locked(payload);
        const Event& event = event_locked();
        hit = pick(view.camera, event.primitives, x, y, tol);
        selected_ = hit;
    });
    return {{"path", hit ? path_to_json(*hit) : json(nullptr)}};
}

json Controller::do_select(const json& payload)
{
    const json& p = field(payload, "path");
    std::optional<InstancePath> path;
    if (!p.is_null())
        path = path_from_json(p);
    commit([&] {
        if (path) {
            try {
                resolve_path(event_locked().doc, *path);
            } catch (const PathError& e) {
                throw Error("bad_path", e.what());
            }
        }
        selected_ = path;
    });
    return json::object();
}

json Controller::do_render(const json& payload) const
{
    const int id = int_field(payload, "viewId");
    std::string png = base64_encode(render_png(id));
    return {{"viewId", id}, {"png", std::move(png)}};
}

std::string Controller::render_png(int view_id) const
{
    std::shared_lock lock(mutex_);
    const ViewState& view = view_locked(json{{"viewId", view_id}});
    const Event& event = event_locked();
    const auto layers = view.layer_order.empty() ? std::span<const std::string>(event.doc.layer_order)
                                                 : std::span<const std::string>(view.layer_order);
    return render_primitives(event.primitives, view.camera, layers, defaults_.background_color(),
                             OutputFormat::Png)
        .bytes;
}

} // namespace heprep
