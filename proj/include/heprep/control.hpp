#pragma once

#include "heprep/config.hpp"
#include "heprep/scene.hpp"
#include "heprep/source.hpp"
#include "heprep/wire.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace heprep {

struct ViewState
{
    int id = 0;
    Camera camera;
    std::vector<std::string> layer_order;

    bool operator==(const ViewState&) const = default;
};

nlohmann::json camera_to_json(const Camera& cam);
/// Throws Error "bad_request" for a malformed object and "bad_camera" when
/// the camera breaks its invariants.
Camera camera_from_json(const nlohmann::json& j);

nlohmann::json path_to_json(const InstancePath& path);
/// Throws Error "bad_request" for a malformed object.
InstancePath path_from_json(const nlohmann::json& j);

/// The one viewer state of a control service. Requests are applied one
/// mutation at a time; reads run concurrently with each other. Every
/// successful request that changes the state emits a "state_changed"
/// notification carrying the new state, in mutation order.
class Controller
{
public:
    using Notify = std::function<void(const WireMessage&)>;

    /// The first view starts from the config's camera and layer order; the
    /// config's background is used for every render.
    explicit Controller(RenderConfig defaults = {});

    /// Called with the state lock held, so implementations must not block.
    void set_notify(Notify notify);

    /// Never throws; failures become error replies and leave the state
    /// unchanged.
    WireMessage dispatch(const WireMessage& request);

    nlohmann::json state() const;

    /// PNG of the view; throws Error "bad_view" or "no_event".
    std::string render_png(int view_id) const;

private:
    struct Event
    {
        Document doc;
        std::vector<Primitive> primitives;
    };

    nlohmann::json state_locked() const;
    const ViewState& view_locked(const nlohmann::json& payload) const;
    ViewState& view_locked(const nlohmann::json& payload);
    const Event& event_locked() const;
    void commit(const std::function<void()>& change);

    nlohmann::json do_open_source(const nlohmann::json& payload);
    nlohmann::json do_step(bool forward);
    nlohmann::json do_get_tree() const;
    nlohmann::json do_get_attributes(const nlohmann::json& payload) const;
    nlohmann::json do_get_geometry() const;
    nlohmann::json do_set_camera(const nlohmann::json& payload);
    nlohmann::json do_add_view(const nlohmann::json& payload);
    nlohmann::json do_remove_view(const nlohmann::json& payload);
    nlohmann::json do_focus_view(const nlohmann::json& payload);
    nlohmann::json do_set_layers(const nlohmann::json& payload);
    nlohmann::json do_pick(const nlohmann::json& payload);
    nlohmann::json do_select(const nlohmann::json& payload);
    nlohmann::json do_render(const nlohmann::json& payload) const;

    RenderConfig defaults_;
    Notify notify_;

    std::mutex source_mutex_; // serializes source IO and cursor moves
    std::unique_ptr<EventSource> source_;

    mutable std::shared_mutex mutex_;
    std::optional<SourceUri> uri_;
    std::optional<EventCursor> cursor_;
    std::shared_ptr<const Event> event_;
    std::vector<ViewState> views_;
    int focused_ = 0;
    int next_view_id_ = 1;
    std::optional<InstancePath> selected_;
};

} // namespace heprep
