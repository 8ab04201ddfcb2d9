// Regenerates the frozen test inputs under tests/data. Not run by ctest;
// rerunning it must be followed by regenerating the goldens.

#include "heprep/xmlio.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace heprep;

namespace {

/// Platform-independent uniform real in [lo, hi).
struct Uniform
{
    std::mt19937_64 rng;

    double operator()(double lo, double hi) { return lo + (hi - lo) * double(rng() >> 11) * 0x1.0p-53; }
};

double mm(double v)
{
    return std::round(v * 1000.0) / 1000.0;
}

Point3 pt(double x, double y, double z)
{
    return {mm(x), mm(y), mm(z)};
}

AttValue att(std::string name, Value v)
{
    return {std::move(name), std::move(v)};
}

void write(const fs::path& p, const std::string& bytes)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
    std::cout << p.string() << " (" << bytes.size() << " bytes)\n";
}

/// One type, one instance, one segment through the origin.
Document small_fixture()
{
    Document doc;
    TypeNode track{"Track",
                   {{"momentum", "track momentum", "physics", "GeV"}},
                   {att("drawas", std::string("line")), att("color", Color{1.0, 0.5, 0.0, 1.0}),
                    att("linewidth", std::int64_t{3}), att("momentum", 12.5)},
                   {}};
    doc.type_trees.push_back({"Types", "1.0", track});
    InstanceNode segment{"Track", {pt(-600, 0, 0), pt(600, 0, 0)}, {att("charge", std::int64_t{-1})}, {}};
    doc.instance_trees.push_back({"Event", "1.0", "Types", segment});
    return doc;
}

Document empty_fixture()
{
    Document doc;
    doc.type_trees.push_back({"Types", "1.0", TypeNode{"Detector", {}, {att("drawas", std::string("line"))}, {}}});
    doc.instance_trees.push_back({"Event", "1.0", "Types", InstanceNode{"Detector", {}, {}, {}}});
    return doc;
}

TypeNode glast_types()
{
    const auto s = [](const char* v) { return Value(std::string(v)); };
    TypeNode plane{"Plane", {{"view", "strip direction", "geometry", ""}}, {att("drawas", s("polygon"))}, {}};
    TypeNode tower{"Tower", {{"tower", "tower index", "geometry", ""}}, {}, {plane}};
    TypeNode tracker{"Tracker", {}, {att("layer", s("tracker")), att("color", Color{0.25, 0.55, 1.0, 1.0})}, {tower}};

    TypeNode log{"Log", {{"energy", "deposited energy", "physics", "MeV"}}, {att("drawas", s("prism"))}, {}};
    TypeNode module{"Module", {}, {}, {log}};
    TypeNode cal{"Calorimeter", {}, {att("layer", s("cal")), att("color", Color{0.55, 0.35, 0.1, 1.0})}, {module}};

    TypeNode tile{"Tile", {}, {att("drawas", s("polygon"))}, {}};
    TypeNode acd{"ACD", {}, {att("layer", s("acd")), att("color", Color{0.2, 0.6, 0.3, 1.0})}, {tile}};

    TypeNode track{"Track",
                   {{"momentum", "track momentum", "physics", "GeV"}},
                   {att("drawas", s("line")), att("color", Color{1.0, 0.2, 0.2, 1.0}), att("linewidth", 2.0)},
                   {}};
    TypeNode hit{"Hit", {}, {att("drawas", s("point")), att("color", Color{1.0, 1.0, 0.3, 1.0}),
                             att("markersize", std::int64_t{3})}, {}};
    TypeNode deposit{"Deposit", {}, {att("drawas", s("point")), att("color", Color{1.0, 0.6, 0.0, 1.0}),
                                     att("markersize", std::int64_t{7})}, {}};
    TypeNode event{"Event", {}, {att("layer", s("event"))}, {track, hit, deposit}};

    return TypeNode{"LAT",
                    {{"drawas", "drawing primitive", "draw", ""}, {"color", "line color", "draw", ""}},
                    {att("drawas", s("line")), att("color", Color{1.0, 1.0, 1.0, 1.0})},
                    {tracker, cal, acd, event}};
}

constexpr double pitch = 374.5;
constexpr int planes = 36;
constexpr double tracker_bottom = 30.0;
constexpr double tracker_top = 630.0;

double plane_y(int k)
{
    return tracker_bottom + (tracker_top - tracker_bottom) * k / (planes - 1);
}

InstanceNode square_y(const std::string& type, double cx, double y, double cz, double half)
{
    return {type, {pt(cx - half, y, cz - half), pt(cx + half, y, cz - half), pt(cx + half, y, cz + half),
                   pt(cx - half, y, cz + half)}, {}, {}};
}

Document glast_fixture(Uniform& u, int tracks, bool with_geometry)
{
    InstanceNode root{"LAT", {}, {att("run", std::int64_t{77}), att("event", std::int64_t{1042})}, {}};
    if (with_geometry) {
        InstanceNode tracker{"LAT/Tracker", {}, {}, {}};
        InstanceNode cal{"LAT/Calorimeter", {}, {}, {}};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double cx = (i - 1.5) * pitch;
                const double cz = (j - 1.5) * pitch;
                InstanceNode tower{"LAT/Tracker/Tower", {}, {att("tower", std::int64_t{4 * i + j})}, {}};
                for (int k = 0; k < planes; ++k) {
                    InstanceNode p = square_y("LAT/Tracker/Tower/Plane", cx, plane_y(k), cz, 178.0);
                    p.att_values.push_back(att("view", std::string(k % 2 ? "y" : "x")));
                    tower.children.push_back(std::move(p));
                }
                tracker.children.push_back(std::move(tower));

                InstanceNode module{"LAT/Calorimeter/Module", {}, {att("tower", std::int64_t{4 * i + j})}, {}};
                for (int layer = 0; layer < 8; ++layer) {
                    const double y0 = -220.0 + 22.5 * layer;
                    const double y1 = y0 + 19.9;
                    for (int n = 0; n < 12; ++n) {
                        const double off = (n - 5.5) * 27.84;
                        const double h = 13.0;
                        InstanceNode log{"LAT/Calorimeter/Module/Log", {}, {}, {}};
                        if (layer % 2 == 0) {
                            const double z = cz + off;
                            for (double x : {cx - 163.0, cx + 163.0})
                                for (const auto& [dy, dz] : {std::pair{0.0, -h}, {0.0, h}, {1.0, h}, {1.0, -h}})
                                    log.points.push_back(pt(x, dy ? y1 : y0, z + dz));
                        } else {
                            const double x = cx + off;
                            for (double z : {cz - 163.0, cz + 163.0})
                                for (const auto& [dy, dx] : {std::pair{0.0, -h}, {0.0, h}, {1.0, h}, {1.0, -h}})
                                    log.points.push_back(pt(x + dx, dy ? y1 : y0, z));
                        }
                        log.att_values.push_back(att("energy", mm(u(0.0, 40.0))));
                        module.children.push_back(std::move(log));
                    }
                }
                cal.children.push_back(std::move(module));
            }

        InstanceNode acd{"LAT/ACD", {}, {}, {}};
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                acd.children.push_back(square_y("LAT/ACD/Tile", (i - 2) * 340.0, 700.0, (j - 2) * 340.0, 165.0));
        for (int side = 0; side < 4; ++side)
            for (int col = 0; col < 4; ++col)
                for (int row = 0; row < 4; ++row) {
                    const double a = (col - 1.5) * 400.0;
                    const double y0 = 20.0 + row * 165.0;
                    const double y1 = y0 + 160.0;
                    const double e = 850.0 * (side < 2 ? 1 : -1);
                    InstanceNode tile{"LAT/ACD/Tile", {}, {}, {}};
                    const bool along_x = side % 2 == 0;
                    for (const auto& [t, y] : {std::pair{-195.0, y0}, {195.0, y0}, {195.0, y1}, {-195.0, y1}})
                        tile.points.push_back(along_x ? pt(a + t, y, e) : pt(e, y, a + t));
                    acd.children.push_back(std::move(tile));
                }
        root.children.push_back(std::move(tracker));
        root.children.push_back(std::move(cal));
        root.children.push_back(std::move(acd));
    }

    InstanceNode event{"LAT/Event", {}, {}, {}};
    const Point3 vertex(u(-300, 300), 900.0, u(-300, 300));
    for (int t = 0; t < tracks; ++t) {
        const Point3 stop(u(-700, 700), -230.0, u(-700, 700));
        InstanceNode track{"LAT/Event/Track", {pt(vertex.x(), vertex.y(), vertex.z())},
                           {att("momentum", mm(u(0.1, 30.0))), att("charge", std::int64_t{t % 2 ? 1 : -1})}, {}};
        for (int k = planes - 1; k >= 0; --k) {
            const double s = (vertex.y() - plane_y(k)) / (vertex.y() - stop.y());
            const Point3 h = vertex + s * (stop - vertex);
            track.children.push_back(
                InstanceNode{"LAT/Event/Hit", {pt(h.x() + u(-2, 2), h.y(), h.z() + u(-2, 2))}, {}, {}});
        }
        track.points.push_back(pt(stop.x(), stop.y(), stop.z()));
        event.children.push_back(std::move(track));
    }
    for (int d = 0; d < 40; ++d)
        event.children.push_back(InstanceNode{"LAT/Event/Deposit", {pt(u(-700, 700), u(-220, -40), u(-700, 700))},
                                              {att("energy", mm(u(1.0, 500.0)))}, {}});
    root.children.push_back(std::move(event));

    Document doc;
    doc.layer_order = {"acd", "cal", "tracker", "event"};
    doc.type_trees.push_back({"GlastTypes", "2.1", glast_types()});
    doc.instance_trees.push_back({"GlastEvent", "2.1", "GlastTypes", std::move(root)});
    return doc;
}

} // namespace

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <tests/data>\n";
        return 2;
    }
    const fs::path dir = argv[1];
    fs::create_directories(dir / "server");

    write(dir / "fixture.heprep", xmlio::serialize(small_fixture(), false));
    write(dir / "fixture.heprep.gz", xmlio::serialize(small_fixture(), true));
    write(dir / "empty.heprep", xmlio::serialize(empty_fixture(), false));

    Uniform u{std::mt19937_64(2004)};
    write(dir / "glast.heprep.gz", xmlio::serialize(glast_fixture(u, 12, true), true));

    // Event-server seed: names deliberately out of lexicographic order on
    // creation, mixed compression.
    write(dir / "server" / "run1_evt3.heprep", xmlio::serialize(glast_fixture(u, 3, false), false));
    write(dir / "server" / "run1_evt1.heprep.gz", xmlio::serialize(glast_fixture(u, 1, false), true));
    write(dir / "server" / "run1_evt2.heprep", xmlio::serialize(glast_fixture(u, 2, false), false));
    return 0;
}
