#include "doctest.h"

#include "generators.hpp"
#include "oracles.hpp"

#include "heprep/error.hpp"
#include "heprep/model.hpp"

#include <algorithm>

using namespace heprep;

namespace {

AttValue att(std::string name, Value v)
{
    return {std::move(name), std::move(v)};
}

/// Detector > Tracker > Layer types; instance tree Event with root
/// Detector, child Tracker, grandchild Layer.
Document layered()
{
    TypeNode layer{"Layer", {}, {att("color", Color{0, 1, 0, 1}), att("depth", std::int64_t{3})}, {}};
    TypeNode tracker{"Tracker", {}, {att("color", Color{1, 0, 0, 1}), att("material", std::string("si"))}, {layer}};
    TypeNode detector{"Detector", {}, {att("material", std::string("air")), att("visibility", true)}, {tracker}};

    InstanceNode leaf{"Detector/Tracker/Layer", {{0, 0, 0}}, {att("depth", std::int64_t{7})}, {}};
    InstanceNode mid{"Detector/Tracker", {}, {att("energy", 1.5)}, {leaf}};
    InstanceNode root{"Detector", {}, {att("run", std::int64_t{42})}, {mid}};

    Document doc;
    doc.type_trees.push_back({"Types", "1", detector});
    doc.instance_trees.push_back({"Event", "1", "Types", root});
    return doc;
}

bool has_code(const std::vector<Violation>& vs, const std::string& code)
{
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.code == code; });
}

} // namespace

TEST_CASE("names normalize to lowercase")
{
    CHECK(normalize_name("DrawAs") == "drawas");
    CHECK(normalize_name("color") == "color");
    CHECK(normalize_name("") == "");
}

TEST_CASE("instance paths format with their indices")
{
    CHECK(to_string(InstancePath{"Event", {}}) == "Event[]");
    CHECK(to_string(InstancePath{"Event", {0, 12}}) == "Event[0,12]");
}

TEST_CASE("resolve_path walks indices and rejects bad paths")
{
    const Document doc = layered();
    CHECK(resolve_path(doc, {"Event", {}}).type_path == "Detector");
    CHECK(resolve_path(doc, {"Event", {0, 0}}).type_path == "Detector/Tracker/Layer");
    CHECK_THROWS_AS(resolve_path(doc, {"Nope", {}}), PathError);
    CHECK_THROWS_AS(resolve_path(doc, {"Event", {1}}), PathError);
    CHECK_THROWS_AS(resolve_path(doc, {"Event", {0, 0, 0}}), PathError);
}

TEST_CASE("path_of inverts resolve_path")
{
    const Document doc = layered();
    const InstancePath p{"Event", {0, 0}};
    CHECK(path_of(doc, resolve_path(doc, p)) == p);
    const InstanceNode stranger{"Detector", {}, {}, {}};
    CHECK_FALSE(path_of(doc, stranger).has_value());
}

TEST_CASE("type_chain lists root to leaf")
{
    const Document doc = layered();
    const auto chain = type_chain(doc.type_trees[0], "Detector/Tracker/Layer");
    REQUIRE(chain.size() == 3);
    CHECK(chain[0]->name == "Detector");
    CHECK(chain[2]->name == "Layer");
    CHECK(type_chain(doc.type_trees[0], "Detector/Missing").empty());
    CHECK(type_chain(doc.type_trees[0], "Tracker").empty());
}

TEST_CASE("attribute lookup follows instance, ancestors, type, type ancestors")
{
    const Document doc = layered();
    const InstancePath leaf{"Event", {0, 0}};

    SUBCASE("own value beats the type")
    {
        CHECK(resolve_attribute(doc, leaf, "depth")->value == Value(std::int64_t{7}));
    }
    SUBCASE("ancestor instance beats the type")
    {
        CHECK(resolve_attribute(doc, leaf, "energy")->value == Value(1.5));
        CHECK(resolve_attribute(doc, leaf, "run")->value == Value(std::int64_t{42}));
    }
    SUBCASE("own type beats its ancestors")
    {
        CHECK(resolve_attribute(doc, leaf, "color")->value == Value(Color{0, 1, 0, 1}));
        CHECK(resolve_attribute(doc, leaf, "material")->value == Value(std::string("si")));
        CHECK(resolve_attribute(doc, leaf, "visibility")->value == Value(true));
    }
    SUBCASE("names are case-insensitive")
    {
        CHECK(resolve_attribute(doc, leaf, "MATERIAL")->value == Value(std::string("si")));
    }
    SUBCASE("unknown names resolve to nothing")
    {
        CHECK_FALSE(resolve_attribute(doc, leaf, "absent").has_value());
    }
}

TEST_CASE("resolve_all_attributes reports the winning level, sorted by name")
{
    const Document doc = layered();
    const auto all = resolve_all_attributes(doc, {"Event", {0, 0}});
    std::vector<std::string> names;
    for (const auto& r : all)
        names.push_back(r.attribute.name);
    CHECK(names == std::vector<std::string>{"color", "depth", "energy", "material", "run", "visibility"});
    const auto origin_of = [&](const std::string& n) {
        return std::find_if(all.begin(), all.end(), [&](const auto& r) { return r.attribute.name == n; })->origin;
    };
    CHECK(origin_of("depth") == OriginLevel::Instance);
    CHECK(origin_of("energy") == OriginLevel::AncestorInstance);
    CHECK(origin_of("color") == OriginLevel::Type);
    CHECK(origin_of("visibility") == OriginLevel::AncestorType);
    CHECK(to_string(OriginLevel::AncestorType) == "ancestor-type");
}

TEST_CASE("validate flags every broken invariant")
{
    SUBCASE("clean document")
    {
        CHECK(validate(layered()).empty());
    }
    SUBCASE("unknown type tree")
    {
        Document doc = layered();
        doc.instance_trees[0].type_tree_name = "Other";
        CHECK(has_code(validate(doc), "UnknownTypeTree"));
    }
    SUBCASE("unknown type path")
    {
        Document doc = layered();
        doc.instance_trees[0].root.children[0].type_path = "Detector/Calorimeter";
        CHECK(has_code(validate(doc), "UnknownType"));
    }
    SUBCASE("duplicate attribute value")
    {
        Document doc = layered();
        doc.instance_trees[0].root.att_values.push_back(att("run", std::int64_t{1}));
        CHECK(has_code(validate(doc), "DuplicateAttValue"));
    }
    SUBCASE("uppercase attribute name")
    {
        Document doc = layered();
        doc.instance_trees[0].root.att_values.push_back(att("Energy", 1.0));
        CHECK(has_code(validate(doc), "NonCanonicalName"));
    }
    SUBCASE("color out of range")
    {
        Document doc = layered();
        doc.type_trees[0].root.att_values.push_back(att("tint", Color{1.5, 0, 0, 1}));
        CHECK(has_code(validate(doc), "ColorOutOfRange"));
    }
    SUBCASE("non-finite values and points")
    {
        Document doc = layered();
        doc.instance_trees[0].root.att_values.push_back(att("nan", std::numeric_limits<double>::quiet_NaN()));
        doc.instance_trees[0].root.points.push_back({0, std::numeric_limits<double>::infinity(), 0});
        const auto vs = validate(doc);
        CHECK(has_code(vs, "NonFiniteValue"));
        CHECK(has_code(vs, "NonFinitePoint"));
    }
    SUBCASE("duplicate sibling types and bad type names")
    {
        Document doc = layered();
        auto& tracker = doc.type_trees[0].root.children[0];
        tracker.children.push_back(tracker.children[0]);
        tracker.children.push_back(TypeNode{"a/b", {}, {}, {}});
        const auto vs = validate(doc);
        CHECK(has_code(vs, "DuplicateSiblingType"));
        CHECK(has_code(vs, "InvalidTypeName"));
    }
    SUBCASE("duplicate layers and tree names")
    {
        Document doc = layered();
        doc.layer_order = {"a", "a"};
        doc.instance_trees.push_back(doc.instance_trees[0]);
        const auto vs = validate(doc);
        CHECK(has_code(vs, "DuplicateLayer"));
        CHECK(has_code(vs, "DuplicateTreeName"));
    }
    SUBCASE("text that XML cannot carry")
    {
        Document doc = layered();
        doc.instance_trees[0].root.att_values.push_back(att("label", std::string("bell\x07")));
        doc.type_trees[0].version = "\xff\xfe";
        const auto vs = validate(doc);
        CHECK(std::count_if(vs.begin(), vs.end(), [](const Violation& v) { return v.code == "InvalidText"; }) == 2);
    }
}

TEST_CASE("count_nodes totals types, instances and points")
{
    const TreeCounts c = count_nodes(layered());
    CHECK(c.types == 3);
    CHECK(c.instances == 3);
    CHECK(c.points == 1);
}

TEST_CASE("random documents are valid and agree with the chain oracle")
{
    testing::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Document doc = testing::random_document(rng);
        REQUIRE(validate(doc).empty());
        const auto names = testing::all_attribute_names(doc);
        for (const auto& path : testing::all_paths(doc)) {
            for (const auto& name : names)
                CHECK(resolve_attribute(doc, path, name) == oracle::resolve_attribute(doc, path, name));
            CHECK_FALSE(resolve_attribute(doc, path, "never-used").has_value());
        }
    }
}
