#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace heprep {

/// World coordinates in millimeters.
using Point3 = Eigen::Vector3d;

struct Color
{
    double r = 1.0;
    double g = 1.0;
    double b = 1.0;
    double a = 1.0;

    bool operator==(const Color&) const = default;
};

/// Tagged attribute payload. Alternatives map one-to-one onto the XML
/// `type` spellings string|int|double|boolean|color.
using Value = std::variant<std::string, std::int64_t, double, bool, Color>;

std::string_view value_type_name(const Value& v);

struct AttValue
{
    std::string name; // lowercase
    Value value;

    bool operator==(const AttValue&) const = default;
};

struct AttDef
{
    std::string name; // lowercase
    std::string description;
    std::string category;
    std::string extra;

    bool operator==(const AttDef&) const = default;
};

struct TypeNode
{
    std::string name;
    std::vector<AttDef> att_defs;
    std::vector<AttValue> att_values;
    std::vector<TypeNode> children;

    bool operator==(const TypeNode&) const = default;
};

struct InstanceNode
{
    std::string type_path; // e.g. "Detector/Tracker/Layer"
    std::vector<Point3> points;
    std::vector<AttValue> att_values;
    std::vector<InstanceNode> children;

    bool operator==(const InstanceNode&) const = default;
};

struct TypeTree
{
    std::string name;
    std::string version;
    TypeNode root;

    bool operator==(const TypeTree&) const = default;
};

struct InstanceTree
{
    std::string name;
    std::string version;
    std::string type_tree_name;
    InstanceNode root;

    bool operator==(const InstanceTree&) const = default;
};

struct Document
{
    std::vector<TypeTree> type_trees;
    std::vector<InstanceTree> instance_trees;
    std::vector<std::string> layer_order; // back to front

    bool operator==(const Document&) const = default;
};

struct InstancePath
{
    std::string tree_name;
    std::vector<std::size_t> indices;

    bool operator==(const InstancePath&) const = default;
    auto operator<=>(const InstancePath&) const = default;
};

/// "Tree[0,1]"; the root is "Tree[]".
std::string to_string(const InstancePath& path);

enum class OriginLevel { Instance, AncestorInstance, Type, AncestorType };

std::string_view to_string(OriginLevel level);

struct ResolvedAttribute
{
    AttValue attribute;
    OriginLevel origin;

    bool operator==(const ResolvedAttribute&) const = default;
};

struct Violation
{
    std::string code;
    std::string path;
    std::string message;

    bool operator==(const Violation&) const = default;
};

std::string to_string(const Violation& v);

/// Lowercases ASCII letters; attribute names are stored this way.
std::string normalize_name(std::string_view name);

const InstanceTree* find_instance_tree(const Document& doc, std::string_view name);
const TypeTree* find_type_tree(const Document& doc, std::string_view name);

/// Follows a slash-joined type path from the root of `tree`. Returns the
/// chain root..leaf, or empty when any segment is missing.
std::vector<const TypeNode*> type_chain(const TypeTree& tree, std::string_view type_path);

/// Throws PathError for an unknown tree or an out-of-range index.
const InstanceNode& resolve_path(const Document& doc, const InstancePath& path);

/// Inverse of resolve_path: locates `node` (by identity) inside `doc`.
std::optional<InstancePath> path_of(const Document& doc, const InstanceNode& node);

/// Lookup order: the instance, its ancestor instances (parent upward), its
/// type, then the type's ancestors (parent upward). Case-insensitive.
std::optional<AttValue> resolve_attribute(const Document& doc, const InstancePath& path,
                                          std::string_view name);

/// Every name visible from the instance, resolved as above, sorted by name.
std::vector<ResolvedAttribute> resolve_all_attributes(const Document& doc,
                                                      const InstancePath& path);

std::vector<Violation> validate(const Document& doc);

struct TreeCounts
{
    std::size_t types = 0;
    std::size_t instances = 0;
    std::size_t points = 0;
};

TreeCounts count_nodes(const Document& doc);

} // namespace heprep
