#include "heprep/model.hpp"

#include "heprep/error.hpp"
#include "heprep/text.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace heprep {

std::string_view value_type_name(const Value& v)
{
    static constexpr std::string_view names[] = {"string", "int", "double", "boolean", "color"};
    return names[v.index()];
}

std::string to_string(const InstancePath& path)
{
    std::string out = path.tree_name + "[";
    for (std::size_t i = 0; i < path.indices.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(path.indices[i]);
    }
    out += ']';
    return out;
}

std::string_view to_string(OriginLevel level)
{
    switch (level) {
    case OriginLevel::Instance:
        return "instance";
    case OriginLevel::AncestorInstance:
        return "ancestor-instance";
    case OriginLevel::Type:
        return "type";
    case OriginLevel::AncestorType:
        return "ancestor-type";
    }
    return "unknown";
}

std::string to_string(const Violation& v)
{
    return v.code + " at " + v.path + ": " + v.message;
}

std::string normalize_name(std::string_view name)
{
    std::string out(name);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z')
            c = static_cast<char>(c - 'A' + 'a');
    return out;
}

const InstanceTree* find_instance_tree(const Document& doc, std::string_view name)
{
    for (const auto& tree : doc.instance_trees)
        if (tree.name == name)
            return &tree;
    return nullptr;
}

const TypeTree* find_type_tree(const Document& doc, std::string_view name)
{
    for (const auto& tree : doc.type_trees)
        if (tree.name == name)
            return &tree;
    return nullptr;
}

std::vector<const TypeNode*> type_chain(const TypeTree& tree, std::string_view type_path)
{
    std::vector<const TypeNode*> chain;
    const auto segments = text::split(type_path, '/');
    if (segments.empty() || segments.front() != tree.root.name)
        return {};
    const TypeNode* node = &tree.root;
    chain.push_back(node);
    for (std::size_t i = 1; i < segments.size(); ++i) {
        const auto it = std::find_if(node->children.begin(), node->children.end(),
                                     [&](const TypeNode& c) { return c.name == segments[i]; });
        if (it == node->children.end())
            return {};
        node = &*it;
        chain.push_back(node);
    }
    return chain;
}

namespace {

struct Lineage
{
    const InstanceTree* tree = nullptr;
    std::vector<const InstanceNode*> instances; // root..leaf
};

Lineage walk(const Document& doc, const InstancePath& path)
{
    Lineage lineage;
    lineage.tree = find_instance_tree(doc, path.tree_name);
    if (!lineage.tree)
        throw PathError("unknown instance tree '" + path.tree_name + "'");
    const InstanceNode* node = &lineage.tree->root;
    lineage.instances.push_back(node);
    for (std::size_t depth = 0; depth < path.indices.size(); ++depth) {
        const std::size_t index = path.indices[depth];
        if (index >= node->children.size())
            throw PathError("index " + std::to_string(index) + " out of range at depth " +
                            std::to_string(depth) + " in " + to_string(path));
        node = &node->children[index];
        lineage.instances.push_back(node);
    }
    return lineage;
}

const AttValue* find_local(const std::vector<AttValue>& values, std::string_view name)
{
    for (const auto& v : values)
        if (v.name == name)
            return &v;
    return nullptr;
}

std::vector<const TypeNode*> types_of(const Document& doc, const Lineage& lineage)
{
    const TypeTree* types = find_type_tree(doc, lineage.tree->type_tree_name);
    if (!types)
        throw PathError("instance tree '" + lineage.tree->name + "' references unknown type tree '" +
                        lineage.tree->type_tree_name + "'");
    auto chain = type_chain(*types, lineage.instances.back()->type_path);
    if (chain.empty())
        throw PathError("unknown type '" + lineage.instances.back()->type_path + "'");
    return chain;
}

} // namespace

const InstanceNode& resolve_path(const Document& doc, const InstancePath& path)
{
    return *walk(doc, path).instances.back();
}

std::optional<InstancePath> path_of(const Document& doc, const InstanceNode& node)
{
    InstancePath path;
    const std::function<bool(const InstanceNode&)> search = [&](const InstanceNode& current) {
        if (&current == &node)
            return true;
        for (std::size_t i = 0; i < current.children.size(); ++i) {
            path.indices.push_back(i);
            if (search(current.children[i]))
                return true;
            path.indices.pop_back();
        }
        return false;
    };
    for (const auto& tree : doc.instance_trees) {
        path.tree_name = tree.name;
        path.indices.clear();
        if (search(tree.root))
            return path;
    }
    return std::nullopt;
}

std::optional<AttValue> resolve_attribute(const Document& doc, const InstancePath& path,
                                          std::string_view name)
{
    const Lineage lineage = walk(doc, path);
    const std::string key = normalize_name(name);
    for (auto it = lineage.instances.rbegin(); it != lineage.instances.rend(); ++it)
        if (const AttValue* v = find_local((*it)->att_values, key))
            return *v;
    const auto types = types_of(doc, lineage);
    for (auto it = types.rbegin(); it != types.rend(); ++it)
        if (const AttValue* v = find_local((*it)->att_values, key))
            return *v;
    return std::nullopt;
}

std::vector<ResolvedAttribute> resolve_all_attributes(const Document& doc,
                                                      const InstancePath& path)
{
    const Lineage lineage = walk(doc, path);
    const auto types = types_of(doc, lineage);

    // First writer wins, so walk the chain from most to least specific.
    std::map<std::string, ResolvedAttribute> seen;
    const auto absorb = [&](const std::vector<AttValue>& values, OriginLevel level) {
        for (const auto& v : values)
            seen.try_emplace(v.name, ResolvedAttribute{v, level});
    };
    const std::size_t n = lineage.instances.size();
    for (std::size_t i = n; i-- > 0;)
        absorb(lineage.instances[i]->att_values,
               i + 1 == n ? OriginLevel::Instance : OriginLevel::AncestorInstance);
    for (std::size_t i = types.size(); i-- > 0;)
        absorb(types[i]->att_values,
               i + 1 == types.size() ? OriginLevel::Type : OriginLevel::AncestorType);

    std::vector<ResolvedAttribute> out;
    out.reserve(seen.size());
    for (auto& [name, resolved] : seen)
        out.push_back(std::move(resolved));
    return out;
}

namespace {

bool is_valid_att_name(std::string_view name)
{
    if (name.empty() || !text::is_xml_text(name))
        return false;
    return std::none_of(name.begin(), name.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    });
}

class Validator
{
public:
    explicit Validator(const Document& doc) : doc_(doc) {}

    std::vector<Violation> run()
    {
        std::set<std::string> layers;
        for (const auto& layer : doc_.layer_order) {
            check_text(layer, "layers", "layer name");
            if (!layers.insert(layer).second)
                add("DuplicateLayer", "layers", "layer '" + layer + "' listed twice");
        }

        std::set<std::string> type_tree_names;
        for (const auto& tree : doc_.type_trees) {
            const std::string where = "typetree:" + tree.name;
            check_text(tree.name, where, "type tree name");
            check_text(tree.version, where, "type tree version");
            if (!type_tree_names.insert(tree.name).second)
                add("DuplicateTreeName", where, "type tree name used twice");
            check_type(tree.root, where + "/" + tree.root.name);
        }

        std::set<std::string> instance_tree_names;
        for (const auto& tree : doc_.instance_trees) {
            const std::string where = "instancetree:" + tree.name;
            check_text(tree.name, where, "instance tree name");
            check_text(tree.version, where, "instance tree version");
            if (!instance_tree_names.insert(tree.name).second)
                add("DuplicateTreeName", where, "instance tree name used twice");
            const TypeTree* types = find_type_tree(doc_, tree.type_tree_name);
            if (!types)
                add("UnknownTypeTree", where,
                    "references missing type tree '" + tree.type_tree_name + "'");
            InstancePath path{tree.name, {}};
            check_instance(tree.root, types, path);
        }
        return std::move(violations_);
    }

private:
    void add(std::string code, std::string path, std::string message)
    {
        violations_.push_back({std::move(code), std::move(path), std::move(message)});
    }

    void check_text(const std::string& s, const std::string& where, const std::string& what)
    {
        if (!text::is_xml_text(s))
            add("InvalidText", where, what + " is not valid XML text");
    }

    void check_att_values(const std::vector<AttValue>& values, const std::string& where)
    {
        std::set<std::string> names;
        for (const auto& v : values) {
            if (!is_valid_att_name(v.name)) {
                add("InvalidAttName", where, "attribute name '" + v.name + "' is empty or has whitespace");
            } else if (v.name != normalize_name(v.name)) {
                add("NonCanonicalName", where, "attribute name '" + v.name + "' is not lowercase");
            }
            if (!names.insert(v.name).second)
                add("DuplicateAttValue", where, "attribute '" + v.name + "' defined twice");
            if (const auto* s = std::get_if<std::string>(&v.value))
                check_text(*s, where, "attribute '" + v.name + "' value");
            if (const auto* d = std::get_if<double>(&v.value); d && !std::isfinite(*d))
                add("NonFiniteValue", where, "attribute '" + v.name + "' is not finite");
            if (const auto* c = std::get_if<Color>(&v.value)) {
                const auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
                if (!in_unit(c->r) || !in_unit(c->g) || !in_unit(c->b) || !in_unit(c->a))
                    add("ColorOutOfRange", where, "color '" + v.name + "' has a component outside [0,1]");
            }
        }
    }

    void check_type(const TypeNode& node, const std::string& where)
    {
        if (node.name.empty() || node.name.find('/') != std::string::npos || !text::is_xml_text(node.name))
            add("InvalidTypeName", where, "type name must be non-empty text without '/'");
        std::set<std::string> defs;
        for (const auto& def : node.att_defs) {
            if (!is_valid_att_name(def.name))
                add("InvalidAttName", where, "attdef name '" + def.name + "' is empty or has whitespace");
            else if (def.name != normalize_name(def.name))
                add("NonCanonicalName", where, "attdef name '" + def.name + "' is not lowercase");
            if (!defs.insert(def.name).second)
                add("DuplicateAttDef", where, "attdef '" + def.name + "' defined twice");
            check_text(def.description, where, "attdef description");
            check_text(def.category, where, "attdef category");
            check_text(def.extra, where, "attdef extra");
        }
        check_att_values(node.att_values, where);
        std::set<std::string> siblings;
        for (const auto& child : node.children) {
            if (!siblings.insert(child.name).second)
                add("DuplicateSiblingType", where + "/" + child.name,
                    "sibling type '" + child.name + "' defined twice");
            check_type(child, where + "/" + child.name);
        }
    }

    void check_instance(const InstanceNode& node, const TypeTree* types, InstancePath& path)
    {
        const std::string where = to_string(path);
        check_text(node.type_path, where, "type path");
        if (types && type_chain(*types, node.type_path).empty())
            add("UnknownType", where, "type '" + node.type_path + "' does not exist");
        for (const auto& p : node.points)
            if (!p.allFinite()) {
                add("NonFinitePoint", where, "point has a non-finite coordinate");
                break;
            }
        check_att_values(node.att_values, where);
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            path.indices.push_back(i);
            check_instance(node.children[i], types, path);
            path.indices.pop_back();
        }
    }

    const Document& doc_;
    std::vector<Violation> violations_;
};

void count_types(const TypeNode& node, TreeCounts& counts)
{
    ++counts.types;
    for (const auto& child : node.children)
        count_types(child, counts);
}

void count_instances(const InstanceNode& node, TreeCounts& counts)
{
    ++counts.instances;
    counts.points += node.points.size();
    for (const auto& child : node.children)
        count_instances(child, counts);
}

} // namespace

std::vector<Violation> validate(const Document& doc)
{
    return Validator(doc).run();
}

TreeCounts count_nodes(const Document& doc)
{
    TreeCounts counts;
    for (const auto& tree : doc.type_trees)
        count_types(tree.root, counts);
    for (const auto& tree : doc.instance_trees)
        count_instances(tree.root, counts);
    return counts;
}

} // namespace heprep
