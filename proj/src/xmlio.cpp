#include "heprep/xmlio.hpp"

#include "heprep/error.hpp"
#include "heprep/gzip.hpp"
#include "heprep/text.hpp"

#include <expat.h>

#include <climits>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>

namespace heprep::xmlio {

namespace {

enum class Element { None, Heprep, Layer, TypeTree, Type, AttDef, AttValue, InstanceTree, Instance, Point };

struct ElementRule
{
    Element kind;
    std::set<std::string_view> required;
    std::set<std::string_view> optional;
};

const std::map<std::string_view, ElementRule>& rules()
{
    static const std::map<std::string_view, ElementRule> table = {
        {"heprep", {Element::Heprep, {}, {"version"}}},
        {"layer", {Element::Layer, {"name"}, {}}},
        {"typetree", {Element::TypeTree, {"name"}, {"version"}}},
        {"type", {Element::Type, {"name"}, {}}},
        {"attdef", {Element::AttDef, {"name"}, {"desc", "category", "extra"}}},
        {"attvalue", {Element::AttValue, {"name", "value"}, {"type"}}},
        {"instancetree", {Element::InstanceTree, {"name", "typetreename"}, {"version"}}},
        {"instance", {Element::Instance, {"type"}, {}}},
        {"point", {Element::Point, {"x", "y", "z"}, {}}},
    };
    return table;
}

bool allowed_child(Element parent, Element child)
{
    switch (parent) {
    case Element::None:
        return child == Element::Heprep;
    case Element::Heprep:
        return child == Element::Layer || child == Element::TypeTree || child == Element::InstanceTree;
    case Element::TypeTree:
        return child == Element::Type;
    case Element::Type:
        return child == Element::Type || child == Element::AttDef || child == Element::AttValue;
    case Element::InstanceTree:
        return child == Element::Instance;
    case Element::Instance:
        return child == Element::Instance || child == Element::AttValue || child == Element::Point;
    default:
        return false;
    }
}

struct Frame
{
    Element kind = Element::None;
    std::string name;
    TypeTree* type_tree = nullptr;
    TypeNode* type = nullptr;
    InstanceTree* instance_tree = nullptr;
    InstanceNode* instance = nullptr;
    bool has_root = false;
};

class DocumentBuilder
{
public:
    explicit DocumentBuilder(XML_Parser parser) : parser_(parser) { stack_.push_back(Frame{}); }

    static void XMLCALL on_start(void* self, const XML_Char* name, const XML_Char** atts)
    {
        static_cast<DocumentBuilder*>(self)->start(name, atts);
    }

    static void XMLCALL on_end(void* self, const XML_Char* name)
    {
        static_cast<DocumentBuilder*>(self)->end(name);
    }

    static void XMLCALL on_text(void* self, const XML_Char* s, int len)
    {
        static_cast<DocumentBuilder*>(self)->characters(std::string_view(s, static_cast<std::size_t>(len)));
    }

    static void XMLCALL on_doctype(void* self, const XML_Char*, const XML_Char*, const XML_Char*, int)
    {
        static_cast<DocumentBuilder*>(self)->fail("DOCTYPE declarations are not allowed");
    }

    const std::optional<std::string>& error() const { return error_; }
    bool saw_root() const { return saw_root_; }
    Document take() { return std::move(doc_); }

    void fail(const std::string& message)
    {
        if (error_)
            return;
        error_ = message + " at line " + std::to_string(XML_GetCurrentLineNumber(parser_)) +
                 ", column " + std::to_string(XML_GetCurrentColumnNumber(parser_) + 1);
        XML_StopParser(parser_, XML_FALSE);
    }

private:
    using Attributes = std::map<std::string_view, std::string_view>;

    void start(std::string_view name, const XML_Char** atts)
    {
        if (error_)
            return;
        const auto rule = rules().find(name);
        Frame& parent = stack_.back();
        if (rule == rules().end())
            return fail("unknown element <" + std::string(name) + ">");
        if (!allowed_child(parent.kind, rule->second.kind)) {
            const std::string where = parent.kind == Element::None ? "document root" : "<" + parent.name + ">";
            return fail("element <" + std::string(name) + "> not allowed inside " + where);
        }

        Attributes attrs;
        for (std::size_t i = 0; atts[i]; i += 2) {
            const std::string_view key = atts[i];
            if (!rule->second.required.count(key) && !rule->second.optional.count(key))
                return fail("unknown attribute '" + std::string(key) + "' on <" + std::string(name) + ">");
            attrs.emplace(key, atts[i + 1]);
        }
        for (const auto key : rule->second.required)
            if (!attrs.count(key))
                return fail("<" + std::string(name) + "> is missing attribute '" + std::string(key) + "'");
        const auto get = [&](std::string_view key) -> std::string {
            const auto it = attrs.find(key);
            return it == attrs.end() ? std::string() : std::string(it->second);
        };

        Frame frame;
        frame.kind = rule->second.kind;
        frame.name = std::string(name);
        frame.type_tree = parent.type_tree;
        frame.type = parent.type;
        frame.instance_tree = parent.instance_tree;
        frame.instance = parent.instance;

        switch (frame.kind) {
        case Element::Heprep:
            saw_root_ = true;
            if (attrs.count("version") && get("version") != format_version)
                return fail("unsupported heprep version '" + get("version") + "'");
            break;
        case Element::Layer:
            doc_.layer_order.push_back(get("name"));
            break;
        case Element::TypeTree:
            doc_.type_trees.push_back(TypeTree{get("name"), get("version"), {}});
            frame.type_tree = &doc_.type_trees.back();
            break;
        case Element::Type:
            if (parent.kind == Element::TypeTree) {
                if (parent.has_root)
                    return fail("<typetree> must contain exactly one root <type>");
                parent.has_root = true;
                frame.type = &parent.type_tree->root;
            } else {
                parent.type->children.emplace_back();
                frame.type = &parent.type->children.back();
            }
            frame.type->name = get("name");
            break;
        case Element::AttDef:
            parent.type->att_defs.push_back(
                AttDef{normalize_name(get("name")), get("desc"), get("category"), get("extra")});
            break;
        case Element::AttValue: {
            auto value = parse_value(get("type").empty() && !attrs.count("type") ? "string" : get("type"),
                                     get("value"));
            if (!value)
                return;
            AttValue att{normalize_name(get("name")), std::move(*value)};
            if (parent.kind == Element::Type)
                parent.type->att_values.push_back(std::move(att));
            else
                parent.instance->att_values.push_back(std::move(att));
            break;
        }
        case Element::InstanceTree:
            doc_.instance_trees.push_back(InstanceTree{get("name"), get("version"), get("typetreename"), {}});
            frame.instance_tree = &doc_.instance_trees.back();
            break;
        case Element::Instance:
            if (parent.kind == Element::InstanceTree) {
                if (parent.has_root)
                    return fail("<instancetree> must contain exactly one root <instance>");
                parent.has_root = true;
                frame.instance = &parent.instance_tree->root;
            } else {
                parent.instance->children.emplace_back();
                frame.instance = &parent.instance->children.back();
            }
            frame.instance->type_path = get("type");
            break;
        case Element::Point: {
            Point3 p;
            const char* axes[] = {"x", "y", "z"};
            for (int k = 0; k < 3; ++k) {
                const auto v = text::parse_real(text::trim(attrs[axes[k]]));
                if (!v || !std::isfinite(*v))
                    return fail("<point> attribute '" + std::string(axes[k]) + "' is not a finite number");
                p[k] = *v;
            }
            parent.instance->points.push_back(p);
            break;
        }
        case Element::None:
            break;
        }
        stack_.push_back(std::move(frame));
    }

    std::optional<Value> parse_value(const std::string& type, const std::string& raw)
    {
        if (type == "string")
            return Value{raw};
        if (type == "int") {
            if (const auto v = text::parse_int(text::trim(raw)))
                return Value{*v};
            fail("attvalue '" + raw + "' is not an int");
            return std::nullopt;
        }
        if (type == "double") {
            if (const auto v = text::parse_real(text::trim(raw)); v && std::isfinite(*v))
                return Value{*v};
            fail("attvalue '" + raw + "' is not a finite double");
            return std::nullopt;
        }
        if (type == "boolean") {
            const auto t = text::trim(raw);
            if (t == "true")
                return Value{true};
            if (t == "false")
                return Value{false};
            fail("attvalue '" + raw + "' is not a boolean");
            return std::nullopt;
        }
        if (type == "color") {
            const auto parts = text::split(raw, ',');
            if (parts.size() == 3 || parts.size() == 4) {
                double c[4] = {0.0, 0.0, 0.0, 1.0};
                bool ok = true;
                for (std::size_t k = 0; k < parts.size() && ok; ++k) {
                    const auto v = text::parse_real(text::trim(parts[k]));
                    ok = v && *v >= 0.0 && *v <= 1.0;
                    if (ok)
                        c[k] = *v;
                }
                if (ok)
                    return Value{Color{c[0], c[1], c[2], c[3]}};
            }
            fail("attvalue '" + raw + "' is not a color r,g,b[,a] with components in [0,1]");
            return std::nullopt;
        }
        fail("unknown attvalue type '" + type + "'");
        return std::nullopt;
    }

    void end(std::string_view)
    {
        if (error_)
            return;
        const Frame& frame = stack_.back();
        if (frame.kind == Element::TypeTree && !frame.has_root)
            return fail("<typetree> must contain exactly one root <type>");
        if (frame.kind == Element::InstanceTree && !frame.has_root)
            return fail("<instancetree> must contain exactly one root <instance>");
        stack_.pop_back();
    }

    void characters(std::string_view s)
    {
        if (error_)
            return;
        if (!text::trim(s).empty()) {
            const Frame& frame = stack_.back();
            fail("unexpected text inside " + (frame.kind == Element::None ? std::string("document")
                                                                          : "<" + frame.name + ">"));
        }
    }

    XML_Parser parser_;
    Document doc_;
    std::vector<Frame> stack_;
    std::optional<std::string> error_;
    bool saw_root_ = false;
};

Document parse_xml(std::string_view xml)
{
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, void (*)(XML_Parser)> parser(
        XML_ParserCreate(nullptr), XML_ParserFree);
    if (!parser)
        throw std::bad_alloc();
    DocumentBuilder builder(parser.get());
    XML_SetUserData(parser.get(), &builder);
    XML_SetElementHandler(parser.get(), &DocumentBuilder::on_start, &DocumentBuilder::on_end);
    XML_SetCharacterDataHandler(parser.get(), &DocumentBuilder::on_text);
    XML_SetStartDoctypeDeclHandler(parser.get(), &DocumentBuilder::on_doctype);

    constexpr std::size_t max_chunk = INT_MAX / 2;
    XML_Status status = XML_STATUS_OK;
    std::size_t offset = 0;
    do {
        const std::size_t n = std::min(max_chunk, xml.size() - offset);
        const bool last = offset + n == xml.size();
        status = XML_Parse(parser.get(), xml.data() + offset, static_cast<int>(n), last);
        offset += n;
    } while (status == XML_STATUS_OK && offset < xml.size());

    if (builder.error())
        throw SchemaError(*builder.error());
    if (status != XML_STATUS_OK)
        throw ParseError(XML_ErrorString(XML_GetErrorCode(parser.get())),
                         XML_GetCurrentLineNumber(parser.get()),
                         XML_GetCurrentColumnNumber(parser.get()) + 1);
    if (!builder.saw_root())
        throw ParseError("no element found", 1, 1);

    Document doc = builder.take();
    if (const auto violations = validate(doc); !violations.empty()) {
        std::string message = "document violates model invariants:";
        for (const auto& v : violations)
            message += "\n  " + to_string(v);
        throw SchemaError(message);
    }
    return doc;
}

// ---------------------------------------------------------------------------

class XmlWriter
{
public:
    void open(std::string_view element, std::initializer_list<std::pair<std::string_view, std::string_view>> attrs,
              bool empty)
    {
        out_.append(2 * depth_, ' ');
        out_ += '<';
        out_ += element;
        for (const auto& [key, value] : attrs) {
            out_ += ' ';
            out_ += key;
            out_ += "=\"";
            escape(value);
            out_ += '"';
        }
        out_ += empty ? "/>\n" : ">\n";
        if (!empty)
            ++depth_;
    }

    void close(std::string_view element)
    {
        --depth_;
        out_.append(2 * depth_, ' ');
        out_ += "</";
        out_ += element;
        out_ += ">\n";
    }

    std::string& buffer() { return out_; }

private:
    void escape(std::string_view s)
    {
        for (char c : s) {
            switch (c) {
            case '&': out_ += "&amp;"; break;
            case '<': out_ += "&lt;"; break;
            case '>': out_ += "&gt;"; break;
            case '"': out_ += "&quot;"; break;
            case '\t': out_ += "&#9;"; break;
            case '\n': out_ += "&#10;"; break;
            case '\r': out_ += "&#13;"; break;
            default: out_ += c;
            }
        }
    }

    std::string out_;
    std::size_t depth_ = 0;
};

std::string value_text(const Value& value)
{
    struct Visitor
    {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return text::format_real(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const Color& c) const
        {
            return text::format_real(c.r) + "," + text::format_real(c.g) + "," + text::format_real(c.b) + "," +
                   text::format_real(c.a);
        }
    };
    return std::visit(Visitor{}, value);
}

void write_att_values(XmlWriter& w, const std::vector<AttValue>& values)
{
    for (const auto& v : values) {
        const std::string text = value_text(v.value);
        w.open("attvalue", {{"name", v.name}, {"type", value_type_name(v.value)}, {"value", text}}, true);
    }
}

void write_type(XmlWriter& w, const TypeNode& node)
{
    const bool empty = node.att_defs.empty() && node.att_values.empty() && node.children.empty();
    w.open("type", {{"name", node.name}}, empty);
    if (empty)
        return;
    for (const auto& def : node.att_defs)
        w.open("attdef",
               {{"name", def.name}, {"desc", def.description}, {"category", def.category}, {"extra", def.extra}},
               true);
    write_att_values(w, node.att_values);
    for (const auto& child : node.children)
        write_type(w, child);
    w.close("type");
}

void write_instance(XmlWriter& w, const InstanceNode& node)
{
    const bool empty = node.att_values.empty() && node.points.empty() && node.children.empty();
    w.open("instance", {{"type", node.type_path}}, empty);
    if (empty)
        return;
    write_att_values(w, node.att_values);
    for (const auto& p : node.points) {
        const std::string x = text::format_real(p.x());
        const std::string y = text::format_real(p.y());
        const std::string z = text::format_real(p.z());
        w.open("point", {{"x", x}, {"y", y}, {"z", z}}, true);
    }
    for (const auto& child : node.children)
        write_instance(w, child);
    w.close("instance");
}

} // namespace

Document parse(std::string_view bytes)
{
    if (gzip::is_gzip(bytes)) {
        const std::string xml = gzip::decompress(bytes);
        return parse_xml(xml);
    }
    return parse_xml(bytes);
}

std::string serialize(const Document& doc, bool compress)
{
    if (const auto violations = validate(doc); !violations.empty()) {
        std::string message = "cannot serialize invalid document:";
        for (const auto& v : violations)
            message += "\n  " + to_string(v);
        throw ValidationError(message);
    }

    XmlWriter w;
    w.buffer() = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    const bool empty = doc.layer_order.empty() && doc.type_trees.empty() && doc.instance_trees.empty();
    w.open("heprep", {{"version", format_version}}, empty);
    if (!empty) {
        for (const auto& layer : doc.layer_order)
            w.open("layer", {{"name", layer}}, true);
        for (const auto& tree : doc.type_trees) {
            w.open("typetree", {{"name", tree.name}, {"version", tree.version}}, false);
            write_type(w, tree.root);
            w.close("typetree");
        }
        for (const auto& tree : doc.instance_trees) {
            w.open("instancetree",
                   {{"name", tree.name}, {"version", tree.version}, {"typetreename", tree.type_tree_name}}, false);
            write_instance(w, tree.root);
            w.close("instancetree");
        }
        w.close("heprep");
    }
    if (compress)
        return gzip::compress(w.buffer());
    return std::move(w.buffer());
}

FileStats stats(std::string_view bytes)
{
    const Document doc = parse(bytes);
    const TreeCounts counts = count_nodes(doc);
    return FileStats{bytes.size(), gzip::is_gzip(bytes), counts.types, counts.instances, counts.points};
}

} // namespace heprep::xmlio
