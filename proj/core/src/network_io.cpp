#include "infrasim/network_io.hpp"

#include "infrasim/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace infrasim
{
    using nlohmann::json;

    namespace
    {
        std::size_t
        line_of(std::string_view text, std::size_t byte)
        {
            std::size_t line = 1;
            for (std::size_t i = 0; i < byte && i < text.size(); ++i)
            {
                if (text[i] == '\n')
                {
                    ++line;
                }
            }
            return line;
        }

        json const&
        field(json const& obj, char const* key, std::string const& path)
        {
            if (!obj.is_object() || !obj.contains(key))
            {
                throw ParseError(
                    "missing field '" + path + "." + key + "'");
            }
            return obj.at(key);
        }

        std::string
        get_string(json const& obj, char const* key, std::string const& path)
        {
            auto const& v = field(obj, key, path);
            if (!v.is_string())
            {
                throw ParseError(
                    "field '" + path + "." + key + "' must be a string");
            }
            return v.get<std::string>();
        }

        double
        get_number(json const& v, std::string const& path)
        {
            if (!v.is_number())
            {
                throw ParseError("field '" + path + "' must be a number");
            }
            return v.get<double>();
        }

        json
        component_to_json(Component const& c)
        {
            json j;
            j["id"] = c.id;
            j["kind"] = std::string(to_string(c.kind));
            j["location"] = json::array({c.location.x, c.location.y});
            j["status"] = std::string(to_string(c.status));
            json attrs = json::object();
            for (auto const& [k, v] : c.capacity_attrs)
            {
                attrs[k] = v;
            }
            j["capacity_attrs"] = attrs;
            if (is_edge_kind(c.kind))
            {
                j["from"] = c.from;
                j["to"] = c.to;
            }
            if (is_bus_attached_kind(c.kind))
            {
                j["bus"] = c.bus;
            }
            return j;
        }

        Component
        component_from_json(
            json const& j, NetworkKind network, std::string const& path)
        {
            if (!j.is_object())
            {
                throw ParseError("'" + path + "' must be an object");
            }
            Component c;
            c.network = network;
            c.id = get_string(j, "id", path);
            auto const kind_name = get_string(j, "kind", path);
            auto kind = parse_component_kind(kind_name);
            if (!kind)
            {
                throw ParseError(
                    "field '" + path + ".kind' has unknown value '" +
                    kind_name + "'");
            }
            c.kind = *kind;
            auto const& loc = field(j, "location", path);
            if (!loc.is_array() || loc.size() != 2)
            {
                throw ParseError(
                    "field '" + path + ".location' must be [x, y]");
            }
            c.location = {
                get_number(loc[0], path + ".location[0]"),
                get_number(loc[1], path + ".location[1]")};
            if (j.contains("status"))
            {
                auto const s = get_string(j, "status", path);
                auto status = parse_status(s);
                if (!status)
                {
                    throw ParseError(
                        "field '" + path + ".status' has unknown value '" + s +
                        "'");
                }
                c.status = *status;
            }
            if (j.contains("capacity_attrs"))
            {
                auto const& attrs = j.at("capacity_attrs");
                if (!attrs.is_object())
                {
                    throw ParseError(
                        "field '" + path + ".capacity_attrs' must be an object");
                }
                for (auto it = attrs.begin(); it != attrs.end(); ++it)
                {
                    c.capacity_attrs[it.key()] = get_number(
                        it.value(), path + ".capacity_attrs." + it.key());
                }
            }
            if (is_edge_kind(c.kind))
            {
                c.from = get_string(j, "from", path);
                c.to = get_string(j, "to", path);
            }
            if (is_bus_attached_kind(c.kind))
            {
                c.bus = get_string(j, "bus", path);
            }
            return c;
        }
    }

    std::string
    network_to_json(IntegratedNetwork const& net)
    {
        json j;
        j["schema_version"] = kNetworkSchemaVersion;
        j["name"] = net.name;
        for (auto k : kAllNetworks)
        {
            json arr = json::array();
            for (auto const& c : net.components(k))
            {
                arr.push_back(component_to_json(c));
            }
            j[std::string(to_string(k))] = std::move(arr);
        }
        json deps = json::array();
        for (auto const& d : net.dependencies)
        {
            deps.push_back(
                {{"source_id", d.source_id},
                 {"target_id", d.target_id},
                 {"kind", std::string(to_string(d.kind))}});
        }
        j["dependencies"] = std::move(deps);
        json od = json::array();
        for (auto const& e : net.od_matrix)
        {
            od.push_back(
                {{"origin", e.origin},
                 {"destination", e.destination},
                 {"demand", e.demand}});
        }
        j["od_matrix"] = std::move(od);
        return j.dump(2) + "\n";
    }

    IntegratedNetwork
    network_from_json(std::string_view text)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (json::parse_error const& e)
        {
            throw ParseError(
                "JSON syntax error at line " +
                std::to_string(line_of(text, e.byte)) + ": " + e.what());
        }
        if (!j.is_object())
        {
            throw ParseError("network document must be a JSON object");
        }
        if (j.contains("schema_version"))
        {
            auto v = get_number(j.at("schema_version"), "schema_version");
            if (v != kNetworkSchemaVersion)
            {
                throw ParseError(
                    "unsupported schema_version " + j.at("schema_version").dump());
            }
        }

        IntegratedNetwork net;
        if (j.contains("name"))
        {
            net.name = get_string(j, "name", "");
        }
        for (auto k : kAllNetworks)
        {
            std::string const key(to_string(k));
            auto const& arr = field(j, key.c_str(), "");
            if (!arr.is_array())
            {
                throw ParseError("field '" + key + "' must be an array");
            }
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                net.components(k).push_back(component_from_json(
                    arr[i], k, key + "[" + std::to_string(i) + "]"));
            }
        }
        if (j.contains("dependencies"))
        {
            auto const& arr = j.at("dependencies");
            if (!arr.is_array())
            {
                throw ParseError("field 'dependencies' must be an array");
            }
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                std::string const path =
                    "dependencies[" + std::to_string(i) + "]";
                Dependency d;
                d.source_id = get_string(arr[i], "source_id", path);
                d.target_id = get_string(arr[i], "target_id", path);
                auto const kind = get_string(arr[i], "kind", path);
                auto parsed = parse_dependency_kind(kind);
                if (!parsed)
                {
                    throw ParseError(
                        "field '" + path + ".kind' has unknown value '" +
                        kind + "'");
                }
                d.kind = *parsed;
                net.dependencies.push_back(std::move(d));
            }
        }
        if (j.contains("od_matrix"))
        {
            auto const& arr = j.at("od_matrix");
            if (!arr.is_array())
            {
                throw ParseError("field 'od_matrix' must be an array");
            }
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                std::string const path = "od_matrix[" + std::to_string(i) + "]";
                OdDemand e;
                e.origin = get_string(arr[i], "origin", path);
                e.destination = get_string(arr[i], "destination", path);
                e.demand = get_number(
                    field(arr[i], "demand", path), path + ".demand");
                net.od_matrix.push_back(std::move(e));
            }
        }

        auto violations = validate_network(net);
        if (!violations.empty())
        {
            std::ostringstream oss;
            oss << "network failed validation (" << violations.size()
                << " violation" << (violations.size() == 1 ? "" : "s")
                << "):";
            for (auto const& v : violations)
            {
                oss << "\n  [" << v.rule << "] " << v.component_id << ": "
                    << v.message;
            }
            throw ValidationError(oss.str());
        }
        return net;
    }

    std::string
    read_text_file(std::filesystem::path const& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw Error("cannot open '" + path.string() + "' for reading");
        }
        std::ostringstream oss;
        oss << in.rdbuf();
        return oss.str();
    }

    void
    write_text_file(std::filesystem::path const& path, std::string_view text)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw Error("cannot open '" + path.string() + "' for writing");
        }
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
    }

    IntegratedNetwork
    load_network(std::filesystem::path const& path)
    {
        auto const text = read_text_file(path);
        try
        {
            return network_from_json(text);
        }
        catch (ParseError const& e)
        {
            throw ParseError(path.string() + ": " + e.what());
        }
        catch (ValidationError const& e)
        {
            throw ValidationError(path.string() + ": " + e.what());
        }
    }

    void
    save_network(IntegratedNetwork const& net, std::filesystem::path const& path)
    {
        write_text_file(path, network_to_json(net));
    }
}
