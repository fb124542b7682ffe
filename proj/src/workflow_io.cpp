#include "helios/workflow_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace helios {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

ValueSpec parse_value_spec(const json& j) {
    ValueSpec v;
    if (j.is_string()) {
        v.text = j.get<std::string>();
    } else if (j.is_object() && j.contains("token_count")) {
        v.synthetic = true;
        v.token_count = j.at("token_count").get<std::size_t>();
    } else {
        fail("value entry must be a string or {\"token_count\": N}");
    }
    return v;
}

json value_spec_json(const ValueSpec& v) {
    if (v.synthetic) return json{{"token_count", v.token_count}};
    return json(v.text);
}

json args_json(const Operator& n) {
    json a = json::object();
    switch (n.kind) {
        case OpKind::kData: {
            json vals = json::array();
            for (const ValueSpec& v : n.values) vals.push_back(value_spec_json(v));
            a["values"] = std::move(vals);
            break;
        }
        case OpKind::kInput:
            a["name"] = n.input_name;
            break;
        case OpKind::kOutput:
            break;
        case OpKind::kFormat:
            a["template"] = n.template_text;
            break;
        case OpKind::kLambda:
            a["fn"] = n.fn;
            break;
        case OpKind::kLlm: {
            json msgs = json::array();
            for (const Message& m : n.messages) {
                json parts = json::array();
                for (const MessagePart& p : m.parts) {
                    if (p.is_ref)
                        parts.push_back(json{{"ref", p.ref}});
                    else
                        parts.push_back(json{{"text", p.text}});
                }
                msgs.push_back(json{{"role", msg_role_name(m.role)}, {"parts", std::move(parts)}});
            }
            a["messages"] = std::move(msgs);
            a["deterministic"] = n.deterministic;
            break;
        }
        case OpKind::kCacheFetch: {
            json keys = json::array();
            for (std::uint64_t k : n.keys) {
                char buf[17];
                std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(k));
                keys.push_back(std::string(buf));
            }
            a["keys"] = std::move(keys);
            json vals = json::array();
            for (const TokenSeq& t : n.fetched) vals.push_back(t);
            a["tokens"] = std::move(vals);
            break;
        }
    }
    return a;
}

void parse_args(const json& a, Operator& n) {
    switch (n.kind) {
        case OpKind::kData:
            for (const json& v : a.at("values")) n.values.push_back(parse_value_spec(v));
            break;
        case OpKind::kInput:
            n.input_name = a.at("name").get<std::string>();
            break;
        case OpKind::kOutput:
            break;
        case OpKind::kFormat:
            n.template_text = a.at("template").get<std::string>();
            break;
        case OpKind::kLambda:
            n.fn = a.at("fn").get<std::string>();
            break;
        case OpKind::kLlm: {
            for (const json& jm : a.at("messages")) {
                Message m;
                m.role = msg_role_from_name(jm.at("role").get<std::string>());
                for (const json& jp : jm.at("parts")) {
                    MessagePart p;
                    if (jp.contains("ref")) {
                        p.is_ref = true;
                        p.ref = jp.at("ref").get<NodeId>();
                    } else {
                        p.text = jp.at("text").get<std::string>();
                    }
                    m.parts.push_back(std::move(p));
                }
                n.messages.push_back(std::move(m));
            }
            n.deterministic = a.value("deterministic", true);
            break;
        }
        case OpKind::kCacheFetch: {
            for (const json& jk : a.at("keys"))
                n.keys.push_back(std::stoull(jk.get<std::string>(), nullptr, 16));
            for (const json& jv : a.at("tokens")) n.fetched.push_back(jv.get<TokenSeq>());
            break;
        }
    }
}

}  // namespace

WorkflowGraph parse_workflow(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("workflow json: ") + e.what());
    }
    WorkflowGraph g;
    for (const json& jn : j.at("nodes")) {
        Operator n;
        n.id = jn.at("id").get<NodeId>();
        n.kind = op_kind_from_name(jn.at("kind").get<std::string>());
        parse_args(jn.value("args", json::object()), n);
        if (g.nodes.count(n.id)) fail("duplicate node id " + std::to_string(n.id));
        g.nodes[n.id] = std::move(n);
    }
    if (j.contains("edges"))
        for (const json& je : j.at("edges"))
            g.edges.push_back(Edge{je.at("from").get<NodeId>(), je.at("to").get<NodeId>(),
                                   je.value("slot", 0)});
    // derive llm input edges from message refs when the file omits them
    for (auto& [id, n] : g.nodes) {
        if (n.kind != OpKind::kLlm) continue;
        bool has_edges = false;
        for (const Edge& e : g.edges)
            if (e.to == id) has_edges = true;
        if (has_edges) continue;
        int slot = 0;
        for (const Message& m : n.messages)
            for (const MessagePart& p : m.parts)
                if (p.is_ref) g.edges.push_back(Edge{p.ref, id, slot++});
    }
    if (j.contains("outputs"))
        for (const json& jo : j.at("outputs")) g.outputs.push_back(jo.get<NodeId>());
    validate(g);
    return g;
}

std::string serialize_workflow(const WorkflowGraph& g) {
    json nodes = json::array();
    for (const auto& [id, n] : g.nodes)
        nodes.push_back(json{{"id", id}, {"kind", op_kind_name(n.kind)}, {"args", args_json(n)}});
    json edges = json::array();
    for (const Edge& e : g.edges)
        edges.push_back(json{{"from", e.from}, {"to", e.to}, {"slot", e.slot}});
    json j{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"outputs", g.outputs}};
    return j.dump(2) + "\n";
}

InputBatch parse_inputs(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("inputs json: ") + e.what());
    }
    InputBatch in;
    for (const auto& [name, vals] : j.items()) {
        if (!vals.is_array()) fail("input '" + name + "': expected an array");
        for (const json& v : vals) in[name].push_back(parse_value_spec(v));
    }
    return in;
}

std::string serialize_inputs(const InputBatch& in) {
    json j = json::object();
    for (const auto& [name, vals] : in) {
        json arr = json::array();
        for (const ValueSpec& v : vals) arr.push_back(value_spec_json(v));
        j[name] = std::move(arr);
    }
    return j.dump(2) + "\n";
}

ProfileStats parse_profile(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("profile json: ") + e.what());
    }
    ProfileStats p;
    for (const auto& [key, val] : j.items()) {
        NodeId id = std::stoll(key);
        p[id].len_out = val.at("len_out").get<double>();
        if (p[id].len_out < 0) fail("profile for node " + key + ": negative len_out");
    }
    return p;
}

std::string serialize_profile(const ProfileStats& p) {
    json j = json::object();
    for (const auto& [id, prof] : p)
        j[std::to_string(id)] = json{{"len_out", prof.len_out}};
    return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("cannot write " + path);
    f << content;
}

WorkflowGraph load_workflow(const std::string& path) { return parse_workflow(read_file(path)); }
void save_workflow(const WorkflowGraph& g, const std::string& path) { write_file(path, serialize_workflow(g)); }
InputBatch load_inputs(const std::string& path) { return parse_inputs(read_file(path)); }
void save_inputs(const InputBatch& in, const std::string& path) { write_file(path, serialize_inputs(in)); }
ProfileStats load_profile(const std::string& path) { return parse_profile(read_file(path)); }
void save_profile(const ProfileStats& p, const std::string& path) { write_file(path, serialize_profile(p)); }

}  // namespace helios
