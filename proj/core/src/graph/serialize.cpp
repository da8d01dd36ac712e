#include <openssl/sha.h>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <json.hpp>
#include <unordered_map>

#include "evolvegen/common/error.hpp"
#include "evolvegen/graph/graph.hpp"

namespace evolvegen::graph {

using nlohmann::json;

namespace {

using Relabel = std::function<std::uint32_t(NodeId)>;

const char* dtype_name(DType d) { return d == DType::kFixed ? "fixed" : "int"; }

json attrs_to_json(const NodeAttrs& attrs, const Relabel& id) {
  json j;
  switch (static_cast<NodeKind>(attrs.index())) {
    case NodeKind::kOp: {
      const auto& a = std::get<OpAttrs>(attrs);
      j["kind"] = "op";
      j["op"] = op_kind_name(a.kind);
      j["width"] = a.width;
      j["dtype"] = dtype_name(a.dtype);
      j["signed"] = a.is_signed;
      j["int_bits"] = a.int_bits;
      j["rounding"] = a.rounding == Rounding::kRoundHalfUp ? "round_half_up" : "truncate";
      j["saturation"] = a.saturation == Saturation::kSaturate ? "saturate" : "wrap";
      break;
    }
    case NodeKind::kLoop: {
      const auto& l = std::get<LoopAttrs>(attrs);
      j["kind"] = "loop";
      j["start"] = l.start;
      j["end"] = l.end;
      j["step"] = l.step;
      j["pipelined"] = l.pipelined;
      j["flattened"] = l.flattened;
      j["unroll_factor"] = l.unroll_factor;
      j["fully_unrolled"] = l.fully_unrolled;
      break;
    }
    case NodeKind::kBranch:
      j["kind"] = "branch";
      j["condition"] = id(std::get<BranchAttrs>(attrs).condition);
      break;
    case NodeKind::kDep:
      j["kind"] = "dep";
      j["distance"] = std::get<DepAttrs>(attrs).distance;
      j["source"] = id(std::get<DepAttrs>(attrs).source);
      break;
  }
  return j;
}

json producer_to_json(const Producer& p, const Relabel& id) {
  json j;
  switch (p.kind) {
    case Producer::Kind::kInput: j["input"] = p.input; break;
    case Producer::Kind::kNode: j["node"] = id(p.node); break;
    case Producer::Kind::kConst:
      j["const"] = p.value;
      j["width"] = p.width;
      j["signed"] = p.is_signed;
      break;
  }
  return j;
}

json inputs_to_json(const ComputationGraph& g) {
  json arr = json::array();
  for (const PrimaryInput& in : g.inputs) {
    arr.push_back({{"name", in.name},
                   {"width", in.width},
                   {"dtype", dtype_name(in.dtype)},
                   {"signed", in.is_signed},
                   {"int_bits", in.int_bits}});
  }
  return arr;
}

json to_json(const ComputationGraph& g, const Relabel& id, bool with_log) {
  json doc;
  doc["version"] = kGraphSchemaVersion;
  doc["inputs"] = inputs_to_json(g);
  json nodes = json::array();
  json regions = json::array();
  for (const Node& n : g.nodes) {
    json jn = attrs_to_json(n.attrs, id);
    jn["id"] = id(n.id);
    nodes.push_back(std::move(jn));
    if (n.region) regions.push_back({{"child", id(n.id)}, {"parent", id(*n.region)}});
  }
  doc["nodes"] = std::move(nodes);
  std::vector<const Edge*> edges;
  for (const Edge& e : g.edges) edges.push_back(&e);
  if (!with_log) {
    // Canonical form: edge order is not structural.
    std::sort(edges.begin(), edges.end(), [&](const Edge* a, const Edge* b) {
      return std::make_pair(id(a->consumer), a->slot) < std::make_pair(id(b->consumer), b->slot);
    });
  }
  json je = json::array();
  for (const Edge* e : edges) {
    je.push_back({{"producer", producer_to_json(e->producer, id)}, {"consumer", id(e->consumer)}, {"slot", e->slot}});
  }
  doc["edges"] = std::move(je);
  doc["regions"] = std::move(regions);
  if (with_log) {
    json outs = json::array();
    for (NodeId o : g.outputs) outs.push_back(id(o));
    doc["outputs"] = std::move(outs);
    json log = json::array();
    for (const ConstructionAction& a : g.action_log) {
      json ja;
      ja["kind"] = action_kind_name(a.kind);
      ja["attrs"] = a.attrs ? attrs_to_json(*a.attrs, id) : json(nullptr);
      if (a.region && *a.region) {
        ja["region"] = id(**a.region);
      } else if (a.region) {
        ja["region"] = "root";
      } else {
        ja["region"] = nullptr;
      }
      ja["seed"] = a.seed;
      log.push_back(std::move(ja));
    }
    doc["action_log"] = std::move(log);
  }
  return doc;
}

[[noreturn]] void bad(const std::string& what) { throw SchemaViolation(what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) bad(std::string("expected object while reading '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get_as(const json& j, const char* key) {
  const json& v = field(j, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

DType parse_dtype(const std::string& s) {
  if (s == "int") return DType::kInt;
  if (s == "fixed") return DType::kFixed;
  bad("unknown dtype '" + s + "'");
}

NodeAttrs attrs_from_json(const json& j) {
  auto kind = get_as<std::string>(j, "kind");
  if (kind == "op") {
    OpAttrs a;
    auto op = parse_op_kind(get_as<std::string>(j, "op"));
    if (!op) bad("unknown op kind");
    a.kind = *op;
    a.width = get_as<unsigned>(j, "width");
    a.dtype = parse_dtype(get_as<std::string>(j, "dtype"));
    a.is_signed = get_as<bool>(j, "signed");
    a.int_bits = get_as<unsigned>(j, "int_bits");
    auto rounding = get_as<std::string>(j, "rounding");
    if (rounding != "truncate" && rounding != "round_half_up") bad("unknown rounding '" + rounding + "'");
    a.rounding = rounding == "round_half_up" ? Rounding::kRoundHalfUp : Rounding::kTruncate;
    auto sat = get_as<std::string>(j, "saturation");
    if (sat != "wrap" && sat != "saturate") bad("unknown saturation '" + sat + "'");
    a.saturation = sat == "saturate" ? Saturation::kSaturate : Saturation::kWrap;
    return a;
  }
  if (kind == "loop") {
    LoopAttrs l;
    l.start = get_as<std::int64_t>(j, "start");
    l.end = get_as<std::int64_t>(j, "end");
    l.step = get_as<std::int64_t>(j, "step");
    l.pipelined = get_as<bool>(j, "pipelined");
    l.flattened = get_as<bool>(j, "flattened");
    l.unroll_factor = get_as<unsigned>(j, "unroll_factor");
    l.fully_unrolled = get_as<bool>(j, "fully_unrolled");
    return l;
  }
  if (kind == "branch") return BranchAttrs{NodeId{get_as<std::uint32_t>(j, "condition")}};
  if (kind == "dep") {
    return DepAttrs{get_as<unsigned>(j, "distance"), NodeId{get_as<std::uint32_t>(j, "source")}};
  }
  bad("unknown node kind '" + kind + "'");
}

Producer producer_from_json(const json& j) {
  if (!j.is_object()) bad("producer must be an object");
  if (j.contains("input")) return Producer::of_input(get_as<std::uint32_t>(j, "input"));
  if (j.contains("node")) return Producer::of_node(NodeId{get_as<std::uint32_t>(j, "node")});
  if (j.contains("const")) {
    return Producer::of_const(get_as<std::uint64_t>(j, "const"), get_as<unsigned>(j, "width"),
                              get_as<bool>(j, "signed"));
  }
  bad("producer has no input/node/const field");
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  std::string hex;
  char buf[3];
  for (unsigned char c : digest) {
    std::snprintf(buf, sizeof buf, "%02x", c);
    hex += buf;
  }
  return hex;
}

}  // namespace

std::string serialize(const ComputationGraph& g) {
  Relabel id = [](NodeId n) { return n.value; };
  return to_json(g, id, true).dump(1) + "\n";
}

ComputationGraph deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed graph document: ") + e.what());
  }
  if (!doc.is_object()) bad("graph document must be an object");
  const json& version = field(doc, "version");
  if (!version.is_number_integer() || version.get<int>() != kGraphSchemaVersion) {
    bad("unsupported schema version " + version.dump());
  }
  ComputationGraph g;
  const json& inputs = field(doc, "inputs");
  if (!inputs.is_array()) bad("'inputs' must be an array");
  for (const json& ji : inputs) {
    PrimaryInput in;
    in.name = get_as<std::string>(ji, "name");
    in.width = get_as<unsigned>(ji, "width");
    in.dtype = parse_dtype(get_as<std::string>(ji, "dtype"));
    in.is_signed = get_as<bool>(ji, "signed");
    in.int_bits = get_as<unsigned>(ji, "int_bits");
    g.inputs.push_back(in);
  }
  const json& nodes = field(doc, "nodes");
  if (!nodes.is_array()) bad("'nodes' must be an array");
  for (const json& jn : nodes) {
    Node n;
    n.id = NodeId{get_as<std::uint32_t>(jn, "id")};
    n.attrs = attrs_from_json(jn);
    g.nodes.push_back(n);
  }
  const json& regions = field(doc, "regions");
  if (!regions.is_array()) bad("'regions' must be an array");
  for (const json& jr : regions) {
    NodeId child{get_as<std::uint32_t>(jr, "child")};
    NodeId parent{get_as<std::uint32_t>(jr, "parent")};
    auto idx = g.find(child);
    if (!idx) bad("region entry for unknown node " + std::to_string(child.value));
    g.nodes[*idx].region = parent;
  }
  const json& edges = field(doc, "edges");
  if (!edges.is_array()) bad("'edges' must be an array");
  for (const json& je : edges) {
    Edge e;
    e.producer = producer_from_json(field(je, "producer"));
    e.consumer = NodeId{get_as<std::uint32_t>(je, "consumer")};
    e.slot = get_as<unsigned>(je, "slot");
    g.edges.push_back(e);
  }
  const json& outputs = field(doc, "outputs");
  if (!outputs.is_array()) bad("'outputs' must be an array");
  for (const json& jo : outputs) {
    if (!jo.is_number_unsigned()) bad("output ids must be unsigned integers");
    g.outputs.push_back(NodeId{jo.get<std::uint32_t>()});
  }
  const json& log = field(doc, "action_log");
  if (!log.is_array()) bad("'action_log' must be an array");
  for (const json& ja : log) {
    ConstructionAction a;
    auto kind = parse_action_kind(get_as<std::string>(ja, "kind"));
    if (!kind) bad("unknown action kind");
    a.kind = *kind;
    const json& attrs = field(ja, "attrs");
    if (!attrs.is_null()) a.attrs = attrs_from_json(attrs);
    const json& region = field(ja, "region");
    if (region.is_string() && region.get<std::string>() == "root") {
      a.region = std::optional<NodeId>();
    } else if (region.is_number_unsigned()) {
      a.region = std::optional<NodeId>(NodeId{region.get<std::uint32_t>()});
    } else if (!region.is_null()) {
      bad("invalid action region");
    }
    a.seed = get_as<std::uint64_t>(ja, "seed");
    g.action_log.push_back(std::move(a));
  }
  return g;
}

std::string canonical_hash(const ComputationGraph& g) {
  std::unordered_map<std::uint32_t, std::uint32_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i].id.value] = static_cast<std::uint32_t>(i);
  Relabel id = [&](NodeId n) {
    auto it = index.find(n.value);
    return it == index.end() ? 0xFFFFFFFFu : it->second;
  };
  return sha256_hex(to_json(g, id, false).dump());
}

}  // namespace evolvegen::graph
