#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evolvegen/common/rng.hpp"
#include "evolvegen/common/word.hpp"

namespace evolvegen::graph {

struct NodeId {
  std::uint32_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

enum class OpKind : std::uint8_t { kAdd, kSub, kMul, kAnd, kOr, kXor, kNot, kShl, kShr, kEq, kNeq, kLt, kLe, kMux };
enum class DType : std::uint8_t { kInt, kFixed };
enum class Rounding : std::uint8_t { kTruncate, kRoundHalfUp };
enum class Saturation : std::uint8_t { kWrap, kSaturate };
enum class NodeKind : std::uint8_t { kOp, kLoop, kBranch, kDep };

inline constexpr int kNumOpKinds = 14;

std::string_view op_kind_name(OpKind k);
std::optional<OpKind> parse_op_kind(std::string_view name);
unsigned op_arity(OpKind k);
bool is_comparison(OpKind k);

struct OpAttrs {
  OpKind kind = OpKind::kAdd;
  unsigned width = 8;
  DType dtype = DType::kInt;
  bool is_signed = false;
  unsigned int_bits = 8;  // meaningful for Fixed only
  Rounding rounding = Rounding::kTruncate;
  Saturation saturation = Saturation::kWrap;

  unsigned frac_bits() const { return dtype == DType::kFixed ? width - int_bits : 0; }
  bool operator==(const OpAttrs&) const = default;
};

struct LoopAttrs {
  std::int64_t start = 0;
  std::int64_t end = 1;
  std::int64_t step = 1;
  bool pipelined = false;
  bool flattened = false;
  unsigned unroll_factor = 1;
  bool fully_unrolled = false;

  // ceil((end - start) / step); nonpositive when the step points away.
  std::int64_t trip() const;
  bool operator==(const LoopAttrs&) const = default;
};

struct BranchAttrs {
  NodeId condition;
  bool operator==(const BranchAttrs&) const = default;
};

struct DepAttrs {
  unsigned distance = 1;
  NodeId source;
  bool operator==(const DepAttrs&) const = default;
};

using NodeAttrs = std::variant<OpAttrs, LoopAttrs, BranchAttrs, DepAttrs>;

struct Node {
  NodeId id;
  NodeAttrs attrs;
  std::optional<NodeId> region;  // enclosing Loop/Branch node, none = top level

  NodeKind kind() const { return static_cast<NodeKind>(attrs.index()); }
  const OpAttrs& op() const { return std::get<OpAttrs>(attrs); }
  const LoopAttrs& loop() const { return std::get<LoopAttrs>(attrs); }
  const BranchAttrs& branch() const { return std::get<BranchAttrs>(attrs); }
  const DepAttrs& dep() const { return std::get<DepAttrs>(attrs); }
  bool operator==(const Node&) const = default;
};

// Operand source: a primary input, a node (OpNode/DepNode value, or a
// LoopNode's induction variable), or an integer constant.
struct Producer {
  enum class Kind : std::uint8_t { kInput, kNode, kConst };
  Kind kind = Kind::kConst;
  std::uint32_t input = 0;
  NodeId node;
  std::uint64_t value = 0;  // raw bits for constants
  unsigned width = 1;
  bool is_signed = false;

  static Producer of_input(std::uint32_t i) { return {Kind::kInput, i, {}, 0, 0, false}; }
  static Producer of_node(NodeId n) { return {Kind::kNode, 0, n, 0, 0, false}; }
  static Producer of_const(std::uint64_t v, unsigned w, bool s) { return {Kind::kConst, 0, {}, v, w, s}; }
  bool operator==(const Producer&) const = default;
};

struct Edge {
  Producer producer;
  NodeId consumer;
  unsigned slot = 0;
  bool operator==(const Edge&) const = default;
};

struct PrimaryInput {
  std::string name;
  unsigned width = 8;
  DType dtype = DType::kInt;
  bool is_signed = false;
  unsigned int_bits = 8;
  bool operator==(const PrimaryInput&) const = default;
};

enum class ActionKind : std::uint8_t { kAddOp, kAddLoop, kAddBranch, kAddDep };
inline constexpr int kNumActionKinds = 4;
std::string_view action_kind_name(ActionKind k);
std::optional<ActionKind> parse_action_kind(std::string_view name);

// Request to add one node. `attrs` and `region` are optional on input (drawn
// from the rng when absent) and always filled in action_log entries, together
// with the seed that drove operand selection. An action carrying both attrs
// and region is replayed with its own seed.
struct ConstructionAction {
  ActionKind kind = ActionKind::kAddOp;
  std::optional<NodeAttrs> attrs;
  std::optional<std::optional<NodeId>> region;
  std::uint64_t seed = 0;
  bool operator==(const ConstructionAction&) const = default;
};

// Value type of a producer: raw width, signedness, fraction bits.
struct ValueType {
  unsigned width = 1;
  bool is_signed = false;
  unsigned frac = 0;
  bool operator==(const ValueType&) const = default;
};

// Loop induction variables are 8-bit signed integers wrapping modulo 256.
inline constexpr unsigned kInductionWidth = 8;

struct ComputationGraph {
  std::vector<PrimaryInput> inputs;
  std::vector<Node> nodes;  // creation order
  std::vector<Edge> edges;
  std::vector<NodeId> outputs;
  std::vector<ConstructionAction> action_log;

  std::optional<std::size_t> find(NodeId id) const;
  const Node& node(NodeId id) const;
  Node& node(NodeId id);
  NodeId fresh_id() const;
  // Operand edges of `consumer`, ordered by slot.
  std::vector<const Edge*> operands(NodeId consumer) const;
  ValueType type_of(const Producer& p) const;
  bool operator==(const ComputationGraph&) const = default;
};

// Pre-order of the region tree, children in creation order.
std::vector<NodeId> program_order(const ComputationGraph& g);
// Enclosing Loop/Branch nodes from outermost to innermost.
std::vector<NodeId> region_chain(const ComputationGraph& g, NodeId n);
std::optional<NodeId> innermost_loop(const ComputationGraph& g, NodeId n);
// OpNodes without data-edge consumers that are not branch conditions.
std::vector<NodeId> compute_outputs(const ComputationGraph& g);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const ComputationGraph& g);

struct GenerationConfig {
  unsigned min_inputs = 1;
  unsigned max_inputs = 3;
  unsigned min_width = 1;
  unsigned max_width = 16;
  std::int64_t max_trip = 8;
  unsigned max_loop_depth = 3;
  double const_operand_prob = 0.15;
  double fixed_prob = 0.25;
  // Relative weights for the action kinds during fresh generation.
  double weight_op = 4, weight_loop = 1, weight_branch = 1, weight_dep = 1;
};

// Throws PlacementInfeasible. The input graph is not modified.
ComputationGraph apply_action(const ComputationGraph& g, const ConstructionAction& a, Rng& rng,
                              const GenerationConfig& cfg = {});

// Structural precondition of an action kind: false means every placement
// fails. A true result still allows individual placements to fail.
bool action_applicable(const ComputationGraph& g, ActionKind k, const GenerationConfig& cfg = {});

// Fresh graph with random primary inputs and `length` accepted actions.
// Throws GenerationStalled.
ComputationGraph generate_fresh(Rng& rng, unsigned length, const GenerationConfig& cfg = {});

// SHA-256 over the structure relabeled by creation order; hex encoded.
std::string canonical_hash(const ComputationGraph& g);

inline constexpr int kGraphSchemaVersion = 1;
std::string serialize(const ComputationGraph& g);
// Throws SchemaViolation.
ComputationGraph deserialize(std::string_view text);

}  // namespace evolvegen::graph
