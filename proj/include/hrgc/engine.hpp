#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hrgc/code.hpp"
#include "hrgc/error.hpp"
#include "hrgc/matrix.hpp"

namespace hrgc {

// The q x A block of codeword rows held by one storage node.
struct NodeState {
  int id = 0;
  Matrix y;
  std::uint64_t digest = 0;

  bool operator==(const NodeState&) const = default;
};

enum class RequestKind { Repair, Reconstruct };
enum class OpMode { Plain, Detect, Recover };

inline std::string to_string(OpMode m) {
  switch (m) {
    case OpMode::Plain: return "plain";
    case OpMode::Detect: return "detect";
    case OpMode::Recover: return "recover";
  }
  return "?";
}

inline OpMode parse_op_mode(const std::string& s) {
  if (s == "plain") return OpMode::Plain;
  if (s == "detect") return OpMode::Detect;
  if (s == "recover") return OpMode::Recover;
  throw Error(ErrorKind::InvalidParams, "mode must be plain, detect or recover, got '" + s + "'");
}

// What one helper sends back for request level j. Repair: layers[l][t] is the
// help symbol for block t. Reconstruct: layers[l] is the full row l of
// B_g^{-1} Y_g (A symbols).
struct HelpSymbolBatch {
  int helper = 0;
  int level = 0;
  RequestKind kind = RequestKind::Repair;
  int target = -1;
  std::vector<std::vector<Symbol>> layers;

  std::size_t symbol_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
  }
};

enum class Outcome { Success, DetectionAlarm, DecodeFailure };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::DetectionAlarm: return "detection-alarm";
    case Outcome::DecodeFailure: return "decode-failure";
  }
  return "?";
}

struct LayerTally {
  int layer = 0;
  int erasures = 0;  // nodes already flagged when the layer started
  int errors = 0;    // helper symbols found wrong in this layer
  int newly_flagged = 0;
};

struct Alarm {
  int layer = 0;
  int block = 0;
  std::string reason;
};

struct RepairReport {
  OpMode mode = OpMode::Plain;
  Outcome outcome = Outcome::Success;
  int target = -1;
  std::optional<Matrix> regenerated;
  std::vector<int> corrupted_nodes;
  std::vector<LayerTally> tallies;
  std::optional<Alarm> alarm;
  std::string detail;
};

struct ReconstructReport {
  OpMode mode = OpMode::Plain;
  Outcome outcome = Outcome::Success;
  std::optional<std::vector<Symbol>> message;
  std::vector<int> corrupted_nodes;
  std::vector<LayerTally> tallies;
  std::optional<Alarm> alarm;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Helper side

inline Matrix transformed_rows(const Code& c, const NodeState& node) {
  return linalg::mul(c.field(), c.basis_inv(node.id), node.y);
}

// Help symbols p = y~_{g,l,t} . mu_{z,l} for every layer l <= j.
inline HelpSymbolBatch helper_response(const Code& c, const NodeState& node, int j, int z) {
  if (j < 0 || j >= c.q()) throw Error(ErrorKind::IndexOutOfRange, "request level");
  if (z < 0 || z >= c.nodes() || z == node.id) throw Error(ErrorKind::IndexOutOfRange, "repair target");
  const Field& f = c.field();
  Matrix yt = transformed_rows(c, node);
  HelpSymbolBatch b{node.id, j, RequestKind::Repair, z, {}};
  for (int l = 0; l <= j; ++l) {
    const int a = c.profile().alpha_at(l);
    auto mu = c.mu(z, l);
    std::vector<Symbol> syms;
    auto row = yt.row(static_cast<std::size_t>(l));
    for (int t = 0; t < c.profile().blocks(l); ++t)
      syms.push_back(linalg::dot(f, row.subspan(static_cast<std::size_t>(t * a), static_cast<std::size_t>(a)), mu));
    b.layers.push_back(std::move(syms));
  }
  return b;
}

inline HelpSymbolBatch reconstruct_response(const Code& c, const NodeState& node, int j) {
  if (j < 0 || j >= c.q()) throw Error(ErrorKind::IndexOutOfRange, "request level");
  Matrix yt = transformed_rows(c, node);
  HelpSymbolBatch b{node.id, j, RequestKind::Reconstruct, -1, {}};
  for (int l = 0; l <= j; ++l) {
    auto row = yt.row(static_cast<std::size_t>(l));
    b.layers.emplace_back(row.begin(), row.end());
  }
  return b;
}

// ---------------------------------------------------------------------------
// Staged request plan

struct PlanEntry {
  int helper = 0;
  int level = 0;
  bool operator==(const PlanEntry&) const = default;
};

// Contributors needed per layer for an operation in plain or detect mode.
inline std::vector<int> contributors_needed(const CodeProfile& p, RequestKind kind, OpMode mode) {
  std::vector<int> need;
  for (int l = 0; l < p.q; ++l) need.push_back((kind == RequestKind::Repair ? p.d_at(l) : p.k_at(l)) + (mode == OpMode::Detect ? 1 : 0));
  return need;
}

// Nodes are taken in ascending id order; the first ones serve the deepest
// layers, so every layer's contributors form a prefix of the live list. A
// node asked for level j answers every layer l <= j.
inline std::vector<PlanEntry> staged_request_plan(const CodeProfile& p, RequestKind kind, OpMode mode,
                                                  const std::vector<int>& live_ids) {
  std::vector<int> live = live_ids;
  std::sort(live.begin(), live.end());
  if (mode == OpMode::Recover) {
    std::vector<PlanEntry> all;
    for (int id : live) all.push_back({id, p.q - 1});
    return all;
  }
  auto need = contributors_needed(p, kind, mode);
  // MBR k need not be monotone; a layer is covered once its count is reached.
  for (int l = p.q - 2; l >= 0; --l) need[static_cast<std::size_t>(l)] = std::max(need[static_cast<std::size_t>(l)], need[static_cast<std::size_t>(l + 1)]);
  if (static_cast<int>(live.size()) < need.front())
    throw Error(ErrorKind::NotEnoughHelpers, "need " + std::to_string(need.front()) + " live nodes, have " +
                                                 std::to_string(live.size()));
  std::vector<PlanEntry> plan;
  int next = 0;
  for (int j = p.q - 1; j >= 0; --j) {
    const int upper = j + 1 < p.q ? need[static_cast<std::size_t>(j + 1)] : 0;
    for (int c = 0; c < need[static_cast<std::size_t>(j)] - upper; ++c) plan.push_back({live[static_cast<std::size_t>(next++)], j});
  }
  return plan;
}

namespace detail {

// Batches that answer layer l, ascending helper id, with length checks.
inline std::vector<const HelpSymbolBatch*> layer_contributors(const Code& c, const std::vector<HelpSymbolBatch>& batches,
                                                              int l, RequestKind kind) {
  std::vector<const HelpSymbolBatch*> out;
  std::set<int> seen;
  for (const auto& b : batches) {
    if (b.kind != kind) throw Error(ErrorKind::InvalidParams, "batch kind does not match the operation");
    if (b.helper < 0 || b.helper >= c.nodes()) throw Error(ErrorKind::IndexOutOfRange, "helper id");
    if (!seen.insert(b.helper).second) throw Error(ErrorKind::InvalidParams, "duplicate helper batch");
    if (b.level < l) continue;
    if (static_cast<int>(b.layers.size()) != b.level + 1) throw Error(ErrorKind::LengthMismatch, "batch layer count");
    const std::size_t want = kind == RequestKind::Repair ? static_cast<std::size_t>(c.profile().blocks(l))
                                                         : static_cast<std::size_t>(c.profile().A);
    if (b.layers[static_cast<std::size_t>(l)].size() != want) throw Error(ErrorKind::LengthMismatch, "batch layer length");
    out.push_back(&b);
  }
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->helper < b->helper; });
  return out;
}

inline std::vector<int> ids_of(const std::vector<const HelpSymbolBatch*>& v, std::size_t from, std::size_t count) {
  std::vector<int> ids;
  for (std::size_t i = from; i < from + count; ++i) ids.push_back(v[i]->helper);
  return ids;
}

inline std::vector<int> sorted_ids(const std::set<int>& s) { return {s.begin(), s.end()}; }

}  // namespace detail
}  // namespace hrgc
