#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hrgc/hmbr.hpp"
#include "hrgc/hmsr.hpp"
#include "hrgc/node_file.hpp"
#include "hrgc/rng.hpp"

namespace hrgc {

// ---------------------------------------------------------------------------
// Mode-independent entry points over the MSR and MBR engines

inline std::vector<NodeState> encode_message(const Code& c, const std::vector<Symbol>& message) {
  if (c.mode() == Mode::Msr) return msr::encode(c, msr::arrange_st(c.profile(), message));
  return mbr::encode_mbr(c, mbr::arrange_m(c.profile(), message));
}

inline RepairReport run_repair(const Code& c, int z, const std::vector<HelpSymbolBatch>& batches, OpMode mode) {
  const bool m = c.mode() == Mode::Msr;
  switch (mode) {
    case OpMode::Plain: return m ? msr::regenerate_plain(c, z, batches) : mbr::regenerate_mbr_plain(c, z, batches);
    case OpMode::Detect: return m ? msr::regenerate_detect(c, z, batches) : mbr::regenerate_mbr_detect(c, z, batches);
    case OpMode::Recover: return m ? msr::regenerate_recover(c, z, batches) : mbr::regenerate_mbr_recover(c, z, batches);
  }
  throw Error(ErrorKind::InvalidParams, "unknown mode");
}

inline ReconstructReport run_reconstruct(const Code& c, const std::vector<HelpSymbolBatch>& batches, OpMode mode) {
  const bool m = c.mode() == Mode::Msr;
  switch (mode) {
    case OpMode::Plain: return m ? msr::reconstruct_plain(c, batches) : mbr::reconstruct_mbr_plain(c, batches);
    case OpMode::Detect: return m ? msr::reconstruct_detect(c, batches) : mbr::reconstruct_mbr_detect(c, batches);
    case OpMode::Recover: return m ? msr::reconstruct_recover(c, batches) : mbr::reconstruct_mbr_recover(c, batches);
  }
  throw Error(ErrorKind::InvalidParams, "unknown mode");
}

// ---------------------------------------------------------------------------
// Adversaries

enum class Strategy { RandomSymbol, ConstantOffset, TargetedLayer, CollusiveRandom };
enum class Knowledge { OwnRowsOnly, Omniscient };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::RandomSymbol: return "random";
    case Strategy::ConstantOffset: return "offset";
    case Strategy::TargetedLayer: return "targeted";
    case Strategy::CollusiveRandom: return "collusive";
  }
  return "?";
}

inline std::string to_string(Knowledge k) { return k == Knowledge::Omniscient ? "omniscient" : "own"; }

// Corrupt nodes perturb what they send, never what they store. Each (layer,
// block) of an outgoing response is perturbed with probability `activation`,
// restricted to `schedule` layers when that set is non-empty.
struct AdversarySpec {
  std::set<int> corrupt;
  Strategy strategy = Strategy::RandomSymbol;
  Knowledge knowledge = Knowledge::OwnRowsOnly;
  int layer = 0;       // TargetedLayer only
  Symbol offset = 1;   // ConstantOffset only
  double activation = 1.0;
  std::set<int> schedule;
  std::uint64_t seed = 0;

  bool active_in(int l) const {
    if (strategy == Strategy::TargetedLayer && l != layer) return false;
    return schedule.empty() || schedule.count(l) > 0;
  }
};

namespace detail {
inline std::set<int> parse_id_set(const std::string& s) {
  std::set<int> out;
  std::vector<long long> ids;
  try {
    ids = split_ints(s);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidParams, std::string("bad node list in adversary spec: ") + e.what());
  }
  for (long long v : ids) {
    if (v < 0 || v > 0xffff) throw Error(ErrorKind::InvalidParams, "node id out of range in adversary spec");
    out.insert(static_cast<int>(v));
  }
  return out;
}
}  // namespace detail

// "nodes=2,5;strategy=random;knowledge=own;layer=3;offset=1;prob=0.5;layers=2,3;seed=7"
// Only `nodes` is required.
inline AdversarySpec parse_adversary(const std::string& text) {
  AdversarySpec a;
  bool have_nodes = false;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ';')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::InvalidParams, "adversary item without '=': " + item);
      const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
      if (key == "nodes") {
        a.corrupt = detail::parse_id_set(val);
        have_nodes = true;
      } else if (key == "strategy") {
        if (val == "random") a.strategy = Strategy::RandomSymbol;
        else if (val == "offset") a.strategy = Strategy::ConstantOffset;
        else if (val == "targeted") a.strategy = Strategy::TargetedLayer;
        else if (val == "collusive") a.strategy = Strategy::CollusiveRandom;
        else throw Error(ErrorKind::InvalidParams, "unknown strategy " + val);
      } else if (key == "knowledge") {
        if (val == "own") a.knowledge = Knowledge::OwnRowsOnly;
        else if (val == "omniscient") a.knowledge = Knowledge::Omniscient;
        else throw Error(ErrorKind::InvalidParams, "unknown knowledge " + val);
      } else if (key == "layer") {
        a.layer = std::stoi(val);
      } else if (key == "offset") {
        const int v = std::stoi(val);
        if (v <= 0 || v > 255) throw Error(ErrorKind::InvalidParams, "offset must be a nonzero symbol");
        a.offset = static_cast<Symbol>(v);
      } else if (key == "prob") {
        a.activation = std::stod(val);
        if (!(a.activation >= 0.0 && a.activation <= 1.0))
          throw Error(ErrorKind::InvalidParams, "prob must lie in [0, 1]");
      } else if (key == "layers") {
        a.schedule = detail::parse_id_set(val);
      } else if (key == "seed") {
        a.seed = std::stoull(val);
      } else {
        throw Error(ErrorKind::InvalidParams, "unknown adversary key " + key);
      }
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidParams, "malformed adversary value in '" + item + "'");
  }
  if (!have_nodes) throw Error(ErrorKind::InvalidParams, "adversary spec needs nodes=...");
  return a;
}

inline void validate_adversary(const CodeProfile& p, const AdversarySpec& a) {
  for (int id : a.corrupt)
    if (id >= p.nodes()) throw Error(ErrorKind::InvalidParams, "corrupt id " + std::to_string(id) + " is not a node");
  if (a.strategy == Strategy::TargetedLayer && (a.layer < 0 || a.layer >= p.q))
    throw Error(ErrorKind::InvalidParams, "targeted layer out of range");
  if (a.strategy == Strategy::ConstantOffset && a.offset >= p.nodes())
    throw Error(ErrorKind::InvalidParams, "offset is not a field symbol");
}

namespace detail {

inline Symbol nonzero_symbol(const Field& f, Rng& rng) { return static_cast<Symbol>(1 + rng.below(f.order() - 1)); }

inline std::vector<Symbol> nonzero_vector(const Field& f, std::size_t n, Rng& rng) {
  std::vector<Symbol> v(n);
  do {
    for (auto& s : v) s = static_cast<Symbol>(rng.below(f.order()));
  } while (std::all_of(v.begin(), v.end(), [](Symbol s) { return s == 0; }));
  return v;
}

// A uniformly random vector x != 0 with h x = 0, or nullopt if only x = 0.
inline std::optional<std::vector<Symbol>> random_kernel_vector(const Field& f, Matrix h, std::size_t cols, Rng& rng) {
  std::vector<std::size_t> pivots;
  if (h.rows() > 0) pivots = linalg::rref(f, h, cols);
  std::vector<std::size_t> free;
  for (std::size_t c = 0, pi = 0; c < cols; ++c) {
    if (pi < pivots.size() && pivots[pi] == c) {
      ++pi;
      continue;
    }
    free.push_back(c);
  }
  if (free.empty()) return std::nullopt;
  std::vector<Symbol> x(cols, 0);
  do {
    for (std::size_t c : free) x[c] = static_cast<Symbol>(rng.below(f.order()));
  } while (std::all_of(free.begin(), free.end(), [&](std::size_t c) { return x[c] == 0; }));
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    Symbol v = 0;
    for (std::size_t c : free) f.axpy(v, h(r, c), x[c]);
    x[pivots[r]] = f.neg(v);
  }
  return x;
}

// Omniscient collusion on repair: the corrupt helpers of a layer shift the
// solved vector by delta, with delta chosen so that every honest helper's
// row already agrees with the shift. Both overlapping solves then see the
// same wrong vector. Falls back to independent random errors when the honest
// rows admit no such delta.
inline void collude_repair_block(const Code& c, const AdversarySpec& a, std::vector<HelpSymbolBatch*>& contributors,
                                 int l, int t, Rng& rng) {
  const Field& f = c.field();
  const Matrix& gen = c.repair_generator(l);
  std::vector<int> honest;
  for (auto* b : contributors)
    if (!a.corrupt.count(b->helper)) honest.push_back(b->helper);
  auto delta = random_kernel_vector(f, linalg::select_rows(gen, honest), gen.cols(), rng);
  for (auto* b : contributors) {
    if (!a.corrupt.count(b->helper)) continue;
    auto& s = b->layers[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
    if (delta) {
      s = f.add(s, linalg::dot(f, gen.row(static_cast<std::size_t>(b->helper)), *delta));
    } else {
      s = f.add(s, nonzero_symbol(f, rng));
    }
  }
}

}  // namespace detail

// Perturbs the outgoing responses of corrupt helpers in place.
inline void apply_adversary(const Code& c, const AdversarySpec& a, std::vector<HelpSymbolBatch>& batches, Rng& rng) {
  const auto& p = c.profile();
  const Field& f = c.field();
  validate_adversary(p, a);
  std::vector<HelpSymbolBatch*> corrupt;
  for (auto& b : batches)
    if (a.corrupt.count(b.helper)) corrupt.push_back(&b);
  if (corrupt.empty()) return;
  const bool repair = batches.front().kind == RequestKind::Repair;
  const bool collusive = a.strategy == Strategy::CollusiveRandom;

  for (int l = 0; l < p.q; ++l) {
    if (!a.active_in(l)) continue;
    std::vector<HelpSymbolBatch*> layer_corrupt, contributors;
    for (auto* b : corrupt)
      if (b->level >= l) layer_corrupt.push_back(b);
    if (layer_corrupt.empty()) continue;
    for (auto& b : batches)
      if (b.level >= l) contributors.push_back(&b);
    const int a_l = p.alpha_at(l);
    for (int t = 0; t < p.blocks(l); ++t) {
      // Colluders share one activation draw per block.
      const bool shared = collusive ? rng.chance(a.activation) : true;
      if (repair && collusive && a.knowledge == Knowledge::Omniscient) {
        if (shared) detail::collude_repair_block(c, a, contributors, l, t, rng);
        continue;
      }
      for (auto* b : layer_corrupt) {
        if (!(collusive ? shared : rng.chance(a.activation))) continue;
        auto& row = b->layers[static_cast<std::size_t>(l)];
        if (repair) {
          auto& s = row[static_cast<std::size_t>(t)];
          s = f.add(s, a.strategy == Strategy::ConstantOffset ? a.offset : detail::nonzero_symbol(f, rng));
        } else {
          const auto from = static_cast<std::size_t>(t * a_l);
          if (a.strategy == Strategy::ConstantOffset) {
            for (int i = 0; i < a_l; ++i) row[from + static_cast<std::size_t>(i)] = f.add(row[from + static_cast<std::size_t>(i)], a.offset);
          } else {
            auto e = detail::nonzero_vector(f, static_cast<std::size_t>(a_l), rng);
            for (int i = 0; i < a_l; ++i) row[from + static_cast<std::size_t>(i)] = f.add(row[from + static_cast<std::size_t>(i)], e[static_cast<std::size_t>(i)]);
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Exchange log and bandwidth audit

// One response on the simulated wire. Symbols travel one per byte, so the
// byte count equals the symbol count.
struct ExchangeRecord {
  std::size_t seq = 0;
  int requester = -1;  // -1 is the data collector
  int responder = 0;
  int level = 0;
  RequestKind kind = RequestKind::Repair;
  OpMode phase = OpMode::Plain;
  std::vector<std::size_t> layer_symbols;
  std::size_t bytes = 0;
};

struct ExchangeLog {
  std::vector<ExchangeRecord> records;

  std::size_t total_bytes() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.bytes;
    return n;
  }

  std::size_t phase_bytes(OpMode phase) const {
    std::size_t n = 0;
    for (const auto& r : records)
      if (r.phase == phase) n += r.bytes;
    return n;
  }
};

struct LayerAudit {
  int layer = 0;
  std::size_t expected = 0;
  std::size_t actual = 0;
};

struct BandwidthAudit {
  OpMode phase = OpMode::Plain;
  RequestKind kind = RequestKind::Repair;
  std::vector<LayerAudit> layers;
  std::size_t expected_total = 0;
  std::size_t actual_total = 0;
  bool ok = true;
  std::vector<std::string> mismatches;
};

// Symbols a layer must cost in plain or detect mode: one help symbol per block
// (repair) or one full row (reconstruct) from each contributor the staged plan
// assigns to that layer. In recover mode every responder contributes.
inline std::size_t expected_layer_symbols(const CodeProfile& p, RequestKind kind, OpMode phase, int l,
                                          std::size_t responders) {
  const std::size_t per = kind == RequestKind::Repair ? static_cast<std::size_t>(p.blocks(l)) : static_cast<std::size_t>(p.A);
  if (phase == OpMode::Recover) return responders * per;
  auto need = contributors_needed(p, kind, phase);
  int count = 0;
  for (int j = l; j < p.q; ++j) count = std::max(count, need[static_cast<std::size_t>(j)]);
  return static_cast<std::size_t>(count) * per;
}

inline BandwidthAudit bandwidth_audit(const ExchangeLog& log, const CodeProfile& p, OpMode phase) {
  BandwidthAudit audit;
  audit.phase = phase;
  std::vector<const ExchangeRecord*> recs;
  for (const auto& r : log.records)
    if (r.phase == phase) recs.push_back(&r);
  if (recs.empty()) {
    audit.ok = false;
    audit.mismatches.push_back("no exchanges recorded for phase " + to_string(phase));
    return audit;
  }
  audit.kind = recs.front()->kind;
  for (int l = 0; l < p.q; ++l) {
    LayerAudit la{l, expected_layer_symbols(p, audit.kind, phase, l, recs.size()), 0};
    for (const auto* r : recs)
      if (static_cast<std::size_t>(l) < r->layer_symbols.size()) la.actual += r->layer_symbols[static_cast<std::size_t>(l)];
    if (la.actual != la.expected) {
      audit.ok = false;
      audit.mismatches.push_back("layer " + std::to_string(l) + ": " + std::to_string(la.actual) + " symbols, expected " +
                                 std::to_string(la.expected));
    }
    audit.expected_total += la.expected;
    audit.actual_total += la.actual;
    audit.layers.push_back(la);
  }
  std::size_t bytes = 0;
  for (const auto* r : recs) {
    bytes += r->bytes;
    if (r->kind != audit.kind) {
      audit.ok = false;
      audit.mismatches.push_back("phase mixes repair and reconstruct exchanges");
    }
  }
  if (bytes != audit.actual_total) {
    audit.ok = false;
    audit.mismatches.push_back("byte count differs from the per-layer symbol count");
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Cluster

enum class EscalationPolicy { Escalate, Halt };

struct ClusterOptions {
  bool retain_truth = true;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> dir;  // node files are written here when set
  int chunk = 0;
};

struct RepairRun {
  RepairReport report;                       // the final phase
  std::optional<RepairReport> first_report;  // the alarm that triggered escalation
  bool escalated = false;
  ExchangeLog log;
  std::optional<bool> matches_truth;
};

struct ReconstructRun {
  ReconstructReport report;
  std::optional<ReconstructReport> first_report;
  bool escalated = false;
  ExchangeLog log;
  std::optional<bool> matches_truth;
};

class Cluster {
 public:
  // Encodes `message` (exactly B symbols) and stores one node per id.
  Cluster(CodeProfile profile, const std::vector<Symbol>& message, ClusterOptions opt = {})
      : code_(std::move(profile)), opt_(std::move(opt)), rng_(opt_.seed) {
    auto nodes = encode_message(code_, message);
    for (auto& n : nodes) slots_.emplace_back(n);
    if (opt_.retain_truth) {
      truth_ = nodes;
      message_ = message;
    }
    for (const auto& n : nodes) persist(n);
  }

  // Loads whatever node files exist for `chunk` in `dir`; missing files are
  // failed nodes. No ground truth is available.
  static Cluster load(const CodeProfile& profile, const std::filesystem::path& dir, int chunk, std::uint64_t seed = 0) {
    ClusterOptions opt;
    opt.retain_truth = false;
    opt.seed = seed;
    opt.dir = dir;
    opt.chunk = chunk;
    Cluster c(profile, opt);
    for (int id = 0; id < profile.nodes(); ++id) {
      auto path = dir / node_file_name(id, chunk);
      if (!std::filesystem::exists(path)) continue;
      NodeState n = parse_node(c.code_.profile(), read_file_bytes(path));
      if (n.id != id) throw Error(ErrorKind::BadFormat, path.string() + " holds node " + std::to_string(n.id));
      c.slots_[static_cast<std::size_t>(id)] = std::move(n);
    }
    return c;
  }

  const Code& code() const { return code_; }
  const CodeProfile& profile() const { return code_.profile(); }
  const ClusterOptions& options() const { return opt_; }

  bool is_live(int id) const { return slots_.at(static_cast<std::size_t>(id)).has_value(); }

  std::vector<int> live_ids() const {
    std::vector<int> ids;
    for (int i = 0; i < code_.nodes(); ++i)
      if (is_live(i)) ids.push_back(i);
    return ids;
  }

  const NodeState& node(int id) const {
    check_id(id);
    if (!is_live(id)) throw Error(ErrorKind::InvalidParams, "node " + std::to_string(id) + " is failed");
    return *slots_[static_cast<std::size_t>(id)];
  }

  bool has_truth() const { return truth_.has_value(); }
  const std::vector<NodeState>& truth() const {
    if (!truth_) throw Error(ErrorKind::InvalidParams, "ground truth was not retained");
    return *truth_;
  }
  const std::vector<Symbol>& message() const {
    if (!message_) throw Error(ErrorKind::InvalidParams, "ground truth was not retained");
    return *message_;
  }

  void fail_node(int z) {
    check_id(z);
    if (!is_live(z)) throw Error(ErrorKind::InvalidParams, "node " + std::to_string(z) + " is already failed");
    slots_[static_cast<std::size_t>(z)].reset();
    if (opt_.dir) std::filesystem::remove(*opt_.dir / node_file_name(z, opt_.chunk));
  }

  RepairRun repair(int z, OpMode mode, const std::optional<AdversarySpec>& adversary = std::nullopt,
                   EscalationPolicy policy = EscalationPolicy::Escalate) {
    check_id(z);
    if (is_live(z)) throw Error(ErrorKind::InvalidParams, "node " + std::to_string(z) + " is not failed");
    if (adversary) validate_adversary(profile(), *adversary);
    RepairRun run;
    Rng adv_rng(adversary ? adversary->seed ^ rng_.next() : rng_.next());
    run.report = repair_phase(z, mode, adversary, adv_rng, run.log);
    if (run.report.outcome == Outcome::DetectionAlarm && policy == EscalationPolicy::Escalate) {
      run.first_report = std::move(run.report);
      run.escalated = true;
      run.report = repair_phase(z, OpMode::Recover, adversary, adv_rng, run.log);
    }
    if (run.report.outcome == Outcome::Success) {
      NodeState n{z, *run.report.regenerated, code_.digest()};
      if (truth_) run.matches_truth = n.y == (*truth_)[static_cast<std::size_t>(z)].y;
      persist(n);
      slots_[static_cast<std::size_t>(z)] = std::move(n);
    }
    return run;
  }

  ReconstructRun reconstruct(OpMode mode, const std::optional<AdversarySpec>& adversary = std::nullopt,
                             EscalationPolicy policy = EscalationPolicy::Escalate) {
    if (adversary) validate_adversary(profile(), *adversary);
    ReconstructRun run;
    Rng adv_rng(adversary ? adversary->seed ^ rng_.next() : rng_.next());
    run.report = reconstruct_phase(mode, adversary, adv_rng, run.log);
    if (run.report.outcome == Outcome::DetectionAlarm && policy == EscalationPolicy::Escalate) {
      run.first_report = std::move(run.report);
      run.escalated = true;
      run.report = reconstruct_phase(OpMode::Recover, adversary, adv_rng, run.log);
    }
    if (run.report.outcome == Outcome::Success && message_) run.matches_truth = *run.report.message == *message_;
    return run;
  }

  // Rewrites every live node file.
  void save() const {
    for (const auto& s : slots_)
      if (s) persist(*s);
  }

 private:
  Cluster(const CodeProfile& profile, ClusterOptions opt)
      : code_(profile), opt_(std::move(opt)), rng_(opt_.seed), slots_(static_cast<std::size_t>(profile.nodes())) {}

  void check_id(int id) const {
    if (id < 0 || id >= code_.nodes()) throw Error(ErrorKind::IndexOutOfRange, "node id " + std::to_string(id));
  }

  void persist(const NodeState& n) const {
    if (!opt_.dir) return;
    std::filesystem::create_directories(*opt_.dir);
    write_file_bytes(*opt_.dir / node_file_name(n.id, opt_.chunk), serialize_node(profile(), n));
  }

  void log_batches(ExchangeLog& log, int requester, OpMode phase, const std::vector<HelpSymbolBatch>& batches) {
    for (const auto& b : batches) {
      ExchangeRecord r;
      r.seq = seq_++;
      r.requester = requester;
      r.responder = b.helper;
      r.level = b.level;
      r.kind = b.kind;
      r.phase = phase;
      for (const auto& l : b.layers) r.layer_symbols.push_back(l.size());
      r.bytes = b.symbol_count();
      log.records.push_back(std::move(r));
    }
  }

  RepairReport repair_phase(int z, OpMode mode, const std::optional<AdversarySpec>& adversary, Rng& adv_rng,
                            ExchangeLog& log) {
    auto plan = staged_request_plan(profile(), RequestKind::Repair, mode, live_ids());
    std::vector<HelpSymbolBatch> batches;
    for (const auto& e : plan) batches.push_back(helper_response(code_, node(e.helper), e.level, z));
    if (adversary) apply_adversary(code_, *adversary, batches, adv_rng);
    log_batches(log, z, mode, batches);
    return run_repair(code_, z, batches, mode);
  }

  ReconstructReport reconstruct_phase(OpMode mode, const std::optional<AdversarySpec>& adversary, Rng& adv_rng,
                                      ExchangeLog& log) {
    auto plan = staged_request_plan(profile(), RequestKind::Reconstruct, mode, live_ids());
    std::vector<HelpSymbolBatch> batches;
    for (const auto& e : plan) batches.push_back(reconstruct_response(code_, node(e.helper), e.level));
    if (adversary) apply_adversary(code_, *adversary, batches, adv_rng);
    log_batches(log, -1, mode, batches);
    return run_reconstruct(code_, batches, mode);
  }

  Code code_;
  ClusterOptions opt_;
  Rng rng_;
  std::vector<std::optional<NodeState>> slots_;
  std::optional<std::vector<NodeState>> truth_;
  std::optional<std::vector<Symbol>> message_;
  std::size_t seq_ = 0;
};

}  // namespace hrgc
