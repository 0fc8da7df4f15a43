#pragma once

// Command implementations for the hrgc tool. Kept in a header so the test
// suite can drive them in-process.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hrgc/hrgc.hpp"

namespace hrgc::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kAlarmUnresolved = 2, kDecodeFailure = 3, kBadInput = 4, kIo = 5 };

inline std::string category_of(int code) {
  switch (code) {
    case kOk: return "ok";
    case kAlarmUnresolved: return "alarm-unresolved";
    case kDecodeFailure: return "decode-failure";
    case kBadInput: return "bad-input";
    case kIo: return "io";
  }
  return "unknown";
}

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Io: return kIo;
    case ErrorKind::NotEnoughHelpers:
    case ErrorKind::SingularSystem: return kDecodeFailure;
    default: return kBadInput;
  }
}

inline constexpr const char* kProfileFile = "profile.txt";
inline constexpr const char* kManifestFile = "manifest.txt";

struct ClusterDir {
  fs::path dir;
  CodeProfile profile;
  Manifest manifest;
};

inline ClusterDir open_cluster_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
  ClusterDir cd{dir, profile_from_text(read_text_file(dir / kProfileFile)),
                manifest_from_text(read_text_file(dir / kManifestFile))};
  if (cd.manifest.digest != profile_digest(cd.profile))
    throw Error(ErrorKind::BadFormat, "manifest digest does not match profile.txt");
  if (cd.manifest.chunks <= 0) throw Error(ErrorKind::BadFormat, "manifest lists no chunks");
  return cd;
}

// Lists the node files present on disk, in chunk then id order.
inline void rewrite_manifest(const ClusterDir& cd) {
  Manifest m = cd.manifest;
  m.files.clear();
  for (int c = 0; c < m.chunks; ++c)
    for (int id = 0; id < cd.profile.nodes(); ++id) {
      auto name = node_file_name(id, c);
      if (fs::exists(cd.dir / name)) m.files.push_back(name);
    }
  write_text_file(cd.dir / kManifestFile, manifest_to_text(m));
}

inline ordered_json tallies_json(const std::vector<LayerTally>& ts) {
  ordered_json a = ordered_json::array();
  for (const auto& t : ts)
    a.push_back({{"layer", t.layer}, {"erasures", t.erasures}, {"errors", t.errors}, {"newly_flagged", t.newly_flagged}});
  return a;
}

inline ordered_json alarm_json(const std::optional<Alarm>& a) {
  if (!a) return nullptr;
  return {{"layer", a->layer}, {"block", a->block}, {"reason", a->reason}};
}

inline ordered_json phase_bytes_json(const ExchangeLog& log) {
  ordered_json o = ordered_json::object();
  for (OpMode m : {OpMode::Plain, OpMode::Detect, OpMode::Recover}) {
    auto b = log.phase_bytes(m);
    if (b) o[to_string(m)] = b;
  }
  return o;
}

// Final category of one operation over all chunks.
struct StatusAccumulator {
  bool escalated = false;
  bool alarm_unresolved = false;
  bool failed = false;

  void add(Outcome final, bool was_escalated) {
    escalated |= was_escalated;
    if (final == Outcome::DetectionAlarm) alarm_unresolved = true;
    if (final == Outcome::DecodeFailure) failed = true;
  }
  int code() const { return failed ? kDecodeFailure : alarm_unresolved ? kAlarmUnresolved : kOk; }
  std::string status() const {
    if (failed) return "decode-failure";
    if (alarm_unresolved) return "alarm-unresolved";
    return escalated ? "alarm-escalated-success" : "ok";
  }
};

inline std::vector<int> parse_int_list(const std::string& s) {
  auto v = detail::split_ints(s);
  return {v.begin(), v.end()};
}

class App {
 public:
  App(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(std::vector<std::string> args) {
    CLI::App app{"Hermitian-code regenerating storage toolkit", "hrgc"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--json", json_, "print the machine-readable report instead of text");
    app.add_option("--report", report_path_, "also write the JSON report to this file");

    auto* profile = app.add_subcommand("profile", "create a code profile");
    profile->add_option("--q", q_, "field parameter q")->required();
    profile->add_option("--m", m_, "function space bound m")->required();
    profile->add_option("--mode", mode_, "msr or mbr")->default_val("msr");
    profile->add_option("--alphas", alphas_, "comma-separated alpha sequence")->required();
    profile->add_option("--ks", ks_, "comma-separated k sequence (MBR only)");
    profile->add_option("--seed", seed_, "seed for lambda selection")->default_val(1);
    profile->add_option("--out", out_path_, "profile file to write")->required();

    auto* encode = app.add_subcommand("encode", "encode a file into node files");
    encode->add_option("--profile", profile_path_, "profile file")->required();
    encode->add_option("--input", input_path_, "file to store")->required();
    encode->add_option("--outdir", cluster_, "cluster directory to create")->required();

    auto* fail = app.add_subcommand("fail", "mark a node failed by deleting its files");
    fail->add_option("--cluster", cluster_, "cluster directory")->required();
    fail->add_option("--node", node_, "node id")->required();

    auto* repair = app.add_subcommand("repair", "regenerate a failed node");
    repair->add_option("--cluster", cluster_, "cluster directory")->required();
    repair->add_option("--node", node_, "node id")->required();
    add_run_options(repair);

    auto* recon = app.add_subcommand("reconstruct", "recover the stored file");
    recon->add_option("--cluster", cluster_, "cluster directory")->required();
    recon->add_option("--out", out_path_, "where to write the recovered file")->required();
    add_run_options(recon);

    auto* cap = app.add_subcommand("capability", "error-correction capability sweep as CSV");
    cap->add_option("--q-range", q_range_, "from:to:step")->default_val("4:16:2");
    cap->add_option("--out", out_path_, "CSV file (stdout when omitted)");

    auto* verify = app.add_subcommand("verify", "check stored nodes against a re-encoding");
    verify->add_option("--cluster", cluster_, "cluster directory")->required();
    verify->add_option("--seed", seed_, "simulation seed")->default_val(1);

    auto* inspect = app.add_subcommand("inspect", "describe a node file");
    inspect->add_option("--file", input_path_, "node file")->required();
    inspect->add_option("--profile", profile_path_, "validate against this profile");

    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e, out_, err_);
      return rc == 0 ? kOk : kBadInput;
    }

    ordered_json report;
    int code = kOk;
    try {
      if (*profile) code = cmd_profile(report);
      else if (*encode) code = cmd_encode(report);
      else if (*fail) code = cmd_fail(report);
      else if (*repair) code = cmd_repair(report);
      else if (*recon) code = cmd_reconstruct(report);
      else if (*cap) code = cmd_capability(report);
      else if (*verify) code = cmd_verify(report);
      else if (*inspect) code = cmd_inspect(report);
    } catch (const Error& e) {
      code = exit_code_for(e.kind());
      report = {{"command", app.get_subcommands().front()->get_name()},
                {"status", category_of(code)},
                {"error", std::string(to_string(e.kind()))},
                {"message", e.what()}};
    } catch (const fs::filesystem_error& e) {
      code = kIo;
      report = {{"command", app.get_subcommands().front()->get_name()},
                {"status", "io"},
                {"error", "Io"},
                {"message", e.what()}};
    }
    report["exit_code"] = code;
    emit(report);
    return code;
  }

 private:
  void add_run_options(CLI::App* sub) {
    sub->add_option("--mode", op_mode_, "plain, detect or recover")->default_val("plain");
    sub->add_option("--adversary", adversary_, "simulated corrupt responders, e.g. nodes=2,5;strategy=random");
    sub->add_option("--policy", policy_, "escalate or halt on alarm")->default_val("escalate");
    sub->add_option("--seed", seed_, "simulation seed")->default_val(1);
  }

  void emit(const ordered_json& report) {
    if (!report_path_.empty()) write_text_file(report_path_, report.dump(2) + "\n");
    if (json_) {
      out_ << report.dump(2) << "\n";
      return;
    }
    if (report.contains("text")) {
      out_ << report["text"].get<std::string>();
      return;
    }
    out_ << "status: " << report.value("status", "?") << "\n";
    if (report.contains("message")) err_ << report["message"].get<std::string>() << "\n";
  }

  CodeProfile load_profile() const { return profile_from_text(read_text_file(profile_path_)); }

  EscalationPolicy policy() const {
    if (policy_ == "escalate") return EscalationPolicy::Escalate;
    if (policy_ == "halt") return EscalationPolicy::Halt;
    throw Error(ErrorKind::InvalidParams, "policy must be escalate or halt");
  }

  std::optional<AdversarySpec> adversary() const {
    if (adversary_.empty()) return std::nullopt;
    return parse_adversary(adversary_);
  }

  static std::uint64_t chunk_seed(std::uint64_t seed, int chunk) {
    return seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(chunk);
  }

  int cmd_profile(ordered_json& report) {
    std::optional<std::vector<int>> ks;
    if (!ks_.empty()) ks = parse_int_list(ks_);
    CodeProfile p = profile_new(parse_mode(mode_), q_, m_, parse_int_list(alphas_), ks, seed_);
    write_text_file(out_path_, profile_to_text(p));
    DeltaReport d = verify_delta(p);
    ordered_json layers = ordered_json::array();
    for (const auto& l : d.layers)
      layers.push_back({{"layer", l.layer}, {"singular_subsets", l.singular_subsets}, {"subsets_checked", l.subsets_checked}});
    report = {{"command", "profile"},
              {"status", "ok"},
              {"path", out_path_},
              {"digest", hex64(profile_digest(p))},
              {"q", p.q},
              {"mode", to_string(p.mode)},
              {"A", p.A},
              {"B", p.B},
              {"lambda_check",
               {{"distinct", d.criterion_i},
                {"all_minors_independent", d.criterion_ii},
                {"sampled", d.sampled},
                {"protocol_windows_invertible", d.protocol_windows_ok},
                {"detect_subset_violations", d.detect_subset_violations},
                {"layers", layers}}}};
    report["text"] = "wrote " + out_path_ + " (B=" + std::to_string(p.B) + " symbols per chunk, digest " +
                     hex64(profile_digest(p)) + ")\n" + profile_to_text(p);
    return kOk;
  }

  int cmd_encode(ordered_json& report) {
    CodeProfile p = load_profile();
    auto bytes = read_file_bytes(input_path_);
    auto stream = pack_bytes(p.q, bytes);
    auto chunks = chunk_stream(stream, p.B);
    fs::create_directories(cluster_);
    write_text_file(fs::path(cluster_) / kProfileFile, profile_to_text(p));
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      ClusterOptions opt;
      opt.retain_truth = false;
      opt.dir = fs::path(cluster_);
      opt.chunk = static_cast<int>(c);
      Cluster cl(p, chunks[c], opt);
    }
    ClusterDir cd{cluster_, p, Manifest{profile_digest(p), static_cast<int>(chunks.size()), bytes.size(), {}}};
    rewrite_manifest(cd);
    report = {{"command", "encode"},
              {"status", "ok"},
              {"bytes", bytes.size()},
              {"symbols", stream.size()},
              {"chunks", chunks.size()},
              {"nodes", p.nodes()},
              {"node_shape", {p.q, p.A}}};
    report["text"] = "encoded " + std::to_string(bytes.size()) + " bytes into " + std::to_string(chunks.size()) +
                     " chunk(s) of " + std::to_string(p.nodes()) + " nodes under " + cluster_ + "\n";
    return kOk;
  }

  int cmd_fail(ordered_json& report) {
    ClusterDir cd = open_cluster_dir(cluster_);
    if (node_ < 0 || node_ >= cd.profile.nodes()) throw Error(ErrorKind::IndexOutOfRange, "node id");
    int removed = 0;
    for (int c = 0; c < cd.manifest.chunks; ++c) removed += fs::remove(cd.dir / node_file_name(node_, c)) ? 1 : 0;
    if (!removed) throw Error(ErrorKind::InvalidParams, "node " + std::to_string(node_) + " is already failed");
    rewrite_manifest(cd);
    report = {{"command", "fail"}, {"status", "ok"}, {"node", node_}, {"files_removed", removed}};
    report["text"] = "node " + std::to_string(node_) + " failed (" + std::to_string(removed) + " file(s) removed)\n";
    return kOk;
  }

  int cmd_repair(ordered_json& report) {
    ClusterDir cd = open_cluster_dir(cluster_);
    const OpMode mode = parse_op_mode(op_mode_);
    const auto adv = adversary();
    const auto pol = policy();
    if (node_ < 0 || node_ >= cd.profile.nodes()) throw Error(ErrorKind::IndexOutOfRange, "node id");
    StatusAccumulator acc;
    std::set<int> corrupt;
    ordered_json chunks = ordered_json::array();
    std::size_t bytes = 0;
    int repaired = 0;
    for (int c = 0; c < cd.manifest.chunks; ++c) {
      Cluster cl = Cluster::load(cd.profile, cd.dir, c, chunk_seed(seed_, c));
      if (cl.is_live(node_)) continue;
      RepairRun run = cl.repair(node_, mode, adv, pol);
      acc.add(run.report.outcome, run.escalated);
      corrupt.insert(run.report.corrupted_nodes.begin(), run.report.corrupted_nodes.end());
      bytes += run.log.total_bytes();
      if (run.report.outcome == Outcome::Success) ++repaired;
      chunks.push_back({{"chunk", c},
                        {"outcome", to_string(run.report.outcome)},
                        {"final_mode", to_string(run.report.mode)},
                        {"escalated", run.escalated},
                        {"alarm", alarm_json(run.first_report ? run.first_report->alarm : run.report.alarm)},
                        {"corrupted", run.report.corrupted_nodes},
                        {"tallies", tallies_json(run.report.tallies)},
                        {"bytes_by_phase", phase_bytes_json(run.log)},
                        {"detail", run.report.detail}});
    }
    if (chunks.empty()) throw Error(ErrorKind::InvalidParams, "node " + std::to_string(node_) + " is not failed");
    rewrite_manifest(cd);
    report = {{"command", "repair"},
              {"status", acc.status()},
              {"node", node_},
              {"mode", to_string(mode)},
              {"chunks_repaired", repaired},
              {"corrupted", std::vector<int>(corrupt.begin(), corrupt.end())},
              {"bytes_downloaded", bytes},
              {"chunks", chunks}};
    report["text"] = "repair node " + std::to_string(node_) + ": " + acc.status() + ", corrupt " +
                     ordered_json(std::vector<int>(corrupt.begin(), corrupt.end())).dump() + ", " +
                     std::to_string(bytes) + " bytes downloaded\n";
    return acc.code();
  }

  int cmd_reconstruct(ordered_json& report) {
    ClusterDir cd = open_cluster_dir(cluster_);
    const OpMode mode = parse_op_mode(op_mode_);
    const auto adv = adversary();
    const auto pol = policy();
    StatusAccumulator acc;
    std::set<int> corrupt;
    std::vector<Symbol> stream;
    ordered_json chunks = ordered_json::array();
    std::size_t bytes = 0;
    for (int c = 0; c < cd.manifest.chunks; ++c) {
      Cluster cl = Cluster::load(cd.profile, cd.dir, c, chunk_seed(seed_, c));
      ReconstructRun run = cl.reconstruct(mode, adv, pol);
      acc.add(run.report.outcome, run.escalated);
      corrupt.insert(run.report.corrupted_nodes.begin(), run.report.corrupted_nodes.end());
      bytes += run.log.total_bytes();
      if (run.report.message) stream.insert(stream.end(), run.report.message->begin(), run.report.message->end());
      chunks.push_back({{"chunk", c},
                        {"outcome", to_string(run.report.outcome)},
                        {"final_mode", to_string(run.report.mode)},
                        {"escalated", run.escalated},
                        {"alarm", alarm_json(run.first_report ? run.first_report->alarm : run.report.alarm)},
                        {"corrupted", run.report.corrupted_nodes},
                        {"tallies", tallies_json(run.report.tallies)},
                        {"bytes_by_phase", phase_bytes_json(run.log)},
                        {"detail", run.report.detail}});
    }
    std::size_t written = 0;
    if (acc.code() == kOk) {
      auto data = unpack_bytes(cd.profile.q, stream);
      if (data.size() != cd.manifest.length) throw Error(ErrorKind::BadFormat, "recovered length differs from the manifest");
      write_file_bytes(out_path_, data);
      written = data.size();
    }
    report = {{"command", "reconstruct"},
              {"status", acc.status()},
              {"mode", to_string(mode)},
              {"bytes_written", written},
              {"corrupted", std::vector<int>(corrupt.begin(), corrupt.end())},
              {"bytes_downloaded", bytes},
              {"chunks", chunks}};
    report["text"] = "reconstruct: " + acc.status() + ", " + std::to_string(written) + " bytes written, corrupt " +
                     ordered_json(std::vector<int>(corrupt.begin(), corrupt.end())).dump() + "\n";
    return acc.code();
  }

  int cmd_capability(ordered_json& report) {
    auto parts = std::vector<int>{};
    {
      std::string s = q_range_;
      std::replace(s.begin(), s.end(), ':', ',');
      parts = parse_int_list(s);
    }
    if (parts.size() != 3) throw Error(ErrorKind::InvalidParams, "--q-range must be from:to:step");
    auto rows = capability::capability_sweep(parts[0], parts[1], parts[2]);
    const std::string csv = capability::sweep_csv(rows);
    ordered_json jr = ordered_json::array();
    for (const auto& r : rows)
      jr.push_back({{"q", r.q}, {"m", r.m}, {"alphas", r.alpha}, {"ds", r.d}, {"tau_hmsr", r.tau_h}, {"tau_rsmsr", r.tau_rs}});
    report = {{"command", "capability"}, {"status", "ok"}, {"rule", capability::kSweepRule}, {"rows", jr}};
    if (!out_path_.empty()) {
      write_text_file(out_path_, csv);
      report["path"] = out_path_;
      report["text"] = "wrote " + std::to_string(rows.size()) + " rows to " + out_path_ + "\nrule: " + capability::kSweepRule + "\n";
    } else {
      report["text"] = csv;
      err_ << "rule: " << capability::kSweepRule << "\n";
    }
    return kOk;
  }

  int cmd_verify(ordered_json& report) {
    ClusterDir cd = open_cluster_dir(cluster_);
    Code code(cd.profile);
    bool decode_failed = false;
    std::set<int> mismatched, missing;
    ordered_json chunks = ordered_json::array();
    for (int c = 0; c < cd.manifest.chunks; ++c) {
      Cluster cl = Cluster::load(cd.profile, cd.dir, c, chunk_seed(seed_, c));
      for (int id = 0; id < cd.profile.nodes(); ++id)
        if (!cl.is_live(id)) missing.insert(id);
      ReconstructRun run = cl.reconstruct(OpMode::Recover, std::nullopt, EscalationPolicy::Halt);
      ordered_json cj = {{"chunk", c}, {"outcome", to_string(run.report.outcome)}};
      if (run.report.outcome != Outcome::Success) {
        decode_failed = true;
        cj["detail"] = run.report.detail;
        chunks.push_back(cj);
        continue;
      }
      auto expected = encode_message(code, *run.report.message);
      std::vector<int> bad;
      for (int id : cl.live_ids())
        if (cl.node(id).y != expected[static_cast<std::size_t>(id)].y) bad.push_back(id);
      mismatched.insert(bad.begin(), bad.end());
      cj["mismatched"] = bad;
      chunks.push_back(cj);
    }
    const int code_rc = decode_failed ? kDecodeFailure : mismatched.empty() ? kOk : kAlarmUnresolved;
    const std::string status = decode_failed ? "decode-failure" : mismatched.empty() ? "ok" : "inconsistent";
    report = {{"command", "verify"},
              {"status", status},
              {"mismatched", std::vector<int>(mismatched.begin(), mismatched.end())},
              {"failed_nodes", std::vector<int>(missing.begin(), missing.end())},
              {"chunks", chunks}};
    report["text"] = "verify: " + status + ", mismatched " +
                     ordered_json(std::vector<int>(mismatched.begin(), mismatched.end())).dump() + ", failed " +
                     ordered_json(std::vector<int>(missing.begin(), missing.end())).dump() + "\n";
    return code_rc;
  }

  int cmd_inspect(ordered_json& report) {
    auto bytes = read_file_bytes(input_path_);
    NodeFile nf = parse_node_file(bytes);
    const auto& h = nf.header;
    report = {{"command", "inspect"},
              {"status", "ok"},
              {"mode", to_string(h.mode)},
              {"q", h.q},
              {"id", h.id},
              {"m", h.m},
              {"alpha", h.alpha},
              {"k", h.k},
              {"digest", hex64(h.digest)},
              {"payload_bytes", nf.payload.size()}};
    if (!profile_path_.empty()) {
      parse_node(load_profile(), bytes);
      report["matches_profile"] = true;
    }
    report["text"] = "node " + std::to_string(h.id) + " mode=" + to_string(h.mode) + " q=" + std::to_string(h.q) +
                     " m=" + std::to_string(h.m) + " digest=" + hex64(h.digest) + " payload=" +
                     std::to_string(nf.payload.size()) + " bytes\n";
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  bool json_ = false;
  std::string report_path_;
  int q_ = 0, m_ = 0, node_ = -1;
  std::string mode_, alphas_, ks_, out_path_, profile_path_, input_path_, cluster_, op_mode_, adversary_, policy_,
      q_range_;
  std::uint64_t seed_ = 1;
};

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  App app(out, err);
  return app.run(args);
}

}  // namespace hrgc::cli
