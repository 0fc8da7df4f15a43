// Walks one q=3 MSR cluster through failure, attacked repair and attacked
// reconstruction, printing what each step observed.

#include <iostream>

#include "hrgc/hrgc.hpp"

using namespace hrgc;

int main() {
  CodeProfile p = profile_new(Mode::Msr, 3, 8, {3, 2, 1}, std::nullopt, 1);
  std::cout << "profile: q=" << p.q << " nodes=" << p.nodes() << " A=" << p.A << " B=" << p.B << "\n";

  const std::string text = "regenerating codes keep data alive";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  auto stream = pack_bytes(p.q, bytes);
  auto chunks = chunk_stream(stream, p.B);
  std::cout << "file of " << bytes.size() << " bytes -> " << chunks.size() << " chunk(s)\n";

  std::vector<Symbol> recovered;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    ClusterOptions opt;
    opt.seed = 7 + c;
    Cluster cluster(p, chunks[c], opt);

    cluster.fail_node(4);
    AdversarySpec adv;
    adv.corrupt = {1};
    adv.seed = 11;
    RepairRun rep = cluster.repair(4, OpMode::Detect, adv);
    std::cout << "chunk " << c << " repair: " << to_string(rep.report.outcome) << (rep.escalated ? " after alarm" : "")
              << ", flagged";
    for (int id : rep.report.corrupted_nodes) std::cout << ' ' << id;
    std::cout << ", exact=" << (rep.matches_truth.value_or(false) ? "yes" : "no") << ", "
              << rep.log.total_bytes() << " symbols downloaded\n";

    adv.corrupt = {2};
    ReconstructRun rec = cluster.reconstruct(OpMode::Recover, adv);
    std::cout << "chunk " << c << " reconstruct: " << to_string(rec.report.outcome) << ", flagged";
    for (int id : rec.report.corrupted_nodes) std::cout << ' ' << id;
    std::cout << "\n";
    if (rec.report.message) recovered.insert(recovered.end(), rec.report.message->begin(), rec.report.message->end());
  }
  auto out = unpack_bytes(p.q, recovered);
  std::cout << "recovered text: " << std::string(out.begin(), out.end()) << "\n";
  return out == bytes ? 0 : 1;
}
