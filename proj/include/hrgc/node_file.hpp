#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "hrgc/engine.hpp"
#include "hrgc/error.hpp"
#include "hrgc/profile.hpp"

namespace hrgc {

// ---------------------------------------------------------------------------
// Byte <-> symbol packing
//
// Each byte becomes w base-q^2 digits, most significant first, where w is the
// smallest width with (q^2)^w >= 256. For q=4 that is two nibbles, high first;
// for q=16 it is the byte itself. The stream starts with the byte length as
// 8 bytes little-endian, packed the same way.

inline int digits_per_byte(int q) {
  if (!is_supported_q(q)) throw Error(ErrorKind::UnsupportedQ, "q=" + std::to_string(q) + " is not supported");
  const int base = q * q;
  int w = 1;
  for (long long cap = base; cap < 256; cap *= base) ++w;
  return w;
}

inline std::vector<Symbol> pack_bytes(int q, std::span<const std::uint8_t> data) {
  const int base = q * q;
  const int w = digits_per_byte(q);
  std::vector<std::uint8_t> framed;
  framed.reserve(data.size() + 8);
  const std::uint64_t len = data.size();
  for (int i = 0; i < 8; ++i) framed.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  framed.insert(framed.end(), data.begin(), data.end());

  std::vector<Symbol> out;
  out.reserve(framed.size() * static_cast<std::size_t>(w));
  std::vector<Symbol> digits(static_cast<std::size_t>(w));
  for (std::uint8_t byte : framed) {
    int v = byte;
    for (int i = w - 1; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = static_cast<Symbol>(v % base);
      v /= base;
    }
    out.insert(out.end(), digits.begin(), digits.end());
  }
  return out;
}

inline std::vector<std::uint8_t> unpack_bytes(int q, std::span<const Symbol> stream) {
  const int base = q * q;
  const auto w = static_cast<std::size_t>(digits_per_byte(q));
  auto byte_at = [&](std::size_t idx) {
    int v = 0;
    for (std::size_t i = 0; i < w; ++i) {
      const Symbol s = stream[idx * w + i];
      if (s >= base) throw Error(ErrorKind::BadFormat, "symbol outside the field");
      v = v * base + s;
    }
    if (v > 255) throw Error(ErrorKind::BadFormat, "packed value exceeds one byte");
    return static_cast<std::uint8_t>(v);
  };
  const std::size_t total = stream.size() / w;
  if (total < 8) throw Error(ErrorKind::BadFormat, "stream shorter than its length prefix");
  std::uint64_t len = 0;
  for (std::size_t i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(byte_at(i)) << (8 * i);
  if (len > total - 8) throw Error(ErrorKind::BadFormat, "length prefix exceeds the stream");
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(len));
  for (std::size_t i = 0; i < len; ++i) out.push_back(byte_at(8 + i));
  return out;
}

// Splits a symbol stream into B-symbol messages, zero padding the last one.
inline std::vector<std::vector<Symbol>> chunk_stream(const std::vector<Symbol>& stream, long long b) {
  if (b <= 0) throw Error(ErrorKind::InvalidParams, "chunk size must be positive");
  std::vector<std::vector<Symbol>> chunks;
  const auto bs = static_cast<std::size_t>(b);
  for (std::size_t pos = 0; pos < stream.size(); pos += bs) {
    std::vector<Symbol> c(bs, 0);
    const std::size_t n = std::min(bs, stream.size() - pos);
    std::copy_n(stream.begin() + static_cast<std::ptrdiff_t>(pos), n, c.begin());
    chunks.push_back(std::move(c));
  }
  if (chunks.empty()) chunks.emplace_back(bs, 0);
  return chunks;
}

// ---------------------------------------------------------------------------
// Node state file
//
//   "HRGC" | 0x01 | mode | q u16 | id u16 | m u32 | alpha[q] | k[q] | digest u64 | q*A payload
// Integers are little-endian; the payload holds one symbol per byte, row-major.

inline constexpr std::uint8_t kNodeFileVersion = 0x01;

struct NodeFileHeader {
  Mode mode = Mode::Msr;
  int q = 0;
  int id = 0;
  std::uint32_t m = 0;
  std::vector<int> alpha;
  std::vector<int> k;
  std::uint64_t digest = 0;

  bool operator==(const NodeFileHeader&) const = default;
};

struct NodeFile {
  NodeFileHeader header;
  std::vector<std::uint8_t> payload;
};

namespace detail {
inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t& pos, int bytes) {
  if (pos + static_cast<std::size_t>(bytes) > in.size()) throw Error(ErrorKind::BadFormat, "node file is truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[pos++]) << (8 * i);
  return v;
}
}  // namespace detail

inline std::vector<std::uint8_t> serialize_node(const CodeProfile& p, const NodeState& node) {
  if (node.y.rows() != static_cast<std::size_t>(p.q) || node.y.cols() != static_cast<std::size_t>(p.A))
    throw Error(ErrorKind::LengthMismatch, "node matrix does not match the profile");
  std::vector<std::uint8_t> out{'H', 'R', 'G', 'C', kNodeFileVersion, static_cast<std::uint8_t>(p.mode)};
  detail::put_le(out, static_cast<std::uint64_t>(p.q), 2);
  detail::put_le(out, static_cast<std::uint64_t>(node.id), 2);
  detail::put_le(out, static_cast<std::uint64_t>(p.m), 4);
  for (int a : p.alpha) out.push_back(static_cast<std::uint8_t>(a));
  for (int k : p.k) out.push_back(static_cast<std::uint8_t>(k));
  detail::put_le(out, profile_digest(p), 8);
  out.insert(out.end(), node.y.data().begin(), node.y.data().end());
  return out;
}

// Parses the container without reference to a profile.
inline NodeFile parse_node_file(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6 || bytes[0] != 'H' || bytes[1] != 'R' || bytes[2] != 'G' || bytes[3] != 'C')
    throw Error(ErrorKind::BadFormat, "missing HRGC magic");
  if (bytes[4] != kNodeFileVersion) throw Error(ErrorKind::BadFormat, "unknown node file version");
  if (bytes[5] > 1) throw Error(ErrorKind::BadFormat, "unknown mode byte");
  NodeFile nf;
  nf.header.mode = static_cast<Mode>(bytes[5]);
  std::size_t pos = 6;
  nf.header.q = static_cast<int>(detail::get_le(bytes, pos, 2));
  nf.header.id = static_cast<int>(detail::get_le(bytes, pos, 2));
  nf.header.m = static_cast<std::uint32_t>(detail::get_le(bytes, pos, 4));
  if (!is_supported_q(nf.header.q)) throw Error(ErrorKind::BadFormat, "unsupported q in node file");
  for (int i = 0; i < nf.header.q; ++i) nf.header.alpha.push_back(static_cast<int>(detail::get_le(bytes, pos, 1)));
  for (int i = 0; i < nf.header.q; ++i) nf.header.k.push_back(static_cast<int>(detail::get_le(bytes, pos, 1)));
  nf.header.digest = detail::get_le(bytes, pos, 8);
  nf.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return nf;
}

// Parses and checks the file against the profile it claims to belong to.
inline NodeState parse_node(const CodeProfile& p, std::span<const std::uint8_t> bytes) {
  NodeFile nf = parse_node_file(bytes);
  const auto& h = nf.header;
  if (h.mode != p.mode || h.q != p.q || static_cast<int>(h.m) != p.m || h.alpha != p.alpha || h.k != p.k)
    throw Error(ErrorKind::BadFormat, "node file parameters differ from the profile");
  if (h.digest != profile_digest(p)) throw Error(ErrorKind::BadFormat, "node file digest differs from the profile");
  if (h.id < 0 || h.id >= p.nodes()) throw Error(ErrorKind::BadFormat, "node id out of range");
  const auto want = static_cast<std::size_t>(p.q) * static_cast<std::size_t>(p.A);
  if (nf.payload.size() != want)
    throw Error(ErrorKind::BadFormat, "payload has " + std::to_string(nf.payload.size()) + " bytes, expected " +
                                          std::to_string(want));
  for (auto b : nf.payload)
    if (b >= p.nodes()) throw Error(ErrorKind::BadFormat, "payload symbol outside the field");
  return NodeState{h.id, Matrix(static_cast<std::size_t>(p.q), static_cast<std::size_t>(p.A), std::move(nf.payload)),
                   h.digest};
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string node_file_name(int id, int chunk) {
  std::ostringstream s;
  s << "chunk" << chunk << "_node" << id << ".hrgc";
  return s.str();
}

// ---------------------------------------------------------------------------
// Manifest: key=value text listing the node files and the profile digest.

struct Manifest {
  std::uint64_t digest = 0;
  int chunks = 0;
  std::uint64_t length = 0;  // original file length in bytes
  std::vector<std::string> files;

  bool operator==(const Manifest&) const = default;
};

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 15];
  return s;
}

inline std::string manifest_to_text(const Manifest& m) {
  std::ostringstream s;
  s << "chunks=" << m.chunks << "\n"
    << "digest=" << hex64(m.digest) << "\n"
    << "length=" << m.length << "\n";
  for (const auto& f : m.files) s << "file=" << f << "\n";
  return s.str();
}

inline Manifest manifest_from_text(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  bool have_digest = false, have_chunks = false, have_length = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::BadFormat, "manifest line without '='");
      const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      if (key == "chunks") {
        m.chunks = std::stoi(val);
        have_chunks = true;
      } else if (key == "digest") {
        if (val.size() != 16) throw Error(ErrorKind::BadFormat, "digest must be 16 hex digits");
        m.digest = std::stoull(val, nullptr, 16);
        have_digest = true;
      } else if (key == "length") {
        m.length = std::stoull(val);
        have_length = true;
      } else if (key == "file") {
        m.files.push_back(val);
      } else {
        throw Error(ErrorKind::BadFormat, "unknown manifest key " + key);
      }
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::BadFormat, "malformed manifest value: " + line);
  }
  if (!have_digest || !have_chunks || !have_length) throw Error(ErrorKind::BadFormat, "manifest is incomplete");
  return m;
}

}  // namespace hrgc
