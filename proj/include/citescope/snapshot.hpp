#pragma once

// Binary corpus snapshot.
//
//   magic    8 bytes  "CSCORPUS"
//   version  u32      kSnapshotVersion
//   coverage i32 i32  first, last
//   n        u64      number of works
//   ids      n x (u32 length, bytes)
//   years    n x i32
//   subfield n x i32
//   m        u64      country table size
//   table    m x (u32 length, bytes)
//   countries CSR: (n+1) x u64 offsets, u64 count, count x u32
//   refs      CSR: (n+1) x u64 offsets, u64 count, count x u32
//
// All integers little-endian, fixed width. Citers and the year index are
// rebuilt on load.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "citescope/corpus.hpp"

namespace citescope {

inline constexpr std::array<char, 8> kSnapshotMagic{'C', 'S', 'C', 'O', 'R', 'P', 'U', 'S'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& out, T v) {
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  out.write(b, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw FormatError("truncated snapshot");
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(b[i]) << (8 * i);
  return static_cast<T>(u);
}

inline void put_string(std::ostream& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  auto len = get_le<std::uint32_t>(in);
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len)) throw FormatError("truncated snapshot");
  return s;
}

inline void put_csr(std::ostream& out, const Adjacency& a) {
  for (auto o : a.offsets) put_le<std::uint64_t>(out, o);
  put_le<std::uint64_t>(out, a.targets.size());
  for (auto t : a.targets) put_le<std::uint32_t>(out, t);
}

inline Adjacency get_csr(std::istream& in, std::uint64_t rows) {
  Adjacency a;
  a.offsets.resize(rows + 1);
  for (auto& o : a.offsets) o = get_le<std::uint64_t>(in);
  auto count = get_le<std::uint64_t>(in);
  if (a.offsets.front() != 0 || a.offsets.back() != count) throw FormatError("corrupt CSR offsets");
  for (std::size_t i = 1; i < a.offsets.size(); ++i) {
    if (a.offsets[i] < a.offsets[i - 1]) throw FormatError("corrupt CSR offsets");
  }
  a.targets.resize(count);
  for (auto& t : a.targets) t = get_le<std::uint32_t>(in);
  return a;
}

}  // namespace detail

inline void write_snapshot(std::ostream& out, const CitationCorpus& corpus) {
  const auto& p = corpus.parts();
  out.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  detail::put_le<std::uint32_t>(out, kSnapshotVersion);
  detail::put_le<std::int32_t>(out, p.coverage.first);
  detail::put_le<std::int32_t>(out, p.coverage.last);
  detail::put_le<std::uint64_t>(out, p.ids.size());
  for (const auto& id : p.ids) detail::put_string(out, id);
  for (auto y : p.years) detail::put_le<std::int32_t>(out, y);
  for (auto s : p.subfields) detail::put_le<std::int32_t>(out, s);
  detail::put_le<std::uint64_t>(out, p.country_table.size());
  for (const auto& c : p.country_table) detail::put_string(out, c);
  detail::put_csr(out, p.countries);
  detail::put_csr(out, p.references);
}

inline CitationCorpus read_snapshot(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kSnapshotMagic) {
    throw FormatError("not a corpus snapshot");
  }
  auto version = detail::get_le<std::uint32_t>(in);
  if (version != kSnapshotVersion) {
    throw FormatError("unsupported snapshot version " + std::to_string(version));
  }
  CitationCorpus::Parts p;
  p.coverage.first = detail::get_le<std::int32_t>(in);
  p.coverage.last = detail::get_le<std::int32_t>(in);
  auto n = detail::get_le<std::uint64_t>(in);
  p.ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) p.ids.push_back(detail::get_string(in));
  p.years.resize(n);
  for (auto& y : p.years) y = detail::get_le<std::int32_t>(in);
  p.subfields.resize(n);
  for (auto& s : p.subfields) s = detail::get_le<std::int32_t>(in);
  auto m = detail::get_le<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < m; ++i) p.country_table.push_back(detail::get_string(in));
  p.countries = detail::get_csr(in, n);
  for (auto t : p.countries.targets) {
    if (t >= m) throw FormatError("country slot out of range");
  }
  p.references = detail::get_csr(in, n);
  try {
    return CitationCorpus(std::move(p));
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid snapshot: ") + e.what());
  }
}

inline void save_snapshot(const std::string& path, const CitationCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_snapshot(out, corpus);
}

inline CitationCorpus load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_snapshot(in);
}

}  // namespace citescope
