// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/** \file
 * trace_io.hpp: chunked binary trace directories.
 *
 * A trace directory holds data chunks `trace.<index>.bin` (dense from 0) and
 * a `meta.bin` written last. A directory without `meta.bin` is an incomplete
 * trace. All integers are little-endian. Layout (see docs/trace_format.md):
 *
 *   chunk  := header strtab record*
 *   header := "XSTRACE1" u16:version u64:clock_domain u32:chunk_index u32:record_count
 *   strtab := u32:count (u32:len bytes)*
 *   record := u32:body_len body
 *   body   := u8:category u32:name_index u32:pid u64:tid u64:start u64:duration
 *             u8:has_correlation [u64:correlation]
 *
 *   meta   := "XSTMETA1" u16:version u64:clock_domain u32:chunk_count u32:process_count
 *             process*
 *   process:= u32:pid u32:len bytes u8:flags [u32:parent] [u64:fork] [u64:join]
 *             (flags bit0 parent, bit1 fork, bit2 join)
 */
#ifndef XSTACK_TRACE_IO_HPP
#define XSTACK_TRACE_IO_HPP

#include "xstack/trace_model.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <regex>
#include <span>
#include <unordered_map>

namespace xstack {

namespace io {

inline constexpr char kChunkMagic[8] = {'X', 'S', 'T', 'R', 'A', 'C', 'E', '1'};
inline constexpr char kMetaMagic[8] = {'X', 'S', 'T', 'M', 'E', 'T', 'A', '1'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kDefaultChunkLimit = 20u << 20;
inline constexpr std::size_t kMinChunkLimit = 4096;

inline constexpr std::size_t kChunkHeaderSize = 8 + 2 + 8 + 4 + 4;
inline constexpr std::size_t kRecordBodySize = 1 + 4 + 4 + 8 + 8 + 8 + 1;  // without correlation
inline constexpr std::size_t kCorrelationSize = 8;

using Bytes = std::vector<std::uint8_t>;

class Writer {
public:
    explicit Writer(Bytes& out) : out_(out) {}

    void raw(const void* p, std::size_t n)
    {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void str(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

private:
    void le(std::uint64_t v, int n)
    {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    Bytes& out_;
};

class Reader {
public:
    Reader(std::span<const std::uint8_t> in, std::string what) : in_(in), what_(std::move(what)) {}

    std::span<const std::uint8_t> take(std::size_t n)
    {
        if (in_.size() - pos_ < n) {
            throw Error(ErrorKind::Format, what_ + ": unexpected end of data at offset " + std::to_string(pos_));
        }
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    std::string str()
    {
        auto n = u32();
        auto s = take(n);
        return {reinterpret_cast<const char*>(s.data()), s.size()};
    }
    bool done() const { return pos_ == in_.size(); }
    std::size_t pos() const { return pos_; }
    const std::string& what() const { return what_; }

private:
    std::uint64_t le(int n)
    {
        auto s = take(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t{s[static_cast<std::size_t>(i)]} << (8 * i);
        return v;
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::string what_;
};

inline std::size_t record_size(const Event& e)
{
    return 4 + kRecordBodySize + (e.correlation ? kCorrelationSize : 0);
}

inline std::size_t string_entry_size(std::string_view s) { return 4 + s.size(); }

// Accumulates one chunk's string table and records.
class ChunkBuilder {
public:
    std::size_t size() const { return kChunkHeaderSize + 4 + strings_bytes_ + records_bytes_; }
    bool empty() const { return events_.empty(); }

    std::size_t size_with(const Event& e) const
    {
        std::size_t extra = record_size(e);
        if (!index_.count(e.name)) extra += string_entry_size(e.name);
        return size() + extra;
    }

    void add(const Event& e)
    {
        if (!index_.count(e.name)) {
            index_.emplace(e.name, static_cast<std::uint32_t>(strings_.size()));
            strings_.push_back(e.name);
            strings_bytes_ += string_entry_size(e.name);
        }
        records_bytes_ += record_size(e);
        events_.push_back(&e);
    }

    Bytes encode(std::uint64_t clock_domain, std::uint32_t chunk_index) const
    {
        Bytes out;
        out.reserve(size());
        Writer w(out);
        w.raw(kChunkMagic, sizeof kChunkMagic);
        w.u16(kVersion);
        w.u64(clock_domain);
        w.u32(chunk_index);
        w.u32(static_cast<std::uint32_t>(events_.size()));
        w.u32(static_cast<std::uint32_t>(strings_.size()));
        for (const auto& s : strings_) w.str(s);
        for (const Event* e : events_) {
            w.u32(static_cast<std::uint32_t>(record_size(*e) - 4));
            w.u8(static_cast<std::uint8_t>(e->category));
            w.u32(index_.at(e->name));
            w.u32(e->pid);
            w.u64(e->tid);
            w.u64(e->start);
            w.u64(e->duration);
            w.u8(e->correlation ? 1 : 0);
            if (e->correlation) w.u64(*e->correlation);
        }
        return out;
    }

private:
    std::vector<std::string> strings_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<const Event*> events_;
    std::size_t strings_bytes_ = 0;
    std::size_t records_bytes_ = 0;
};

/// Encodes events (in canonical order) into chunk byte buffers. A chunk never
/// exceeds `chunk_limit` unless it holds a single oversized record.
inline std::vector<Bytes> encode_chunks(const Trace& trace, std::size_t chunk_limit)
{
    auto order = canonical_order(trace.events);
    std::vector<Bytes> chunks;
    ChunkBuilder cur;
    for (std::size_t i : order) {
        const Event& e = trace.events[i];
        if (!cur.empty() && cur.size_with(e) > chunk_limit) {
            chunks.push_back(cur.encode(trace.clock_domain, static_cast<std::uint32_t>(chunks.size())));
            cur = ChunkBuilder{};
        }
        cur.add(e);
    }
    if (!cur.empty()) chunks.push_back(cur.encode(trace.clock_domain, static_cast<std::uint32_t>(chunks.size())));
    return chunks;
}

inline Bytes encode_meta(const Trace& trace, std::uint32_t chunk_count)
{
    auto procs = trace.processes;
    std::stable_sort(procs.begin(), procs.end(), [](const auto& a, const auto& b) { return a.pid < b.pid; });
    Bytes out;
    Writer w(out);
    w.raw(kMetaMagic, sizeof kMetaMagic);
    w.u16(kVersion);
    w.u64(trace.clock_domain);
    w.u32(chunk_count);
    w.u32(static_cast<std::uint32_t>(procs.size()));
    for (const auto& p : procs) {
        w.u32(p.pid);
        w.str(p.name);
        std::uint8_t flags = (p.parent ? 1 : 0) | (p.fork_time ? 2 : 0) | (p.join_time ? 4 : 0);
        w.u8(flags);
        if (p.parent) w.u32(*p.parent);
        if (p.fork_time) w.u64(*p.fork_time);
        if (p.join_time) w.u64(*p.join_time);
    }
    return out;
}

struct Meta {
    std::uint64_t clock_domain = 0;
    std::uint32_t chunk_count = 0;
    std::vector<ProcessMeta> processes;
};

inline Meta decode_meta(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes, "meta.bin");
    auto magic = r.take(8);
    if (std::memcmp(magic.data(), kMetaMagic, 8) != 0) throw Error(ErrorKind::Format, "meta.bin: bad magic");
    if (auto v = r.u16(); v != kVersion) {
        throw Error(ErrorKind::Format, "meta.bin: unsupported version " + std::to_string(v));
    }
    Meta m;
    m.clock_domain = r.u64();
    m.chunk_count = r.u32();
    auto n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        ProcessMeta p;
        p.pid = r.u32();
        p.name = r.str();
        auto flags = r.u8();
        if (flags & ~0x7u) throw Error(ErrorKind::Format, "meta.bin: unknown process flags");
        if (flags & 1) p.parent = r.u32();
        if (flags & 2) p.fork_time = r.u64();
        if (flags & 4) p.join_time = r.u64();
        m.processes.push_back(std::move(p));
    }
    if (!r.done()) throw Error(ErrorKind::Format, "meta.bin: trailing bytes");
    return m;
}

/// Decodes one chunk, appending its events. Checks header fields against the
/// expected chunk index and clock domain.
inline void decode_chunk(std::span<const std::uint8_t> bytes, std::uint32_t expected_index,
                         std::uint64_t clock_domain, std::vector<Event>& out)
{
    Reader r(bytes, "trace." + std::to_string(expected_index) + ".bin");
    auto magic = r.take(8);
    if (std::memcmp(magic.data(), kChunkMagic, 8) != 0) throw Error(ErrorKind::Format, r.what() + ": bad magic");
    if (auto v = r.u16(); v != kVersion) {
        throw Error(ErrorKind::Format, r.what() + ": unsupported version " + std::to_string(v));
    }
    if (r.u64() != clock_domain) throw Error(ErrorKind::Format, r.what() + ": clock domain differs from meta.bin");
    if (r.u32() != expected_index) throw Error(ErrorKind::Format, r.what() + ": chunk index mismatch");
    auto records = r.u32();
    auto nstrings = r.u32();
    std::vector<std::string> strings;
    strings.reserve(nstrings);
    for (std::uint32_t i = 0; i < nstrings; ++i) strings.push_back(r.str());
    for (std::uint32_t i = 0; i < records; ++i) {
        auto len = r.u32();
        Reader body(r.take(len), r.what());
        Event e;
        auto cat = category_from_code(body.u8());
        if (!cat) throw Error(ErrorKind::Format, r.what() + ": unknown category code");
        e.category = *cat;
        auto name = body.u32();
        if (name >= strings.size()) throw Error(ErrorKind::Format, r.what() + ": string index out of range");
        e.name = strings[name];
        e.pid = body.u32();
        e.tid = body.u64();
        e.start = body.u64();
        e.duration = body.u64();
        auto has_corr = body.u8();
        if (has_corr > 1) throw Error(ErrorKind::Format, r.what() + ": bad correlation flag");
        if (has_corr) e.correlation = body.u64();
        if (!body.done()) throw Error(ErrorKind::Format, r.what() + ": record length mismatch");
        out.push_back(std::move(e));
    }
    if (!r.done()) throw Error(ErrorKind::Format, r.what() + ": trailing bytes");
}

inline std::string chunk_file_name(std::uint32_t index) { return "trace." + std::to_string(index) + ".bin"; }

inline void write_file(const std::filesystem::path& path, const Bytes& bytes)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

inline Bytes read_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

// Maps chunk index -> path for files named trace.<n>.bin.
inline std::map<std::uint32_t, std::filesystem::path> list_chunks(const std::filesystem::path& dir)
{
    static const std::regex pattern(R"(trace\.(0|[1-9][0-9]*)\.bin)");
    std::map<std::uint32_t, std::filesystem::path> out;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        std::smatch m;
        auto name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) {
            out.emplace(static_cast<std::uint32_t>(std::stoul(m[1].str())), entry.path());
        }
    }
    if (ec) throw Error(ErrorKind::Io, "cannot list " + dir.string() + ": " + ec.message());
    return out;
}

}  // namespace io

/// Writes `trace` into `dir` and returns the number of data chunks. Stale
/// chunk files are removed first; meta.bin is written last so a crash
/// leaves an incomplete (meta-less) directory.
inline std::size_t write_trace(const Trace& trace, const std::filesystem::path& dir,
                               std::size_t chunk_limit_bytes = io::kDefaultChunkLimit)
{
    if (chunk_limit_bytes < io::kMinChunkLimit) {
        throw Error(ErrorKind::Argument, "chunk limit must be at least " + std::to_string(io::kMinChunkLimit));
    }
    require_valid(trace);

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    std::filesystem::remove(dir / "meta.bin", ec);
    for (const auto& [index, path] : io::list_chunks(dir)) std::filesystem::remove(path, ec);

    auto chunks = io::encode_chunks(trace, chunk_limit_bytes);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        io::write_file(dir / io::chunk_file_name(static_cast<std::uint32_t>(i)), chunks[i]);
    }
    io::write_file(dir / "meta.bin", io::encode_meta(trace, static_cast<std::uint32_t>(chunks.size())));
    return chunks.size();
}

/// Reads a trace directory. Events come back in canonical order.
inline Trace read_trace(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::Incomplete, dir.string() + " is not a directory");
    if (!std::filesystem::exists(dir / "meta.bin")) throw Error(ErrorKind::Incomplete, "missing meta.bin in " + dir.string());

    auto meta = io::decode_meta(io::read_file(dir / "meta.bin"));
    auto chunks = io::list_chunks(dir);
    for (std::uint32_t i = 0; i < meta.chunk_count; ++i) {
        if (!chunks.count(i)) throw Error(ErrorKind::Truncated, "missing " + io::chunk_file_name(i));
    }
    if (!chunks.empty() && chunks.rbegin()->first >= meta.chunk_count) {
        throw Error(ErrorKind::Truncated, "chunk " + std::to_string(chunks.rbegin()->first) +
                                              " beyond recorded count " + std::to_string(meta.chunk_count));
    }

    Trace t;
    t.clock_domain = meta.clock_domain;
    t.processes = std::move(meta.processes);
    for (const auto& [index, path] : chunks) {
        auto bytes = io::read_file(path);
        io::decode_chunk(bytes, index, t.clock_domain, t.events);
    }
    sort_events(t.events);
    return t;
}

}  // namespace xstack

#endif  // XSTACK_TRACE_IO_HPP
