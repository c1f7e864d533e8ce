#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hmdc/error.hpp"
#include "hmdc/lstm.hpp"
#include "hmdc/operator.hpp"

namespace hmdc {

// Weight-container file layout:
//
//   "HMDC1" '\n'
//   <manifest, one line of JSON> '\n'
//   '\n' padding to the next 8-byte file offset
//   payload: the manifest's arrays in order, each array starting at an
//   8-byte-aligned offset, f64 and u32 elements little-endian
//
// The manifest pins kind, dims, rank/nnz, gate order, array order, index
// width, and the exact payload byte count; round-trips are bit-exact.

inline constexpr char kContainerMagic[] = "HMDC1";
inline constexpr int kContainerFormatVersion = 1;
inline constexpr std::uint32_t kContainerIndexWidth = 32;

using ContainerPayload = std::variant<WeightOperator, LstmCell>;

namespace detail {

using json = nlohmann::json;

struct ArrayChunk {
    std::string name;
    std::string type; // "f64" | "u32"
    std::size_t count = 0;
    std::string bytes;
};

inline void append_f64(std::string& out, double v) {
    const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

inline void append_u32(std::string& out, std::uint32_t u) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

inline ArrayChunk f64_chunk(std::string name, const std::vector<double>& data) {
    ArrayChunk c{std::move(name), "f64", data.size(), {}};
    c.bytes.reserve(data.size() * 8);
    for (double v : data) append_f64(c.bytes, v);
    return c;
}

inline ArrayChunk u32_chunk(std::string name, const std::vector<std::uint32_t>& data) {
    ArrayChunk c{std::move(name), "u32", data.size(), {}};
    c.bytes.reserve(data.size() * 4);
    for (std::uint32_t v : data) append_u32(c.bytes, v);
    return c;
}

inline void collect_operator_chunks(const WeightOperator& op, const std::string& prefix,
                                    std::vector<ArrayChunk>& chunks) {
    std::visit([&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DenseMatrix>) {
            chunks.push_back(f64_chunk(prefix + "data", m.data()));
        } else if constexpr (std::is_same_v<T, HmdMatrix>) {
            chunks.push_back(f64_chunk(prefix + "a_prime", m.a_prime().data()));
            chunks.push_back(f64_chunk(prefix + "b", m.b().data()));
            chunks.push_back(f64_chunk(prefix + "c", m.c().data()));
            chunks.push_back(f64_chunk(prefix + "d", m.d().data()));
            chunks.push_back(f64_chunk(prefix + "e", m.e().data()));
        } else if constexpr (std::is_same_v<T, LmfMatrix>) {
            chunks.push_back(f64_chunk(prefix + "u", m.u().data()));
            chunks.push_back(f64_chunk(prefix + "v", m.v().data()));
        } else {
            chunks.push_back(f64_chunk(prefix + "values", m.values()));
            chunks.push_back(u32_chunk(prefix + "col_idx", m.col_idx()));
            chunks.push_back(u32_chunk(prefix + "row_ptr", m.row_ptr()));
        }
    }, op.value());
}

inline json operator_manifest(const WeightOperator& op) {
    json j;
    j["kind"] = scheme_name(op.kind());
    std::visit([&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DenseMatrix>) {
            j["m"] = m.rows();
            j["n"] = m.cols();
        } else if constexpr (std::is_same_v<T, HmdMatrix>) {
            j["m"] = m.m();
            j["n"] = m.n();
            j["r"] = m.r();
        } else if constexpr (std::is_same_v<T, LmfMatrix>) {
            j["m"] = m.m();
            j["n"] = m.n();
            j["d"] = m.d();
        } else {
            j["m"] = m.m();
            j["n"] = m.n();
            j["nnz"] = m.nnz();
            j["index_width"] = kContainerIndexWidth;
        }
    }, op.value());
    return j;
}

inline std::size_t aligned8(std::size_t offset) {
    return (offset + 7) & ~static_cast<std::size_t>(7);
}

inline std::string assemble(json manifest, const std::vector<ArrayChunk>& chunks) {
    json arrays = json::array();
    std::size_t payload_bytes = 0;
    for (const ArrayChunk& c : chunks) {
        payload_bytes = aligned8(payload_bytes) + c.bytes.size();
        arrays.push_back({{"count", c.count}, {"name", c.name}, {"type", c.type}});
    }
    manifest["format"] = kContainerFormatVersion;
    manifest["arrays"] = std::move(arrays);
    manifest["payload_bytes"] = payload_bytes;

    std::string out;
    out += kContainerMagic;
    out += '\n';
    out += manifest.dump();
    out += '\n';
    while (out.size() % 8 != 0) out += '\n';

    const std::size_t payload_start = out.size();
    for (const ArrayChunk& c : chunks) {
        while ((out.size() - payload_start) % 8 != 0) out += '\0';
        out += c.bytes;
    }
    return out;
}

// --- parsing ---------------------------------------------------------------

class PayloadReader {
public:
    PayloadReader(const std::string& file, std::size_t payload_start)
        : file_(file), start_(payload_start), pos_(payload_start) {}

    std::vector<double> read_f64(std::size_t count) {
        align();
        require(count * 8);
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t u = 0;
            for (int b = 0; b < 8; ++b) {
                u |= static_cast<std::uint64_t>(
                         static_cast<unsigned char>(file_[pos_ + 8 * i + b]))
                     << (8 * b);
            }
            out[i] = std::bit_cast<double>(u);
        }
        pos_ += count * 8;
        return out;
    }

    std::vector<std::uint32_t> read_u32(std::size_t count) {
        align();
        require(count * 4);
        std::vector<std::uint32_t> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::uint32_t u = 0;
            for (int b = 0; b < 4; ++b) {
                u |= static_cast<std::uint32_t>(
                         static_cast<unsigned char>(file_[pos_ + 4 * i + b]))
                     << (8 * b);
            }
            out[i] = u;
        }
        pos_ += count * 4;
        return out;
    }

private:
    void align() { pos_ = start_ + aligned8(pos_ - start_); }

    void require(std::size_t bytes) {
        if (pos_ + bytes > file_.size()) {
            throw ContainerError(ContainerError::Code::LengthMismatch,
                                 "container: payload shorter than manifest declares");
        }
    }

    const std::string& file_;
    std::size_t start_;
    std::size_t pos_;
};

inline std::size_t manifest_size_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_unsigned()) {
        throw ContainerError(ContainerError::Code::BadManifest,
                             std::string("container: missing or bad field '") + key + "'");
    }
    return j[key].get<std::size_t>();
}

inline WeightOperator read_operator(const json& j, PayloadReader& reader) {
    if (!j.contains("kind") || !j["kind"].is_string()) {
        throw ContainerError(ContainerError::Code::BadManifest, "container: operator without kind");
    }
    const std::string kind = j["kind"].get<std::string>();
    try {
        if (kind == "dense") {
            const std::size_t m = manifest_size_field(j, "m");
            const std::size_t n = manifest_size_field(j, "n");
            return WeightOperator(DenseMatrix(m, n, reader.read_f64(m * n)));
        }
        if (kind == "hmd") {
            const std::size_t m = manifest_size_field(j, "m");
            const std::size_t n = manifest_size_field(j, "n");
            const std::size_t r = manifest_size_field(j, "r");
            DenseMatrix a_prime(r, n, reader.read_f64(r * n));
            RealVector b(reader.read_f64(m - r));
            RealVector c(reader.read_f64((n + 1) / 2));
            RealVector d(reader.read_f64(m - r));
            RealVector e(reader.read_f64(n / 2));
            return WeightOperator(HmdMatrix(m, n, r, std::move(a_prime), std::move(b),
                                            std::move(c), std::move(d), std::move(e)));
        }
        if (kind == "lmf") {
            const std::size_t m = manifest_size_field(j, "m");
            const std::size_t n = manifest_size_field(j, "n");
            const std::size_t d = manifest_size_field(j, "d");
            DenseMatrix u(m, d, reader.read_f64(m * d));
            DenseMatrix v(d, n, reader.read_f64(d * n));
            return WeightOperator(LmfMatrix(std::move(u), std::move(v)));
        }
        if (kind == "csr") {
            const std::size_t m = manifest_size_field(j, "m");
            const std::size_t n = manifest_size_field(j, "n");
            const std::size_t nnz = manifest_size_field(j, "nnz");
            if (manifest_size_field(j, "index_width") != kContainerIndexWidth) {
                throw ContainerError(ContainerError::Code::BadManifest,
                                     "container: unsupported index width");
            }
            std::vector<double> values = reader.read_f64(nnz);
            std::vector<std::uint32_t> col_idx = reader.read_u32(nnz);
            std::vector<std::uint32_t> row_ptr = reader.read_u32(m + 1);
            return WeightOperator(CsrMatrix(m, n, std::move(values), std::move(col_idx),
                                            std::move(row_ptr)));
        }
    } catch (const ContainerError&) {
        throw;
    } catch (const std::invalid_argument& ex) {
        throw ContainerError(ContainerError::Code::BadManifest,
                             std::string("container: payload violates invariants: ") + ex.what());
    }
    throw ContainerError(ContainerError::Code::UnknownKind,
                         "container: unknown kind '" + kind + "'");
}

// Expected arrays for an operator kind, used to cross-check the manifest's
// declared order against the canonical layout.
inline void expected_operator_arrays(const json& j, const std::string& prefix,
                                     std::vector<ArrayChunk>& expect) {
    const std::string kind = j.value("kind", "");
    auto add = [&](const char* name, const char* type, std::size_t count) {
        expect.push_back(ArrayChunk{prefix + name, type, count, {}});
    };
    if (kind == "dense") {
        add("data", "f64", manifest_size_field(j, "m") * manifest_size_field(j, "n"));
    } else if (kind == "hmd") {
        const std::size_t m = manifest_size_field(j, "m");
        const std::size_t n = manifest_size_field(j, "n");
        const std::size_t r = manifest_size_field(j, "r");
        if (r >= m || n < 2) {
            throw ContainerError(ContainerError::Code::BadManifest, "container: bad hmd dims");
        }
        add("a_prime", "f64", r * n);
        add("b", "f64", m - r);
        add("c", "f64", (n + 1) / 2);
        add("d", "f64", m - r);
        add("e", "f64", n / 2);
    } else if (kind == "lmf") {
        const std::size_t m = manifest_size_field(j, "m");
        const std::size_t n = manifest_size_field(j, "n");
        const std::size_t d = manifest_size_field(j, "d");
        add("u", "f64", m * d);
        add("v", "f64", d * n);
    } else if (kind == "csr") {
        const std::size_t m = manifest_size_field(j, "m");
        const std::size_t nnz = manifest_size_field(j, "nnz");
        add("values", "f64", nnz);
        add("col_idx", "u32", nnz);
        add("row_ptr", "u32", m + 1);
    } else {
        throw ContainerError(ContainerError::Code::UnknownKind,
                             "container: unknown kind '" + kind + "'");
    }
}

inline void check_declared_arrays(const json& manifest, const std::vector<ArrayChunk>& expect) {
    if (!manifest.contains("arrays") || !manifest["arrays"].is_array() ||
        manifest["arrays"].size() != expect.size()) {
        throw ContainerError(ContainerError::Code::BadManifest,
                             "container: manifest arrays do not match kind layout");
    }
    std::size_t payload_bytes = 0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
        const json& a = manifest["arrays"][i];
        if (a.value("name", "") != expect[i].name || a.value("type", "") != expect[i].type ||
            manifest_size_field(a, "count") != expect[i].count) {
            throw ContainerError(ContainerError::Code::BadManifest,
                                 "container: manifest arrays do not match kind layout");
        }
        const std::size_t elem = expect[i].type == "f64" ? 8 : 4;
        payload_bytes = aligned8(payload_bytes) + expect[i].count * elem;
    }
    if (manifest_size_field(manifest, "payload_bytes") != payload_bytes) {
        throw ContainerError(ContainerError::Code::BadManifest,
                             "container: payload_bytes inconsistent with arrays");
    }
}

} // namespace detail

inline std::string serialize_container(const WeightOperator& op) {
    std::vector<detail::ArrayChunk> chunks;
    detail::collect_operator_chunks(op, "", chunks);
    return detail::assemble(detail::operator_manifest(op), chunks);
}

inline std::string serialize_container(const LstmCell& cell) {
    detail::json manifest;
    manifest["kind"] = "lstm_cell";
    manifest["input_dim"] = cell.input_dim();
    manifest["hidden_dim"] = cell.hidden_dim();
    manifest["gate_order"] = "ifgo";
    manifest["w_x"] = detail::operator_manifest(cell.w_x());
    manifest["w_h"] = detail::operator_manifest(cell.w_h());

    std::vector<detail::ArrayChunk> chunks;
    detail::collect_operator_chunks(cell.w_x(), "w_x.", chunks);
    detail::collect_operator_chunks(cell.w_h(), "w_h.", chunks);
    chunks.push_back(detail::f64_chunk("bias", cell.bias().data()));
    return detail::assemble(std::move(manifest), chunks);
}

inline ContainerPayload parse_container(const std::string& file) {
    using Code = ContainerError::Code;
    constexpr std::size_t magic_len = 5;

    if (file.size() < magic_len) {
        throw ContainerError(Code::Truncated, "container: file too short for magic");
    }
    if (file.compare(0, magic_len, kContainerMagic) != 0) {
        throw ContainerError(Code::BadMagic, "container: bad magic");
    }
    const std::size_t manifest_begin = magic_len + 1;
    if (file.size() < manifest_begin || file[magic_len] != '\n') {
        throw ContainerError(Code::Truncated, "container: header cut short");
    }
    const std::size_t manifest_end = file.find('\n', manifest_begin);
    if (manifest_end == std::string::npos) {
        throw ContainerError(Code::Truncated, "container: manifest line unterminated");
    }

    detail::json manifest;
    try {
        manifest = detail::json::parse(file.substr(manifest_begin, manifest_end - manifest_begin));
    } catch (const detail::json::exception&) {
        throw ContainerError(Code::BadManifest, "container: manifest is not valid JSON");
    }
    if (!manifest.is_object() ||
        manifest.value("format", -1) != kContainerFormatVersion) {
        throw ContainerError(Code::BadManifest, "container: bad format version");
    }

    const std::string kind = manifest.value("kind", "");
    std::vector<detail::ArrayChunk> expect;
    detail::json w_x_manifest, w_h_manifest;
    std::size_t bias_len = 0;
    if (kind == "lstm_cell") {
        if (!manifest.contains("w_x") || !manifest.contains("w_h")) {
            throw ContainerError(Code::BadManifest, "container: cell manifest missing operators");
        }
        if (manifest.value("gate_order", "") != "ifgo") {
            throw ContainerError(Code::BadManifest, "container: unsupported gate order");
        }
        w_x_manifest = manifest["w_x"];
        w_h_manifest = manifest["w_h"];
        bias_len = 4 * detail::manifest_size_field(manifest, "hidden_dim");
        detail::expected_operator_arrays(w_x_manifest, "w_x.", expect);
        detail::expected_operator_arrays(w_h_manifest, "w_h.", expect);
        expect.push_back(detail::ArrayChunk{"bias", "f64", bias_len, {}});
    } else {
        detail::expected_operator_arrays(manifest, "", expect);
    }
    detail::check_declared_arrays(manifest, expect);

    std::size_t payload_start = manifest_end + 1;
    while (payload_start % 8 != 0) {
        if (payload_start >= file.size()) {
            throw ContainerError(Code::Truncated, "container: padding cut short");
        }
        ++payload_start;
    }
    if (payload_start > file.size()) {
        throw ContainerError(Code::Truncated, "container: padding cut short");
    }
    const std::size_t declared = detail::manifest_size_field(manifest, "payload_bytes");
    if (file.size() - payload_start != declared) {
        throw ContainerError(Code::LengthMismatch,
                             "container: payload byte count differs from manifest");
    }

    detail::PayloadReader reader(file, payload_start);
    if (kind == "lstm_cell") {
        WeightOperator w_x = detail::read_operator(w_x_manifest, reader);
        WeightOperator w_h = detail::read_operator(w_h_manifest, reader);
        RealVector bias(reader.read_f64(bias_len));
        try {
            return LstmCell(detail::manifest_size_field(manifest, "input_dim"),
                            detail::manifest_size_field(manifest, "hidden_dim"),
                            std::move(w_x), std::move(w_h), std::move(bias));
        } catch (const std::invalid_argument& ex) {
            throw ContainerError(Code::BadManifest,
                                 std::string("container: cell violates invariants: ") + ex.what());
        }
    }
    return detail::read_operator(manifest, reader);
}

inline void save_container(const std::string& path, const WeightOperator& op) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ContainerError(ContainerError::Code::Io, "container: cannot open for write: " + path);
    }
    const std::string bytes = serialize_container(op);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ContainerError(ContainerError::Code::Io, "container: write failed: " + path);
    }
}

inline void save_container(const std::string& path, const LstmCell& cell) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ContainerError(ContainerError::Code::Io, "container: cannot open for write: " + path);
    }
    const std::string bytes = serialize_container(cell);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ContainerError(ContainerError::Code::Io, "container: write failed: " + path);
    }
}

inline ContainerPayload load_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ContainerError(ContainerError::Code::Io, "container: cannot open for read: " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw ContainerError(ContainerError::Code::Io, "container: read failed: " + path);
    }
    return parse_container(bytes);
}

} // namespace hmdc
