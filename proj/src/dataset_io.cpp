#include "damlab/dataset_io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace damlab {

namespace {

void put_u16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xFF));
    buf.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(buf, bits);
}

class ByteReader {
public:
    explicit ByteReader(std::istream& in) : in_(in) {}

    std::uint8_t u8() { return take<1>()[0]; }
    std::uint16_t u16() {
        const auto b = take<2>();
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32() {
        const auto b = take<4>();
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        const auto b = take<8>();
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    void bytes(std::uint8_t* dst, std::size_t n) {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw LengthError("dataset stream truncated");
        }
    }

private:
    template <std::size_t N>
    std::array<std::uint8_t, N> take() {
        std::array<std::uint8_t, N> b{};
        bytes(b.data(), N);
        return b;
    }

    std::istream& in_;
};

std::optional<double> from_nan(double v) {
    if (std::isnan(v)) return std::nullopt;
    return v;
}

} // namespace

void write_pattern_set(const PatternSet& set, std::ostream& out) {
    set.validate();
    const std::uint32_t n = set.n_neurons();
    const std::uint32_t s = static_cast<std::uint32_t>(set.size());
    const std::size_t bytes_per_pattern = (n + 7) / 8;

    std::string buf;
    buf.reserve(34 + bytes_per_pattern * s);
    buf.append("DAMP");
    put_u16(buf, kDatasetFormatVersion);
    put_u32(buf, n);
    put_u32(buf, s);
    buf.push_back(static_cast<char>(static_cast<std::uint8_t>(set.source)));
    put_u64(buf, set.seed);
    put_f64(buf, set.skew_p.value_or(std::numeric_limits<double>::quiet_NaN()));
    put_f64(buf, set.target_hd.value_or(std::numeric_limits<double>::quiet_NaN()));

    for (const auto& p : set.patterns) {
        const auto& words = p.words();
        for (std::size_t byte = 0; byte < bytes_per_pattern; ++byte) {
            buf.push_back(static_cast<char>((words[byte >> 3] >> (8 * (byte & 7))) & 0xFF));
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw IoError("failed writing dataset stream");
    }
}

void write_pattern_set(const PatternSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for write: " + path.string());
    }
    write_pattern_set(set, out);
}

PatternSet read_pattern_set(std::istream& in) {
    ByteReader r(in);
    std::uint8_t magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "DAMP", 4) != 0) {
        throw FormatError("bad dataset magic (expected DAMP)");
    }
    const std::uint16_t version = r.u16();
    if (version != kDatasetFormatVersion) {
        throw FormatError("unsupported dataset format version " + std::to_string(version));
    }
    const std::uint32_t n = r.u32();
    const std::uint32_t s = r.u32();
    const std::uint8_t source_tag = r.u8();
    if (source_tag > 2) {
        throw FormatError("unknown source tag " + std::to_string(source_tag));
    }
    PatternSet set;
    set.source = static_cast<PatternSource>(source_tag);
    set.seed = r.u64();
    set.skew_p = from_nan(r.f64());
    set.target_hd = from_nan(r.f64());
    if (n == 0 || s == 0) {
        throw FormatError("dataset header declares empty dimensions");
    }

    const std::size_t bytes_per_pattern = (n + 7) / 8;
    std::vector<std::uint8_t> body(bytes_per_pattern);
    set.patterns.reserve(s);
    for (std::uint32_t k = 0; k < s; ++k) {
        r.bytes(body.data(), bytes_per_pattern);
        std::vector<std::uint64_t> words((n + 63) / 64, 0);
        for (std::size_t byte = 0; byte < bytes_per_pattern; ++byte) {
            words[byte >> 3] |= static_cast<std::uint64_t>(body[byte]) << (8 * (byte & 7));
        }
        set.patterns.push_back(Pattern::from_words(std::move(words), n));
    }
    return set;
}

PatternSet read_pattern_set(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for read: " + path.string());
    }
    return read_pattern_set(in);
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for write: " + path.string());
    }
    for (const auto& e : entries) {
        nlohmann::json j{
            {"id", e.id},
            {"file", e.file},
            {"skew_p", e.skew_p ? nlohmann::json(*e.skew_p) : nlohmann::json(nullptr)},
            {"target_hd", e.target_hd ? nlohmann::json(*e.target_hd) : nlohmann::json(nullptr)},
            {"realized_mean_hd", e.realized_mean_hd},
            {"seed", e.seed},
            {"n_neurons", e.n_neurons},
            {"size", e.size},
        };
        out << j.dump() << "\n";
    }
    if (!out) {
        throw IoError("failed writing manifest: " + path.string());
    }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open for read: " + path.string());
    }
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": bad manifest line: " + e.what());
        }
        ManifestEntry e;
        e.id = j.at("id").get<std::string>();
        e.file = j.at("file").get<std::string>();
        if (j.contains("skew_p") && !j["skew_p"].is_null()) e.skew_p = j["skew_p"].get<double>();
        if (j.contains("target_hd") && !j["target_hd"].is_null()) {
            e.target_hd = j["target_hd"].get<double>();
        }
        e.realized_mean_hd = j.value("realized_mean_hd", 0.0);
        e.seed = j.value("seed", std::uint64_t{0});
        e.n_neurons = j.value("n_neurons", std::uint32_t{0});
        e.size = j.value("size", std::uint32_t{0});
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for read: " + path.string());
    }
    std::vector<std::uint8_t> bytes;
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    if (size < 0) {
        throw IoError("cannot stat: " + path.string());
    }
    bytes.resize(static_cast<std::size_t>(size));
    in.seekg(0, std::ios::beg);
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (in.gcount() != size) {
        throw IoError("short read: " + path.string());
    }
    return bytes;
}

} // namespace damlab
