#include "voxdet/nrrd.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

static_assert(std::endian::native == std::endian::little,
              "raw payload I/O assumes a little-endian host");

namespace voxdet::nrrd {
namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error("nrrd: " + path.string() + ": " + what);
}

std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::filesystem::path& path) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        fail(path, "malformed number '" + std::string(s) + "'");
    return v;
}

long parse_long(std::string_view s, const std::filesystem::path& path) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        fail(path, "malformed integer '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

// Parses "(a,b,c)" into three doubles.
std::array<double, 3> parse_triple(std::string_view s, const std::filesystem::path& path) {
    if (s.size() < 2 || s.front() != '(' || s.back() != ')')
        fail(path, "expected '(a,b,c)', got '" + std::string(s) + "'");
    s = s.substr(1, s.size() - 2);
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) {
        std::size_t comma = s.find(',');
        std::string_view tok = (k < 2) ? s.substr(0, comma) : s;
        if (k < 2 && comma == std::string_view::npos)
            fail(path, "expected three components in triple");
        out[k] = parse_double(tok, path);
        if (k < 2) s = s.substr(comma + 1);
    }
    return out;
}

std::string read_line(std::istream& in, const std::filesystem::path& path) {
    std::string line;
    if (!std::getline(in, line)) fail(path, "truncated header");
    if (!line.empty() && line.back() == '\r') fail(path, "CRLF line endings not supported");
    return line;
}

// Requires "<key>: <value>"; returns the value.
std::string expect_field(std::istream& in, const std::filesystem::path& path,
                         const std::string& key) {
    std::string line = read_line(in, path);
    const std::string prefix = key + ": ";
    if (line.rfind(prefix, 0) != 0)
        fail(path, "expected field '" + key + "', got '" + line + "'");
    return line.substr(prefix.size());
}

std::string header_text(const Geometry& g, const char* type_name) {
    std::ostringstream h;
    h << "NRRD0004\n"
      << "type: " << type_name << "\n"
      << "dimension: 3\n"
      << "sizes: " << g.dims[0] << " " << g.dims[1] << " " << g.dims[2] << "\n"
      << "space dimension: 3\n"
      << "space directions: (" << fmt_double(g.spacing[0]) << ",0,0) (0,"
      << fmt_double(g.spacing[1]) << ",0) (0,0," << fmt_double(g.spacing[2]) << ")\n"
      << "space origin: (" << fmt_double(g.origin[0]) << "," << fmt_double(g.origin[1])
      << "," << fmt_double(g.origin[2]) << ")\n"
      << "endian: little\n"
      << "encoding: raw\n"
      << "\n";
    return h.str();
}

void write_file(const std::filesystem::path& path, const std::string& header,
                const void* payload, std::size_t payload_bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("nrrd: cannot open for writing: " + path.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
    if (!out) throw std::runtime_error("nrrd: write failed: " + path.string());
}

}  // namespace

AnyVolume read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");

    if (read_line(in, path) != "NRRD0004") fail(path, "missing NRRD0004 magic");

    const std::string type = expect_field(in, path, "type");
    if (type != "float" && type != "uint8") fail(path, "unsupported type '" + type + "'");

    if (expect_field(in, path, "dimension") != "3") fail(path, "dimension must be 3");

    const std::string sizes_field = expect_field(in, path, "sizes");
    const auto size_toks = split_ws(sizes_field);
    if (size_toks.size() != 3) fail(path, "sizes must have 3 entries");
    Geometry g;
    for (int a = 0; a < 3; ++a) {
        long n = parse_long(size_toks[a], path);
        if (n < 1) fail(path, "sizes must be >= 1");
        g.dims[a] = static_cast<int>(n);
    }

    if (expect_field(in, path, "space dimension") != "3")
        fail(path, "space dimension must be 3");

    const std::string dirs_field = expect_field(in, path, "space directions");
    const auto dir_toks = split_ws(dirs_field);
    if (dir_toks.size() != 3) fail(path, "space directions must have 3 vectors");
    for (int a = 0; a < 3; ++a) {
        auto v = parse_triple(dir_toks[a], path);
        for (int b = 0; b < 3; ++b) {
            if (b == a) continue;
            if (v[b] != 0.0) fail(path, "space directions must be axis-aligned");
        }
        if (!(v[a] > 0.0)) fail(path, "non-positive spacing");
        g.spacing[a] = v[a];
    }

    g.origin = parse_triple(expect_field(in, path, "space origin"), path);

    if (expect_field(in, path, "endian") != "little") fail(path, "endian must be little");
    const std::string enc = expect_field(in, path, "encoding");
    if (enc != "raw") fail(path, "unsupported encoding '" + enc + "'");
    if (!read_line(in, path).empty()) fail(path, "expected blank line before payload");

    g.validate();
    const std::size_t count = g.voxel_count();
    const std::size_t elem = (type == "float") ? 4 : 1;
    const std::size_t want = count * elem;

    std::vector<char> payload(want);
    in.read(payload.data(), static_cast<std::streamsize>(want));
    if (static_cast<std::size_t>(in.gcount()) != want)
        fail(path, "payload length mismatch: expected " + std::to_string(want) + " bytes");
    char extra;
    if (in.read(&extra, 1))
        fail(path, "payload length mismatch: trailing bytes after payload");

    if (type == "float") {
        ScalarVolume vol;
        vol.geom = g;
        vol.data.resize(count);
        std::memcpy(vol.data.data(), payload.data(), want);
        return vol;
    }
    LabelVolume vol;
    vol.geom = g;
    vol.data.assign(payload.begin(), payload.end());
    vol.validate();
    return vol;
}

ScalarVolume read_scalar(const std::filesystem::path& path) {
    AnyVolume v = read(path);
    if (auto* s = std::get_if<ScalarVolume>(&v)) return std::move(*s);
    fail(path, "expected a float volume");
}

LabelVolume read_label(const std::filesystem::path& path) {
    AnyVolume v = read(path);
    if (auto* l = std::get_if<LabelVolume>(&v)) return std::move(*l);
    fail(path, "expected a uint8 volume");
}

void write(const ScalarVolume& vol, const std::filesystem::path& path) {
    vol.validate();
    write_file(path, header_text(vol.geom, "float"), vol.data.data(),
               vol.data.size() * sizeof(float));
}

void write(const LabelVolume& vol, const std::filesystem::path& path) {
    vol.validate();
    write_file(path, header_text(vol.geom, "uint8"), vol.data.data(), vol.data.size());
}

void write(const AnyVolume& vol, const std::filesystem::path& path) {
    std::visit([&](const auto& v) { write(v, path); }, vol);
}

}  // namespace voxdet::nrrd
