#include "cellhom/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "cellhom/errors.hpp"

namespace cellhom {

static_assert(std::endian::native == std::endian::little,
              "field files are little endian and this code writes raw buffers");

namespace {

constexpr char kMagic[4] = {'C', 'H', 'O', 'F'};

std::string at_byte(std::uintmax_t off) { return " at byte " + std::to_string(off); }

void write_header(std::ofstream& os, const Grid& g) {
    std::uint32_t dims[3] = {static_cast<std::uint32_t>(g.n1), static_cast<std::uint32_t>(g.n2),
                             static_cast<std::uint32_t>(g.n3)};
    os.write(kMagic, 4);
    os.write(reinterpret_cast<const char*>(dims), 12);
}

void write_payload(const std::filesystem::path& path, const Grid& g,
                   const std::vector<double>& data) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_header(os, g);
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!os) throw Error("short write to " + path.string());
}

} // namespace

FieldFile load_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open field file " + path.string());

    char head[16];
    is.read(head, 16);
    if (is.gcount() < 16)
        throw Error(path.string() + ": truncated header (" + std::to_string(is.gcount()) +
                    " of 16 bytes)");
    if (std::memcmp(head, kMagic, 4) != 0)
        throw Error(path.string() + ": bad magic" + at_byte(0) + " (expected \"CHOF\")");

    std::uint32_t dims[3];
    std::memcpy(dims, head + 4, 12);
    for (int d = 0; d < 3; ++d)
        if (dims[d] < 2)
            throw Error(path.string() + ": grid extent " + std::to_string(dims[d]) +
                        at_byte(4 + 4 * d) + " is below the minimum of 2");

    FieldFile f;
    f.grid = Grid(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                  static_cast<int>(dims[2]));

    const std::uintmax_t total = std::filesystem::file_size(path);
    const std::uintmax_t payload = total - 16;
    if (payload % sizeof(double) != 0)
        throw Error(path.string() + ": payload of " + std::to_string(payload) + " bytes" +
                    at_byte(16) + " is not a whole number of f64 values");

    const std::uintmax_t count = payload / sizeof(double);
    const std::uintmax_t nn = f.grid.node_count();
    if (count == 3 * nn)
        f.kind = FieldKind::displacement;
    else if (count == 6 * nn)
        f.kind = FieldKind::nodal_sym;
    else if (count == 48 * nn)
        f.kind = FieldKind::quad_sym;
    else
        throw Error(path.string() + ": " + std::to_string(count) + " values for a " +
                    std::to_string(dims[0]) + "x" + std::to_string(dims[1]) + "x" +
                    std::to_string(dims[2]) + " grid match no field layout (want " +
                    std::to_string(3 * nn) + ", " + std::to_string(6 * nn) + " or " +
                    std::to_string(48 * nn) + ")");

    f.data.resize(count);
    is.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::uintmax_t>(is.gcount()) != count * sizeof(double))
        throw Error(path.string() + ": payload ended early" +
                    at_byte(16 + static_cast<std::uintmax_t>(is.gcount())));
    return f;
}

void save_field(const std::filesystem::path& path, const VecField& u) {
    write_payload(path, u.grid, u.v);
}

void save_field(const std::filesystem::path& path, const NodalSymField& e) {
    write_payload(path, e.grid, e.s);
}

void save_field(const std::filesystem::path& path, const SymField& e) {
    write_payload(path, e.grid, e.s);
}

VecField as_displacement(const FieldFile& f) {
    if (f.kind != FieldKind::displacement)
        throw ConfigError("field file does not hold a displacement (3 values per node)");
    VecField u(f.grid);
    u.v = f.data;
    return u;
}

NodalSymField as_nodal_sym(const FieldFile& f, const Lattice& lat) {
    if (f.kind != FieldKind::nodal_sym)
        throw ConfigError("field file does not hold nodal tensor samples (6 values per node)");
    NodalSymField e(f.grid, lat);
    e.s = f.data;
    return e;
}

SymField as_quad_sym(const FieldFile& f, const Lattice& lat) {
    if (f.kind != FieldKind::quad_sym)
        throw ConfigError(
            "field file does not hold quadrature tensor samples (48 values per element)");
    SymField e(f.grid, lat);
    e.s = f.data;
    return e;
}

// --- JsonWriter -------------------------------------------------------------

std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void JsonWriter::newline() {
    out_ += '\n';
    out_.append(2 * stack_.size(), ' ');
}

void JsonWriter::separate() {
    if (after_key_) {
        after_key_ = false;
        return;
    }
    if (!first_) out_ += ',';
    if (!stack_.empty()) {
        if (stack_.back() == 'f') {
            if (!first_) out_ += ' ';
        } else {
            newline();
        }
    }
    first_ = false;
}

void JsonWriter::open(char bracket, char kind) {
    separate();
    out_ += bracket;
    stack_.push_back(kind);
    first_ = true;
}

void JsonWriter::close(char bracket) {
    const char kind = stack_.back();
    stack_.pop_back();
    if (!first_ && kind != 'f') newline();
    out_ += bracket;
    first_ = false;
}

JsonWriter& JsonWriter::begin_object() {
    open('{', 'o');
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    close('}');
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    open('[', 'a');
    return *this;
}

JsonWriter& JsonWriter::begin_flat() {
    open('[', 'f');
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    close(']');
    return *this;
}

JsonWriter& JsonWriter::key(std::string_view k) {
    separate();
    out_ += '"';
    out_.append(k);
    out_ += "\": ";
    after_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double x) {
    separate();
    out_ += format_double(x);
    return *this;
}

JsonWriter& JsonWriter::value(std::int64_t x) {
    separate();
    out_ += std::to_string(x);
    return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t x) {
    separate();
    out_ += std::to_string(x);
    return *this;
}

JsonWriter& JsonWriter::value(bool x) {
    separate();
    out_ += x ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value(std::string_view s) {
    separate();
    out_ += '"';
    for (char c : s) {
        switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                out_ += buf;
            } else {
                out_ += c;
            }
        }
    }
    out_ += '"';
    return *this;
}

std::string JsonWriter::take() {
    out_ += '\n';
    return std::move(out_);
}

// --- CSV --------------------------------------------------------------------

std::string to_csv(const std::vector<OscillationRecord>& records) {
    std::string out = "n,value,limit,error\n";
    for (const auto& r : records) {
        out += std::to_string(r.n);
        out += ',';
        out += format_double(r.value);
        out += ',';
        out += format_double(r.limit);
        out += ',';
        out += format_double(r.error);
        out += '\n';
    }
    return out;
}

std::string to_csv(const TraceReport& report) {
    std::string out = "direction,index,mismatch\n";
    for (std::size_t i = 0; i < report.mismatch.size(); ++i) {
        out += std::to_string(report.direction);
        out += ',';
        out += std::to_string(i);
        out += ',';
        out += format_double(report.mismatch[i]);
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw Error("short write to " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    std::string s((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return s;
}

// --- VTK --------------------------------------------------------------------

namespace {

std::ofstream open_vtk(const std::filesystem::path& path, const Grid& g) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << "# vtk DataFile Version 3.0\nperiodic cell field\nASCII\n"
       << "DATASET STRUCTURED_POINTS\n"
       << "DIMENSIONS " << g.n1 << ' ' << g.n2 << ' ' << g.n3 << '\n'
       << "ORIGIN 0 0 0\n"
       << "SPACING " << 1.0 / g.n1 << ' ' << 1.0 / g.n2 << ' ' << 1.0 / g.n3 << '\n'
       << "POINT_DATA " << g.node_count() << '\n';
    return os;
}

} // namespace

void save_vtk(const std::filesystem::path& path, const std::string& name, const VecField& u) {
    auto os = open_vtk(path, u.grid);
    os << "VECTORS " << name << " double\n";
    for (std::size_t n = 0; n < u.grid.node_count(); ++n)
        os << u.v[3 * n] << ' ' << u.v[3 * n + 1] << ' ' << u.v[3 * n + 2] << '\n';
    if (!os) throw Error("short write to " + path.string());
}

void save_vtk(const std::filesystem::path& path, const std::string& name, const NodalSymField& e) {
    auto os = open_vtk(path, e.grid);
    os << "TENSORS " << name << " double\n";
    for (std::size_t n = 0; n < e.grid.node_count(); ++n) {
        for (int i = 0; i < 3; ++i) {
            os << e.value(n, i, 0) << ' ' << e.value(n, i, 1) << ' ' << e.value(n, i, 2) << '\n';
        }
        os << '\n';
    }
    if (!os) throw Error("short write to " + path.string());
}

} // namespace cellhom
