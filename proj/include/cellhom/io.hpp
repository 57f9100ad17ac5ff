#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cellhom/analysis.hpp"
#include "cellhom/donati.hpp"

namespace cellhom {

// --- binary field container ------------------------------------------------
//
// Same header layout as the microstructure file, different magic: 16 bytes
// ("CHOF", u32 n1, n2, n3, little endian), then the payload as little-endian
// f64. The payload length determines what is stored on the n1 x n2 x n3 grid:
//   3 per node      displacement
//   6 per node      symmetric tensor samples at the nodes
//   48 per element  symmetric tensor samples at the 8 quadrature points
// Load errors carry the byte offset at which the file stopped making sense.

enum class FieldKind { displacement, nodal_sym, quad_sym };

struct FieldFile {
    Grid grid{2, 2, 2};
    FieldKind kind = FieldKind::displacement;
    std::vector<double> data;
};

FieldFile load_field(const std::filesystem::path& path);

void save_field(const std::filesystem::path& path, const VecField& u);
void save_field(const std::filesystem::path& path, const NodalSymField& e);
void save_field(const std::filesystem::path& path, const SymField& e);

// view a loaded payload as a concrete field (throws ConfigError on a kind
// mismatch; the lattice is not stored in the file and must be supplied)
VecField as_displacement(const FieldFile& f);
NodalSymField as_nodal_sym(const FieldFile& f, const Lattice& lat);
SymField as_quad_sym(const FieldFile& f, const Lattice& lat);

// --- JSON report writer ------------------------------------------------------
//
// Insertion-ordered, two-space indented, doubles printed with %.17g so that
// re-running a command reproduces the report byte for byte. nlohmann::json
// stores objects sorted by key; reports want their natural field order, so
// emission is done by this small writer instead.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array(); // one element per line
    JsonWriter& begin_flat();  // elements on a single line (numeric rows)
    JsonWriter& end_array();
    JsonWriter& key(std::string_view k);

    JsonWriter& value(double x);
    JsonWriter& value(int x) { return value(static_cast<std::int64_t>(x)); }
    JsonWriter& value(std::int64_t x);
    JsonWriter& value(std::uint64_t x);
    JsonWriter& value(bool x);
    JsonWriter& value(std::string_view s);
    JsonWriter& value(const char* s) { return value(std::string_view(s)); }

    // key + scalar in one go
    template <class T>
    JsonWriter& field(std::string_view k, const T& x) {
        key(k);
        return value(x);
    }

    std::string take();

private:
    void separate();
    void newline();
    void open(char bracket, char kind);
    void close(char bracket);

    std::string out_;
    std::vector<char> stack_; // 'o' object, 'a' array, 'f' flat array
    bool first_ = true;       // no element written yet in the current scope
    bool after_key_ = false;
};

std::string format_double(double x); // %.17g, "null" for non-finite

// --- plain text artifacts ----------------------------------------------------

std::string to_csv(const std::vector<OscillationRecord>& records);
std::string to_csv(const TraceReport& report);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

// legacy VTK structured-points export (ASCII) for outside visualization
void save_vtk(const std::filesystem::path& path, const std::string& name, const VecField& u);
void save_vtk(const std::filesystem::path& path, const std::string& name, const NodalSymField& e);

} // namespace cellhom
