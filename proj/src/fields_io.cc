#include "vortexlab/fields_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace vortexlab {

int dump_node_count(int genus, int resolution) {
    if (genus == 1) return resolution * resolution;
    if (genus == 0) return (resolution + 1) * (2 * resolution + 2);
    throw std::invalid_argument("field dump: unsupported genus");
}

static int surface_resolution(const Surface& g) {
    if (const auto* t = dynamic_cast<const TorusSurface*>(&g)) return t->n;
    if (const auto* s = dynamic_cast<const SphereSurface*>(&g)) return s->L;
    throw std::invalid_argument("field dump: unknown surface type");
}

void save_field(std::ostream& os, const Surface& g, const Field& u) {
    if ((int)u.size() != g.npts()) throw std::invalid_argument("save_field: size mismatch");
    os << "vortexlab-field v1 " << g.genus << ' ' << surface_resolution(g) << ' ';
    os.precision(17);
    os << g.volume << '\n';
    for (double v : u) os << v << '\n';
}

void save_field_file(const std::string& path, const Surface& g, const Field& u) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_field: cannot open " + path);
    save_field(os, g, u);
}

FieldDump load_field(std::istream& is) {
    std::string magic, version;
    FieldDump d;
    if (!(is >> magic >> version >> d.genus >> d.resolution >> d.volume) ||
        magic != "vortexlab-field" || version != "v1")
        throw std::runtime_error("load_field: bad header");
    const int n = dump_node_count(d.genus, d.resolution);
    d.values.resize(n);
    for (int i = 0; i < n; ++i)
        if (!(is >> d.values[i])) throw std::runtime_error("load_field: truncated value list");
    return d;
}

FieldDump load_field_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_field: cannot open " + path);
    return load_field(is);
}

Field take_field(const FieldDump& dump, const Surface& g) {
    if (dump.genus != g.genus || dump.resolution != surface_resolution(g) ||
        std::fabs(dump.volume - g.volume) > 1e-12 * g.volume)
        throw std::runtime_error("take_field: dump does not match the surface");
    return dump.values;
}

}  // namespace vortexlab
