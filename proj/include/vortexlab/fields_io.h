/// Text serialization of grid fields:
///   vortexlab-field v1 <genus> <n-or-L> <V>
/// followed by one value per line in row-major node order, 17 significant
/// digits. Readable back into any surface with matching discretization.

#pragma once

#include "vortexlab/geometry.h"

#include <iosfwd>
#include <string>

namespace vortexlab {

struct FieldDump {
    int genus = 0;
    int resolution = 0;  // torus n or sphere band limit L
    double volume = 0.0;
    Field values;
};

void save_field(std::ostream& os, const Surface& g, const Field& u);
void save_field_file(const std::string& path, const Surface& g, const Field& u);

FieldDump load_field(std::istream& is);
FieldDump load_field_file(const std::string& path);

// Node count implied by a dump header (n^2 on the torus, (L+1)(2L+2) on the
// sphere); load_field validates the value list against it.
int dump_node_count(int genus, int resolution);

// Checks the dump against a concrete surface and hands back the field.
Field take_field(const FieldDump& dump, const Surface& g);

}  // namespace vortexlab
