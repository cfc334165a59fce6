#ifndef SPALF_IO_HPP
#define SPALF_IO_HPP

#include <cstdint>
#include <string>

#include "spalf/model.hpp"
#include "spalf/path.hpp"
#include "spalf/step_law.hpp"

namespace spalf {

// Model configuration: keys d, drift (row-major d x d), q (length d), jumps
// (per column: array of {rate, delta} or {rate, units} on the lattice), optional k.
// Lattice models serialize their converted form (drift already folded into jump
// streams), so write-then-read is field-for-field identical.
std::string model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const std::string& text);

// Step laws keep exact rational probabilities as "p/q" strings.
std::string step_law_to_json(const StepLaw& law);
StepLaw step_law_from_json(const std::string& text);

// Golden-test path serialization: exact integers for lattice deltas.
std::string path_to_json(const PathBundle& path);
PathBundle path_from_json(const std::string& text);

// FNV-1a content hash of the canonical serialized form, for report provenance.
std::uint64_t model_hash(const ModelSpec& model);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace spalf

#endif
