#pragma once

#include <stdexcept>
#include <string>

#include "sqlab/estimator.hpp"
#include "sqlab/field.hpp"
#include "sqlab/signal.hpp"
#include "sqlab/sparse.hpp"

namespace sqlab {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal that round-trips the double; keeps emitted bytes
// deterministic for fixed input.
std::string format_double(double x);

// Text format: "# sqlab-signal n=<n> J=<J> K=<K>" then one value per line.
std::string signal_csv(const Signal& f);
Signal signal_from_csv(const std::string& text);

// Binary format, little-endian: magic "SQLABSIG", u32 n/J/K (two's
// complement), u64 count, then 64-bit IEEE values. Fields add the t-grid
// after the magic "SQLABFLD": u32 L, f64 t_min, f64 ratio.
std::string signal_bytes(const Signal& f);
Signal signal_from_bytes(const std::string& bytes);
std::string field_bytes(const Field& F);
Field field_from_bytes(const std::string& bytes);

// JSON object {"n", "grid", "level", "index", "dilation"}.
std::string cube_json(const Cube& q);
Cube cube_from_json(const std::string& text);

// JSON object {"root", "origin", "levels"} with an optional "certificate"
// block; levels is an array of arrays of cubes.
std::string family_json(const SparseFamily& S, const SparseCertificate* cert = nullptr);
SparseFamily family_from_json(const std::string& text);

// One row per scan point, comment header with metadata and the fit.
std::string scan_csv(const ScanResult& r);
std::string scan_json(const ScanResult& r);

void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace sqlab
