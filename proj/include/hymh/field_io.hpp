#pragma once

#include "hymh/fields.hpp"

#include <string>

namespace hymh {

/// Flat little-endian binary layout:
///   "HYMF", u32 version, u32 n, u32 N, 2n x f64 periods, u32 dtype (1 = complex128),
///   u32 rank, then per point an r x r block in row-major order of (re, im) f64 pairs.
/// Scalar fields are stored with rank 1.
void write_field(const std::string& path, const MatrixField& field);
void write_field(const std::string& path, const ScalarField& field);
MatrixField read_matrix_field(const std::string& path);
ScalarField read_scalar_field(const std::string& path);

}  // namespace hymh
