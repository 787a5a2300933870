#pragma once

// Binary field files: row-major complex pairs as little-endian float64,
// one grid-sized block per stored monomial, plus a JSON sidecar
// "<path>.json" with N, degree, bidegree and the monomial masks in file order.

#include "hsw/base_form.hpp"

#include <filesystem>

namespace hsw::io {

void write_form(const std::filesystem::path& path, const BaseForm& f);
BaseForm read_form(const std::filesystem::path& path);

void write_field(const std::filesystem::path& path, const ScalarField& f);
ScalarField read_field(const std::filesystem::path& path);

/// Writes bytes to a temp file next to path and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace hsw::io
