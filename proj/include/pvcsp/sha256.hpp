#pragma once

#include <string>
#include <string_view>

namespace pvcsp {

// Hex digest of SHA-256 over the bytes of `data`. Self-contained FIPS 180-4
// implementation; used for canonical color encodings, which are compared as
// opaque strings and cross-checked against their structural definitions.
std::string sha256_hex(std::string_view data);

} // namespace pvcsp
