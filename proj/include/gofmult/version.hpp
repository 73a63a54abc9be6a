#pragma once

#ifndef GOFMULT_VERSION
#define GOFMULT_VERSION "0.1.0"
#endif

namespace gofmult {

inline constexpr const char* kVersion = GOFMULT_VERSION;

}  // namespace gofmult
