#pragma once

namespace qsvm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qsvm
