#pragma once

#define MFES_HB_VERSION "0.1.0"

namespace mfes {

inline const char* version() { return MFES_HB_VERSION; }

}  // namespace mfes
