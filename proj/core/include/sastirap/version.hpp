#pragma once

namespace sastirap {

// Library version string, e.g. "0.1.0".
const char* version();

}  // namespace sastirap
