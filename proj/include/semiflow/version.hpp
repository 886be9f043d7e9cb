#ifndef SEMIFLOW_VERSION_HPP
#define SEMIFLOW_VERSION_HPP

namespace semiflow {
inline constexpr const char* kVersion = "1.0.0";
}

#endif
