#ifndef CHEMOSTAT_VERSION_HPP
#define CHEMOSTAT_VERSION_HPP

namespace chemostat {

inline constexpr const char* kArtifactVersion = "0.1.0";

} // namespace chemostat

#endif
