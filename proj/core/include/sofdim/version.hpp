#pragma once

namespace sofdim {

inline constexpr const char* kVersion = "0.1.0";
// Bumped whenever the layout of JSON reports or CSV tables changes.
inline constexpr int kReportSchemaVersion = 1;

}  // namespace sofdim
