#pragma once

namespace ilwlab {

inline constexpr const char* kVersionTag = "ilwlab 0.1.0";
inline constexpr int kReportSchemaVersion = 1;

} // namespace ilwlab
