#pragma once

namespace fhlab {

inline constexpr const char* kVersion = "0.1.0";

// Bumped independently when a module's numerical behaviour changes, so that
// archived reports can be matched to the code that produced them.
inline constexpr const char* kKernelVersion = "kernel/0.1.0";
inline constexpr const char* kFieldsVersion = "fields/0.1.0";
inline constexpr const char* kSolverVersion = "solver/0.1.0";
inline constexpr const char* kSeminormsVersion = "seminorms/0.1.0";
inline constexpr const char* kRegularityVersion = "regularity/0.1.0";

}  // namespace fhlab
