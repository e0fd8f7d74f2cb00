#pragma once

#include <cstdint>
#include <string>

namespace policymc {

inline constexpr const char* kToolName = "policymc";
inline constexpr const char* kToolVersion = "0.1.0";

/// Run record written next to every produced artifact set. Hashes are
/// FNV-1a content hashes of the exact input files; empty when an input was
/// not used by the run.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command_line;
    std::string config_hash;
    std::string model_hash;
    std::string checkpoint_hash;
    std::uint64_t seed = 0;
    std::string started_at;  // ISO-8601 UTC
    std::string finished_at;
};

std::string iso_utc_now();

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

} // namespace policymc
