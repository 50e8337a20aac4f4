// Run manifests: every CLI command records its resolved parameters so a run
// can be replayed byte-for-byte.
#ifndef URABOUND_MANIFEST_HPP
#define URABOUND_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace urabound::manifest {

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);
std::uint64_t file_checksum(const std::string& path);
std::string file_checksum_hex(const std::string& path);

struct RunManifest {
    std::string command;
    nlohmann::json params;             // fully resolved settings, flags merged
    std::vector<std::string> outputs;  // paths written by the run
    std::string checksum;              // fnv1a64 over command+params+outputs

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);

    void write(const std::string& path) const;
    static RunManifest load(const std::string& path);
};

// Fills in the checksum from the other fields.
void seal(RunManifest& m);

}  // namespace urabound::manifest

#endif
