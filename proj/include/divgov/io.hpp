#pragma once

#include "divgov/types.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace divgov {

/// Full-precision text form (17 significant digits) so files re-read
/// bit-consistently.
std::string format_full(double v);

/// FNV-1a 64-bit hash, hex-encoded; used for config fingerprints.
std::string fnv1a_hex(const std::string& data);

/// Flat key=value config file ('#' starts a comment). Unknown keys are the
/// caller's responsibility to reject.
std::map<std::string, std::string> read_config_file(const std::string& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

/// Writes manifest.json into `dir`: command, effective config, its hash and
/// produced files.
void write_manifest(const std::string& dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& config,
                    const std::vector<std::string>& files);

}  // namespace divgov
