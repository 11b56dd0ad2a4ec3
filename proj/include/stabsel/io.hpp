#pragma once

#include "stabsel/stability.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace stabsel {

/// Writes every file to a temporary sibling first and renames them into place
/// only once all writes succeeded, so a failure leaves no partial output.
void write_files(const std::vector<std::pair<std::filesystem::path, std::string>>& files);
void write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Stability paths as static SVG: one <path> per variable (stable ones drawn
/// in colour), a single <line> at pi_thr, and the lambda window shaded.
std::string stability_svg(const FrequencyMatrix& freq, const StabilityResult& result,
                          const std::vector<std::string>& names);

/// Stable set listing: variable, max frequency over the window, stable flag.
std::string stable_set_tsv(const StabilityResult& result, const std::vector<std::string>& names);

}  // namespace stabsel
