#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace eventlens {

/// Writes through a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

/// Shortest text that round-trips `v`; empty for NaN.
std::string format_number(double v);

}  // namespace eventlens
