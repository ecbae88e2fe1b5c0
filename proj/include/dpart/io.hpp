#pragma once

#include <string>

namespace dpart {

std::string read_text_file(const std::string& path);

// Writes to a sibling temp file and renames into place, so failures never
// leave a partial file behind.
void atomic_write_text_file(const std::string& path, const std::string& content);

}  // namespace dpart
