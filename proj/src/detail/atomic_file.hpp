#pragma once

#include <string>
#include <string_view>

namespace conoflow::detail {

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partial file.
void write_atomic(const std::string& path, std::string_view bytes);

}  // namespace conoflow::detail
