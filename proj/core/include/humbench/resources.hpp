#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace humbench::resources {

// Resource files compiled into the library (prompt templates, default codebook),
// addressed by their path under core/resources/.
std::string_view get(std::string_view path);
bool has(std::string_view path);
std::vector<std::string> list();

}  // namespace humbench::resources
