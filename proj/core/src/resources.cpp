#include "humbench/resources.hpp"

#include <map>

#include "humbench/error.hpp"

namespace humbench::detail {
const std::map<std::string, std::string_view>& embedded_resources();
}

namespace humbench::resources {

std::string_view get(std::string_view path) {
    const auto& table = detail::embedded_resources();
    auto it = table.find(std::string(path));
    if (it == table.end()) throw NotFound("no embedded resource '" + std::string(path) + "'");
    return it->second;
}

bool has(std::string_view path) {
    return detail::embedded_resources().contains(std::string(path));
}

std::vector<std::string> list() {
    std::vector<std::string> out;
    for (const auto& [k, v] : detail::embedded_resources()) out.push_back(k);
    return out;
}

}  // namespace humbench::resources
