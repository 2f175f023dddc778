#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace dclab::detail {

/// (part name, fixture JSON) for every model under core/data/parts.
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_part_fixtures();

}  // namespace dclab::detail
