#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace dclab::detail {

/// (file name, contents) for every file under core/data/demo.
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_demo_files();

}  // namespace dclab::detail
