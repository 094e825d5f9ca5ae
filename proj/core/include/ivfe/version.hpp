#pragma once

#include <string_view>

namespace ivfe {

[[nodiscard]] std::string_view version() noexcept;

}  // namespace ivfe
