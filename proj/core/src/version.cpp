#include "ivfe/version.hpp"

namespace ivfe {

std::string_view version() noexcept { return IVFE_VERSION; }

}  // namespace ivfe
