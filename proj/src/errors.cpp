// SPDX-License-Identifier: Apache-2.0
#include "gfnm/errors.hpp"

namespace gfnm {

int exit_code(const std::exception& e) noexcept {
  if (dynamic_cast<const NumericFault*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const InputError*>(&e)) return 3;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const StateError*>(&e)) return 2;
  return 1;
}

}  // namespace gfnm
