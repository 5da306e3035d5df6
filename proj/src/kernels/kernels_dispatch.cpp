#include <cstdlib>
#include <string_view>

#include "fitzcal/kernels.hpp"

namespace fitzcal::kernels {

const KernelTable& active() {
  static const KernelTable& selected = [] () -> const KernelTable& {
    const char* env = std::getenv("FITZCAL_ISA");
    if (env != nullptr && std::string_view(env) == "scalar") {
      return scalar::table();
    }
    if (const KernelTable* t = avx2::table()) return *t;
    return scalar::table();
  }();
  return selected;
}

}  // namespace fitzcal::kernels
