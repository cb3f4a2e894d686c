#include "tnl/mc.hpp"

#include <thread>

namespace tnl {

int default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace tnl
