#include "aircast/types.hpp"

namespace aircast {

AlertLevel level_from_index(int index) {
  if (index < 0 || index >= kNumLevels)
    throw InvalidArgument("alert level out of range: " + std::to_string(index));
  return static_cast<AlertLevel>(index);
}

const char* to_string(AlertLevel level) {
  switch (level) {
    case AlertLevel::NoAlert: return "no-alert";
    case AlertLevel::PreWarning: return "pre-warning";
    case AlertLevel::Warning: return "warning";
    case AlertLevel::Alert: return "alert";
  }
  throw InvalidArgument("unknown alert level");
}

Block block_from_index(int index) {
  if (index < 1 || index > 4)
    throw InvalidArgument("block out of range: " + std::to_string(index));
  return static_cast<Block>(index);
}

}  // namespace aircast
