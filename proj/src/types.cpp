#include "certidop/types.hpp"

#include <sstream>

namespace certidop {

void validate_pairing(const std::vector<SatelliteState>& satellites,
                      const std::vector<DopplerMeasurement>& measurements) {
  if (satellites.size() != measurements.size()) {
    std::ostringstream msg;
    msg << "pairing error: " << satellites.size() << " satellite states vs "
        << measurements.size() << " measurements";
    throw std::invalid_argument(msg.str());
  }
  for (std::size_t i = 0; i < satellites.size(); ++i) {
    if (satellites[i].sat_id != measurements[i].sat_id ||
        satellites[i].epoch != measurements[i].epoch) {
      std::ostringstream msg;
      msg << "pairing error at index " << i << ": satellite (" << satellites[i].sat_id << ", "
          << satellites[i].epoch << ") vs measurement (" << measurements[i].sat_id << ", "
          << measurements[i].epoch << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  if (measurements.size() < 4) {
    std::ostringstream msg;
    msg << "underdetermined: " << measurements.size() << " measurements, need at least 4";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace certidop
