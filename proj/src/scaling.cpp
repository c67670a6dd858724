#include "certidop/scaling.hpp"

#include <stdexcept>

namespace certidop {

namespace {
void check_config(const ScalingConfig& config) {
  if (!(config.length_scale > 0.0) || !(config.rate_scale > 0.0)) {
    throw std::invalid_argument("scaling factors must be strictly positive");
  }
}
}  // namespace

MeasurementSet apply_scaling(const MeasurementSet& data, const ScalingConfig& config) {
  check_config(config);
  if (data.scaled) {
    throw std::logic_error("apply_scaling: data already scaled");
  }
  MeasurementSet out = data;
  for (auto& sat : out.satellites) {
    sat.position *= config.length_scale;
    sat.velocity *= config.rate_scale;
  }
  for (auto& m : out.measurements) {
    m.value *= config.rate_scale;
    m.sigma *= config.rate_scale;
  }
  out.scaled = true;
  return out;
}

MeasurementSet invert_scaling(const MeasurementSet& data, const ScalingConfig& config) {
  check_config(config);
  if (!data.scaled) {
    throw std::logic_error("invert_scaling: data is not scaled");
  }
  MeasurementSet out = data;
  for (auto& sat : out.satellites) {
    sat.position /= config.length_scale;
    sat.velocity /= config.rate_scale;
  }
  for (auto& m : out.measurements) {
    m.value /= config.rate_scale;
    m.sigma /= config.rate_scale;
  }
  out.scaled = false;
  return out;
}

ReceiverState scale_receiver(const ReceiverState& receiver, const ScalingConfig& config) {
  check_config(config);
  ReceiverState out = receiver;
  out.position *= config.length_scale;
  out.velocity *= config.rate_scale;
  out.clock_drift_term *= config.rate_scale;
  return out;
}

ReceiverState unscale_receiver(const ReceiverState& receiver, const ScalingConfig& config) {
  check_config(config);
  ReceiverState out = receiver;
  out.position /= config.length_scale;
  out.velocity /= config.rate_scale;
  out.clock_drift_term /= config.rate_scale;
  return out;
}

}  // namespace certidop
