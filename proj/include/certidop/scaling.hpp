#pragma once

#include "certidop/types.hpp"

namespace certidop {

/// Returns a scaled copy: positions * length_scale, velocities / Doppler /
/// sigmas * rate_scale. Throws std::logic_error if the set is already scaled.
MeasurementSet apply_scaling(const MeasurementSet& data, const ScalingConfig& config);

/// Inverse of apply_scaling; throws std::logic_error on unscaled input.
MeasurementSet invert_scaling(const MeasurementSet& data, const ScalingConfig& config);

ReceiverState scale_receiver(const ReceiverState& receiver, const ScalingConfig& config);
ReceiverState unscale_receiver(const ReceiverState& receiver, const ScalingConfig& config);

}  // namespace certidop
