#pragma once

#include "camsic/weights.hpp"

namespace camsic::fixture {

/// Hand-set weights for the desk configuration. The networks reduce to:
///   analysis   y_c = 20 * (mean of the 16x16 block of colour c - 0.5) for c < 3,
///              zero in every other channel
///   synthesis  block-constant image from y_c / 20 + 0.5
///   hyper      all zero (the hyper-latent is always zero)
///   fusion     c = disparity prior
///   entropy    mu = u on colour channels; sigma = 6 where the token's
///              marker channel (d-1) is 1 and 1 where it is 0
/// The first-view embedding and the constant token carry marker = 1, while
/// real latents never do, so a coded neighbour view predicts the current one
/// tightly and the first view gets a broad zero-mean prior.
WeightStore make_fixture_weights();

}  // namespace camsic::fixture
