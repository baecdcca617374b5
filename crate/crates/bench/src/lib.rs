//! Fixtures shared by the benchmarks.

use iomarkov_core::synth::wiot_like;
use iomarkov_core::FlowNetwork;

/// WIOD-sized network: 41 economies of 35 industries plus a government node.
pub fn full_size() -> FlowNetwork {
    wiot_like(41, 35, 2011, 2011)
}

/// Smaller networks of the same shape, `economies * 36` nodes.
pub fn scaled(economies: usize) -> FlowNetwork {
    wiot_like(economies, 35, 2011, 2011)
}
