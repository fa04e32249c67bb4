//! LDPC decoding on a statically routed torus network-on-chip.
//!
//! [`codes`] loads parity-check matrices, [`decoder`] holds the golden
//! decoders, [`mapper`] partitions checks over the processing elements,
//! [`noc`] simulates one iteration on the torus and replays decoding on the
//! result, [`config`] turns a simulation into routing memories and plans code
//! switches, and [`channel`] measures error rates.

pub mod channel;
pub mod codes;
pub mod config;
pub mod decoder;
pub mod error;
pub mod mapper;
pub mod noc;
pub mod seed;

pub use error::{Error, Result};

use decoder::{FixedPoint, FloatingPoint, FloodingDecoder, LayeredDecoder};

/// The hardware model: saturating fixed-point layered min-sum.
pub type FixedLayeredDecoder<'h> = LayeredDecoder<'h, FixedPoint>;
/// Unquantized layered min-sum in double precision.
pub type FloatLayeredDecoder<'h> = LayeredDecoder<'h, FloatingPoint<f64>>;
pub type FloatLayeredDecoder32<'h> = LayeredDecoder<'h, FloatingPoint<f32>>;
/// Flooding sum-product in double precision.
pub type SpaDecoder<'h> = FloodingDecoder<'h, f64>;
pub type SpaDecoder32<'h> = FloodingDecoder<'h, f32>;
