//! Behavioral simulator for current-limited differential-readout (CuLD)
//! compute-in-memory arrays.
//!
//! A CuLD column is a stack of weight cells sharing one bias-current source
//! and a differential bit-line pair. Complementary PWM word lines steer each
//! cell's current between BL and BLB, current mirrors replicate the two line
//! currents onto a capacitor pair, and the final capacitor voltage difference
//! `V_x = V_xp - V_xn` is the signed multiply-accumulate result.
//!
//! The crate models three cell topologies (4T4R ReRAM, 4T2R ReRAM, 8T SRAM),
//! log-normal device variation with optional write-verify programming, an
//! event-driven exact charge integrator plus a fixed-timestep transient with
//! waveform capture, and the experiment harness (linearity sweeps, mismatch
//! comparison, row-count sweeps, Monte Carlo variation studies).
//!
//! All physics is generic over the scalar type through [`Real`]; `f64` is the
//! default precision and the one the concrete aliases below commit to.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub mod cell;
pub mod device;
pub mod encode;
pub mod engine;
pub mod experiment;

/// Scalar type the simulator computes in: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// One draw from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Shorthand for lossy conversion from an `f64` constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Errors shared across the simulator.
///
/// Numeric payloads are widened to `f64` so diagnostics stay uniform across
/// scalar instantiations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("target resistance {r_target:.6e} ohm outside window [{r_lrs:.6e}, {r_hrs:.6e}]")]
    OutOfWindow {
        r_target: f64,
        r_lrs: f64,
        r_hrs: f64,
    },
    #[error("{name} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("resistance pair ({r_p:.6e}, {r_n:.6e}) is not a consistent weight encoding (weight gap {delta_a:.3e})")]
    InconsistentPair { r_p: f64, r_n: f64, delta_a: f64 },
    #[error("SRAM cell weight must be +1 or -1, got {weight}")]
    InvalidSramWeight { weight: f64 },
    #[error("no conducting path: total array conductance is zero")]
    OpenCircuit,
    #[error("degenerate schedule: {reason}")]
    DegenerateSchedule { reason: &'static str },
    #[error("invalid experiment spec: {reason}")]
    InvalidSpec { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Widens a scalar for an error payload.
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

// f64-concrete aliases for the common library types.
pub type DeviceParams64 = device::DeviceParams<f64>;
pub type ReramDevice64 = device::ReramDevice<f64>;
pub type SwitchParams64 = device::SwitchParams<f64>;
pub type ProgramConfig64 = device::ProgramConfig<f64>;
pub type Cell64 = cell::CellInstance<f64>;
pub type BranchConductances64 = cell::BranchConductances<f64>;
pub type PwmSchedule64 = encode::PwmSchedule<f64>;
pub type ReadoutConfig64 = engine::ReadoutConfig<f64>;
pub type ArrayState64 = engine::ArrayState<f64>;
pub type MacResult64 = engine::MacResult<f64>;
pub type Waveform64 = engine::Waveform<f64>;
pub type ExperimentSpec64 = experiment::ExperimentSpec<f64>;
