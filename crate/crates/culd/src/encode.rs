//! Weight and input encodings.
//!
//! Signed weights map to differential resistance pairs whose parallel
//! composite is the same for every weight, so a fixed bias current splits
//! between BL and BLB in a weight-proportional way. Signed inputs map to
//! complementary PWM pulse widths.

use crate::{to_f64, Error, Real, Result};

/// Default tolerance for deciding a resistance pair still encodes one weight.
pub const PAIR_TOLERANCE: f64 = 1e-9;

/// A weight with the resistance pair that realizes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightCode<T> {
    /// Signed weight in [-1, 1].
    pub a: T,
    /// Resistance steering current to BL during WL (ohm).
    pub r_p: T,
    /// Resistance steering current to BLB during WL (ohm).
    pub r_n: T,
}

/// Which phase a schedule starts with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseOrder {
    WlFirst,
    WlbFirst,
}

/// Per-row complementary PWM activation over one evaluation period.
///
/// Row `i` drives WL for `widths[i]` and WLB for the remainder of `x_max`;
/// exactly one of the two is active at any instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PwmSchedule<T> {
    x_max: T,
    widths: Vec<T>,
    order: PhaseOrder,
}

impl<T: Real> PwmSchedule<T> {
    pub fn new(widths: Vec<T>, x_max: T, order: PhaseOrder) -> Result<Self> {
        if !(x_max > T::zero()) || !x_max.is_finite() {
            return Err(Error::DegenerateSchedule {
                reason: "x_max must be positive",
            });
        }
        if widths.is_empty() {
            return Err(Error::DegenerateSchedule {
                reason: "schedule has no rows",
            });
        }
        for &w in &widths {
            if !(w >= T::zero()) || w > x_max {
                return Err(Error::OutOfRange {
                    name: "pulse width",
                    value: to_f64(w),
                    lo: 0.0,
                    hi: to_f64(x_max),
                });
            }
        }
        Ok(Self {
            x_max,
            widths,
            order,
        })
    }

    /// Builds a schedule from dimensionless inputs in [-1, 1].
    pub fn from_inputs(inputs: &[T], x_max: T, order: PhaseOrder) -> Result<Self> {
        let widths = inputs
            .iter()
            .map(|&x| input_to_pwm(x, x_max))
            .collect::<Result<Vec<_>>>()?;
        Self::new(widths, x_max, order)
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    pub fn order(&self) -> PhaseOrder {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.widths.len()
    }

    /// The phase row `row` presents at time `t` (right-open intervals).
    pub fn phase_at(&self, row: usize, t: T) -> crate::cell::Phase {
        use crate::cell::Phase;
        let w = self.widths[row];
        match self.order {
            PhaseOrder::WlFirst => {
                if t < w {
                    Phase::Wl
                } else {
                    Phase::Wlb
                }
            }
            PhaseOrder::WlbFirst => {
                if t < self.x_max - w {
                    Phase::Wlb
                } else {
                    Phase::Wl
                }
            }
        }
    }

    /// Strictly interior instants where some row changes phase, sorted and
    /// deduplicated.
    pub fn switch_times(&self) -> Vec<T> {
        let mut times: Vec<T> = self
            .widths
            .iter()
            .map(|&w| match self.order {
                PhaseOrder::WlFirst => w,
                PhaseOrder::WlbFirst => self.x_max - w,
            })
            .filter(|&t| t > T::zero() && t < self.x_max)
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite switch times"));
        times.dedup();
        times
    }
}

/// Maps a signed weight onto its differential resistance pair.
///
/// `r_p` carries the weight-proportional excess conductance toward BL and
/// `r_n` its complement; their parallel composite equals
/// `r_hrs * r_lrs / (r_hrs + r_lrs)` for every weight, which is what keeps the
/// array's total current independent of the stored pattern.
pub fn weight_to_resistances<T: Real>(a: T, r_hrs: T, r_lrs: T) -> Result<(T, T)> {
    if !(r_lrs > T::zero()) || !(r_hrs > r_lrs) {
        return Err(Error::InvalidParameter {
            name: "resistance window",
            value: to_f64(r_hrs),
        });
    }
    check_range("weight", a, -T::one(), T::one())?;
    let sum = r_hrs + r_lrs;
    let diff = r_hrs - r_lrs;
    let num = T::two() * r_hrs * r_lrs;
    let r_p = num / (sum + a * diff);
    let r_n = num / (sum - a * diff);
    Ok((r_p, r_n))
}

/// Recovers the weight a resistance pair encodes.
///
/// Fails with [`Error::InconsistentPair`] when the two resistances do not
/// agree on a single weight within `tol`, which is the signature of
/// programming variation rather than an encoding bug.
pub fn resistances_to_weight<T: Real>(r_p: T, r_n: T, r_hrs: T, r_lrs: T, tol: T) -> Result<T> {
    if !(r_lrs > T::zero()) || !(r_hrs > r_lrs) {
        return Err(Error::InvalidParameter {
            name: "resistance window",
            value: to_f64(r_hrs),
        });
    }
    let product = r_hrs * r_lrs;
    let half_sum = (r_hrs + r_lrs) / T::two();
    let half_diff = (r_hrs - r_lrs) / T::two();
    let a_from = |r: T| (product / r - half_sum) / half_diff;
    let a_p = a_from(r_p);
    let a_n = -a_from(r_n);
    let delta = (a_p - a_n).abs();
    if delta > tol {
        return Err(Error::InconsistentPair {
            r_p: to_f64(r_p),
            r_n: to_f64(r_n),
            delta_a: to_f64(delta),
        });
    }
    let a = (a_p + a_n) / T::two();
    if a.abs() > T::one() + tol {
        return Err(Error::InconsistentPair {
            r_p: to_f64(r_p),
            r_n: to_f64(r_n),
            delta_a: to_f64(a.abs() - T::one()),
        });
    }
    Ok(a.max(-T::one()).min(T::one()))
}

/// Pulse width encoding a signed input: `X = (x + 1) * x_max / 2`.
pub fn input_to_pwm<T: Real>(x: T, x_max: T) -> Result<T> {
    check_range("input", x, -T::one(), T::one())?;
    if !(x_max > T::zero()) {
        return Err(Error::DegenerateSchedule {
            reason: "x_max must be positive",
        });
    }
    Ok((x + T::one()) * x_max / T::two())
}

/// Inverse of [`input_to_pwm`]: `x = (2X - x_max) / x_max`.
pub fn pwm_to_input<T: Real>(width: T, x_max: T) -> Result<T> {
    if !(x_max > T::zero()) {
        return Err(Error::DegenerateSchedule {
            reason: "x_max must be positive",
        });
    }
    check_range("pulse width", width, T::zero(), x_max)?;
    Ok((T::two() * width - x_max) / x_max)
}

/// Snaps a weight to the nearest point of a uniform grid over [-1, 1].
///
/// Ties round away from zero; an exact tie across zero (even level counts
/// only) resolves positive.
pub fn quantize_weight<T: Real>(a: T, levels: usize) -> Result<T> {
    if levels < 2 {
        return Err(Error::InvalidParameter {
            name: "levels",
            value: levels as f64,
        });
    }
    let steps = T::of((levels - 1) as f64);
    let grid = |k: usize| -T::one() + T::two() * T::of(k as f64) / steps;
    let pos = (a + T::one()) * steps / T::two();
    let lo = pos.floor().max(T::zero()).min(steps);
    let k_lo = lo.to_usize().unwrap_or(0).min(levels - 1);
    let k_hi = (k_lo + 1).min(levels - 1);
    let (v_lo, v_hi) = (grid(k_lo), grid(k_hi));
    let (d_lo, d_hi) = ((a - v_lo).abs(), (a - v_hi).abs());
    let v = if d_lo < d_hi {
        v_lo
    } else if d_hi < d_lo {
        v_hi
    } else if v_hi.abs() > v_lo.abs() {
        v_hi
    } else if v_lo.abs() > v_hi.abs() {
        v_lo
    } else {
        v_hi.max(v_lo)
    };
    Ok(v)
}

fn check_range<T: Real>(name: &'static str, value: T, lo: T, hi: T) -> Result<()> {
    if value < lo || value > hi || !value.is_finite() {
        return Err(Error::OutOfRange {
            name,
            value: to_f64(value),
            lo: to_f64(lo),
            hi: to_f64(hi),
        });
    }
    Ok(())
}
