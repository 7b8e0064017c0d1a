//! Resistive devices and switch branches.
//!
//! A ReRAM device is reduced to one programmed conductance plus a statistical
//! variation model; the 8T SRAM pull path is reduced to an on/off conductance
//! pair. Programming is a behavioral write-verify loop: redraw the conductance
//! until it lands within tolerance of the target or the iteration budget runs
//! out.

use rand::Rng;

use crate::{to_f64, Error, Real, Result};

/// Statistical model for programmed-conductance spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationModel {
    /// Multiplicative: `g = g_nominal * exp(sigma * z)`. Strictly positive.
    LogNormal,
    /// Additive relative: `g = g_nominal * (1 + sigma * z)`, redrawn while
    /// the factor is non-positive.
    TruncatedNormal,
}

impl VariationModel {
    /// Draws one conductance around `g_nominal` with relative spread `sigma_rel`.
    pub fn sample<T: Real, R: Rng + ?Sized>(
        self,
        g_nominal: T,
        sigma_rel: T,
        rng: &mut R,
    ) -> Result<T> {
        if g_nominal <= T::zero() || !g_nominal.is_finite() {
            return Err(Error::InvalidParameter {
                name: "g_nominal",
                value: to_f64(g_nominal),
            });
        }
        if sigma_rel < T::zero() {
            return Err(Error::InvalidParameter {
                name: "sigma_rel",
                value: to_f64(sigma_rel),
            });
        }
        let g = match self {
            VariationModel::LogNormal => {
                let z = T::standard_normal(rng);
                g_nominal * (sigma_rel * z).exp()
            }
            VariationModel::TruncatedNormal => loop {
                let z = T::standard_normal(rng);
                let factor = T::one() + sigma_rel * z;
                if factor > T::zero() {
                    break g_nominal * factor;
                }
            },
        };
        Ok(g)
    }
}

/// Nominal device window and variation for one ReRAM population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams<T> {
    /// High-resistance-state resistance (ohm).
    pub r_hrs: T,
    /// Low-resistance-state resistance (ohm).
    pub r_lrs: T,
    /// Relative conductance spread (dimensionless).
    pub sigma_rel: T,
    /// Access-switch on-resistance in series with the device (ohm, 0 = ideal).
    pub series_r_on: T,
    /// Spread distribution.
    pub variation: VariationModel,
}

impl<T: Real> DeviceParams<T> {
    pub fn new(r_lrs: T, r_hrs: T, sigma_rel: T) -> Self {
        Self {
            r_hrs,
            r_lrs,
            sigma_rel,
            series_r_on: T::zero(),
            variation: VariationModel::LogNormal,
        }
    }

    /// The 50 kOhm / 150 kOhm default window with the default 0.5 spread.
    pub fn default_window() -> Self {
        Self::new(T::of(50e3), T::of(150e3), T::of(0.5))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_lrs > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "r_lrs",
                value: to_f64(self.r_lrs),
            });
        }
        if !(self.r_hrs > self.r_lrs) {
            return Err(Error::InvalidParameter {
                name: "r_hrs",
                value: to_f64(self.r_hrs),
            });
        }
        if self.sigma_rel < T::zero() {
            return Err(Error::InvalidParameter {
                name: "sigma_rel",
                value: to_f64(self.sigma_rel),
            });
        }
        if self.series_r_on < T::zero() {
            return Err(Error::InvalidParameter {
                name: "series_r_on",
                value: to_f64(self.series_r_on),
            });
        }
        Ok(())
    }
}

impl<T: Real> Default for DeviceParams<T> {
    fn default() -> Self {
        Self::default_window()
    }
}

/// On/off conductances of a switch branch (8T SRAM pull path).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchParams<T> {
    /// Conducting-branch conductance (S).
    pub g_on: T,
    /// Leakage conductance of the off branch (S).
    pub g_off: T,
}

impl<T: Real> SwitchParams<T> {
    pub fn new(g_on: T, g_off: T) -> Result<Self> {
        if !(g_off >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "g_off",
                value: to_f64(g_off),
            });
        }
        if !(g_on > g_off) {
            return Err(Error::InvalidParameter {
                name: "g_on",
                value: to_f64(g_on),
            });
        }
        Ok(Self { g_on, g_off })
    }
}

impl<T: Real> Default for SwitchParams<T> {
    /// 50 uS on, 1 nS leakage: keeps single-cell currents in the uA range.
    fn default() -> Self {
        Self {
            g_on: T::of(50e-6),
            g_off: T::of(1e-9),
        }
    }
}

/// Write-verify settings for [`program_device`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgramConfig<T> {
    /// Relative conductance tolerance that counts as verified.
    pub verify_tol: T,
    /// Maximum program-verify attempts.
    pub max_iters: usize,
}

impl<T: Real> ProgramConfig<T> {
    /// Single draw, no verification: the raw device spread is left in place.
    pub fn open_loop() -> Self {
        Self {
            verify_tol: T::infinity(),
            max_iters: 1,
        }
    }

    /// Iterative write-verify to the given relative tolerance.
    pub fn write_verify(verify_tol: T, max_iters: usize) -> Self {
        Self {
            verify_tol,
            max_iters,
        }
    }
}

impl<T: Real> Default for ProgramConfig<T> {
    fn default() -> Self {
        Self::open_loop()
    }
}

/// One programmed resistive device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReramDevice<T> {
    /// Target conductance the write aimed for (S).
    pub g_target: T,
    /// Conductance actually left on the device (S).
    pub g_actual: T,
    /// Program-verify attempts consumed (0 for directly constructed devices).
    pub program_attempts: usize,
    /// Whether the final draw met the verify tolerance.
    pub verified: bool,
    /// Series access resistance folded into reads (ohm).
    pub series_r_on: T,
}

impl<T: Real> ReramDevice<T> {
    /// A device sitting exactly on `g` with no series resistance.
    pub fn ideal(g: T) -> Self {
        Self {
            g_target: g,
            g_actual: g,
            program_attempts: 0,
            verified: true,
            series_r_on: T::zero(),
        }
    }

    /// A device set exactly to resistance `r`.
    pub fn ideal_resistance(r: T) -> Self {
        Self::ideal(r.recip())
    }

    /// Conductance seen from the branch, series access resistance included.
    pub fn effective_conductance(&self) -> T {
        if self.series_r_on > T::zero() {
            (self.g_actual.recip() + self.series_r_on).recip()
        } else {
            self.g_actual
        }
    }
}

/// Draws one conductance around `g_nominal` with log-normal relative spread.
///
/// Deterministic for a given RNG state and strictly positive for any finite
/// `sigma_rel`.
pub fn sample_conductance<T: Real, R: Rng + ?Sized>(
    g_nominal: T,
    sigma_rel: T,
    rng: &mut R,
) -> Result<T> {
    VariationModel::LogNormal.sample(g_nominal, sigma_rel, rng)
}

// Window bounds are compared with a small relative slack so targets computed
// from the weight encoding, which land exactly on r_lrs/r_hrs up to rounding,
// always pass.
const WINDOW_SLACK: f64 = 1e-9;

/// Programs a device to `g_target` with a behavioral write-verify loop.
///
/// Each attempt is an independent redraw from the variation model; the loop
/// stops at the first draw within `cfg.verify_tol` of the target. Exhausting
/// `cfg.max_iters` returns the last draw with `verified == false` rather than
/// failing, so the caller decides whether an unverified device is acceptable.
pub fn program_device<T: Real, R: Rng + ?Sized>(
    g_target: T,
    params: &DeviceParams<T>,
    cfg: &ProgramConfig<T>,
    rng: &mut R,
) -> Result<ReramDevice<T>> {
    params.validate()?;
    if g_target <= T::zero() || !g_target.is_finite() {
        return Err(Error::InvalidParameter {
            name: "g_target",
            value: to_f64(g_target),
        });
    }
    if !(cfg.verify_tol > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "verify_tol",
            value: to_f64(cfg.verify_tol),
        });
    }
    if cfg.max_iters == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iters",
            value: 0.0,
        });
    }
    let r_target = g_target.recip();
    let slack = T::of(WINDOW_SLACK);
    if r_target < self_lo(params.r_lrs, slack) || r_target > self_hi(params.r_hrs, slack) {
        return Err(Error::OutOfWindow {
            r_target: to_f64(r_target),
            r_lrs: to_f64(params.r_lrs),
            r_hrs: to_f64(params.r_hrs),
        });
    }

    let mut g = g_target;
    let mut attempts = 0;
    let mut verified = false;
    while attempts < cfg.max_iters {
        g = params.variation.sample(g_target, params.sigma_rel, rng)?;
        attempts += 1;
        if ((g - g_target) / g_target).abs() <= cfg.verify_tol {
            verified = true;
            break;
        }
    }

    Ok(ReramDevice {
        g_target,
        g_actual: g,
        program_attempts: attempts,
        verified,
        series_r_on: params.series_r_on,
    })
}

fn self_lo<T: Real>(bound: T, slack: T) -> T {
    bound * (T::one() - slack)
}

fn self_hi<T: Real>(bound: T, slack: T) -> T {
    bound * (T::one() + slack)
}

/// Current through the device at read voltage `v_read`.
pub fn read_device<T: Real>(device: &ReramDevice<T>, v_read: T) -> Result<T> {
    if v_read < T::zero() {
        return Err(Error::InvalidParameter {
            name: "v_read",
            value: to_f64(v_read),
        });
    }
    Ok(device.effective_conductance() * v_read)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_relative_eq, relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_variation_is_identity() {
        let g = sample_conductance(20e-6, 0.0, &mut rng(7)).unwrap();
        assert_eq!(g, 20e-6);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = sample_conductance(20e-6, 0.5, &mut rng(1234)).unwrap();
        let b = sample_conductance(20e-6, 0.5, &mut rng(1234)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rejects_non_positive_nominal() {
        assert!(matches!(
            sample_conductance(0.0, 0.5, &mut rng(0)),
            Err(Error::InvalidParameter { name: "g_nominal", .. })
        ));
        assert!(matches!(
            sample_conductance(-1e-6, 0.5, &mut rng(0)),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn log_spread_matches_sigma() {
        // std of ln(g / g_nominal) over 1e5 draws recovers sigma_rel within 2%.
        let mut r = rng(99);
        let n = 100_000;
        let sigma = 0.5f64;
        let logs: Vec<f64> = (0..n)
            .map(|_| sample_conductance(20e-6, sigma, &mut r).unwrap() / 20e-6)
            .map(f64::ln)
            .collect();
        let mean = logs.iter().sum::<f64>() / n as f64;
        let var = logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        assert!((std - sigma).abs() / sigma < 0.02, "std = {std}");
        assert!(mean.abs() < 0.01, "mean = {mean}");
    }

    #[test]
    fn sampled_conductance_stays_positive() {
        let mut r = rng(5);
        for model in [VariationModel::LogNormal, VariationModel::TruncatedNormal] {
            for _ in 0..10_000 {
                let g = model.sample(20e-6, 2.0, &mut r).unwrap();
                assert!(g > 0.0);
            }
        }
    }

    #[test]
    fn program_without_variation_verifies_first_try() {
        let params = DeviceParams::new(50e3, 150e3, 0.0);
        let dev = program_device(
            1.0 / 50e3,
            &params,
            &ProgramConfig::write_verify(0.05, 20),
            &mut rng(0),
        )
        .unwrap();
        assert_eq!(dev.g_actual, 20e-6);
        assert_eq!(dev.program_attempts, 1);
        assert!(dev.verified);
    }

    #[test]
    fn program_rejects_target_outside_window() {
        let params = DeviceParams::new(50e3, 150e3, 0.0);
        let err = program_device(
            1.0 / 40e3,
            &params,
            &ProgramConfig::default(),
            &mut rng(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::OutOfWindow { .. }));
    }

    #[test]
    fn verified_devices_meet_tolerance_and_failures_are_flagged() {
        let params = DeviceParams::new(50e3, 150e3, 0.5);
        let cfg = ProgramConfig::write_verify(0.05, 5);
        let mut r = rng(31);
        for _ in 0..2_000 {
            let dev = program_device(20e-6, &params, &cfg, &mut r).unwrap();
            let rel = ((dev.g_actual - dev.g_target) / dev.g_target).abs();
            if dev.verified {
                assert!(rel <= cfg.verify_tol);
            } else {
                assert_eq!(dev.program_attempts, cfg.max_iters);
                assert!(rel > cfg.verify_tol);
            }
        }
    }

    #[test]
    fn verified_fraction_matches_normal_cdf_prediction() {
        // One attempt verifies iff |exp(sigma z) - 1| <= tol, so the per-try
        // probability is Phi(ln(1+tol)/sigma) - Phi(ln(1-tol)/sigma) and the
        // budgeted probability compounds over independent attempts.
        let sigma = 0.5f64;
        let tol = 0.05f64;
        let iters = 20;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let p1 = normal.cdf((1.0 + tol).ln() / sigma) - normal.cdf((1.0 - tol).ln() / sigma);
        let expected = 1.0 - (1.0 - p1).powi(iters as i32);

        let params = DeviceParams::new(50e3, 150e3, sigma);
        let cfg = ProgramConfig::write_verify(tol, iters);
        let mut r = rng(17);
        let trials = 10_000;
        let verified = (0..trials)
            .filter(|_| program_device(20e-6, &params, &cfg, &mut r).unwrap().verified)
            .count();
        let frac = verified as f64 / trials as f64;
        let stderr = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (frac - expected).abs() < 5.0 * stderr,
            "frac = {frac}, expected = {expected}"
        );
    }

    #[test]
    fn read_examples() {
        let dev = ReramDevice::ideal(20e-6f64);
        assert_relative_eq!(read_device(&dev, 0.1).unwrap(), 2e-6, max_relative = 1e-12);
        assert_eq!(read_device(&dev, 0.0).unwrap(), 0.0);

        let mut with_series = dev;
        with_series.series_r_on = 50e3;
        assert_relative_eq!(
            read_device(&with_series, 0.1).unwrap(),
            1e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn read_current_increases_with_voltage() {
        let dev = ReramDevice::ideal(20e-6f64);
        let mut last = -1.0;
        for k in 0..50 {
            let i = read_device(&dev, k as f64 * 0.01).unwrap();
            assert!(i > last || (k == 0 && i == 0.0));
            last = i;
        }
    }

    #[test]
    fn identical_seeds_reproduce_device_populations() {
        let params = DeviceParams::new(50e3, 150e3, 0.5);
        let cfg = ProgramConfig::open_loop();
        let pop = |seed| -> Vec<f64> {
            let mut r = rng(seed);
            (0..64)
                .map(|_| program_device(20e-6, &params, &cfg, &mut r).unwrap().g_actual)
                .collect()
        };
        assert_eq!(pop(42), pop(42));
        assert_ne!(pop(42), pop(43));
    }

    #[test]
    fn f32_sampling_is_exercised() {
        let g: f32 = sample_conductance(20e-6f32, 0.5f32, &mut rng(3)).unwrap();
        assert!(g > 0.0 && relative_eq!(g, 20e-6, max_relative = 5.0));
    }
}
