//! Weight cells and their phase-dependent branch conductances.
//!
//! All three topologies present the same external behavior: for a given
//! active word line (WL or WLB) the cell exposes one conductance to BL and
//! one to BLB. They differ in how many physical devices realize that, which
//! is exactly what decides whether intra-cell mismatch can exist:
//!
//! * 4T4R — four devices; WL enables the upper `(p, n)` copy, WLB the lower.
//! * 4T2R — two devices shared across phases; WLB swaps them between lines.
//! * 8T SRAM — a stored bit steering an on/off switch pair.

use rand::Rng;

use crate::device::{program_device, DeviceParams, ProgramConfig, ReramDevice, SwitchParams};
use crate::encode::weight_to_resistances;
use crate::{to_f64, Error, Real, Result};

/// Which complementary word line is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Wl,
    Wlb,
}

/// Cell topology selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    FourT4R,
    FourT2R,
    EightTSram,
}

impl Topology {
    pub const fn name(self) -> &'static str {
        match self {
            Topology::FourT4R => "4t4r",
            Topology::FourT2R => "4t2r",
            Topology::EightTSram => "8t_sram",
        }
    }
}

/// Conductances from the source node into the two bit lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchConductances<T> {
    pub g_to_bl: T,
    pub g_to_blb: T,
}

impl<T: Real> BranchConductances<T> {
    pub fn total(&self) -> T {
        self.g_to_bl + self.g_to_blb
    }

    pub fn swapped(&self) -> Self {
        Self {
            g_to_bl: self.g_to_blb,
            g_to_blb: self.g_to_bl,
        }
    }
}

/// Physical contents of a cell, by topology.
#[derive(Debug, Clone, PartialEq)]
pub enum CellDevices<T> {
    FourT4R {
        upper_p: ReramDevice<T>,
        upper_n: ReramDevice<T>,
        lower_p: ReramDevice<T>,
        lower_n: ReramDevice<T>,
    },
    FourT2R {
        p: ReramDevice<T>,
        n: ReramDevice<T>,
    },
    EightTSram {
        bit_positive: bool,
        switches: SwitchParams<T>,
    },
}

/// One weight-storing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellInstance<T> {
    devices: CellDevices<T>,
    weight_nominal: T,
    /// Variation-free WL-phase branch conductances; the reference the exact
    /// MAC value is computed against.
    nominal_wl: BranchConductances<T>,
}

impl<T: Real> CellInstance<T> {
    pub fn topology(&self) -> Topology {
        match self.devices {
            CellDevices::FourT4R { .. } => Topology::FourT4R,
            CellDevices::FourT2R { .. } => Topology::FourT2R,
            CellDevices::EightTSram { .. } => Topology::EightTSram,
        }
    }

    pub fn devices(&self) -> &CellDevices<T> {
        &self.devices
    }

    pub fn weight_nominal(&self) -> T {
        self.weight_nominal
    }

    pub fn nominal_wl_branches(&self) -> BranchConductances<T> {
        self.nominal_wl
    }

    /// Number of programmable resistive devices the cell owns.
    pub fn device_count(&self) -> usize {
        match self.devices {
            CellDevices::FourT4R { .. } => 4,
            CellDevices::FourT2R { .. } => 2,
            CellDevices::EightTSram { .. } => 0,
        }
    }

    /// All programmed devices reported verified by the write loop.
    pub fn all_verified(&self) -> bool {
        match &self.devices {
            CellDevices::FourT4R {
                upper_p,
                upper_n,
                lower_p,
                lower_n,
            } => [upper_p, upper_n, lower_p, lower_n]
                .iter()
                .all(|d| d.verified),
            CellDevices::FourT2R { p, n } => p.verified && n.verified,
            CellDevices::EightTSram { .. } => true,
        }
    }

    /// A 4T2R cell with explicitly chosen resistances, no variation.
    pub fn four_t2r_from_resistances(r_p: T, r_n: T, weight_label: T) -> Self {
        let p = ReramDevice::ideal_resistance(r_p);
        let n = ReramDevice::ideal_resistance(r_n);
        let nominal_wl = BranchConductances {
            g_to_bl: p.g_actual,
            g_to_blb: n.g_actual,
        };
        Self {
            devices: CellDevices::FourT2R { p, n },
            weight_nominal: weight_label,
            nominal_wl,
        }
    }

    /// A 4T4R cell with explicitly chosen per-copy resistances, no variation.
    ///
    /// The nominal reference is taken from the upper (WL) pair.
    pub fn four_t4r_from_resistances(
        r_upper_p: T,
        r_upper_n: T,
        r_lower_p: T,
        r_lower_n: T,
        weight_label: T,
    ) -> Self {
        let upper_p = ReramDevice::ideal_resistance(r_upper_p);
        let upper_n = ReramDevice::ideal_resistance(r_upper_n);
        let nominal_wl = BranchConductances {
            g_to_bl: upper_p.g_actual,
            g_to_blb: upper_n.g_actual,
        };
        Self {
            devices: CellDevices::FourT4R {
                upper_p,
                upper_n,
                lower_p: ReramDevice::ideal_resistance(r_lower_p),
                lower_n: ReramDevice::ideal_resistance(r_lower_n),
            },
            weight_nominal: weight_label,
            nominal_wl,
        }
    }
}

/// Builds and programs one cell storing `weight`.
///
/// ReRAM targets come from the weight encoding; each distinct resistance role
/// is programmed as its own device, so the two 4T4R copies of a role are
/// independent draws. SRAM cells only admit `weight` of exactly +1 or -1.
pub fn build_cell<T: Real, R: Rng + ?Sized>(
    topology: Topology,
    weight: T,
    device_params: &DeviceParams<T>,
    switch_params: &SwitchParams<T>,
    program: &ProgramConfig<T>,
    rng: &mut R,
) -> Result<CellInstance<T>> {
    if weight.abs() > T::one() || !weight.is_finite() {
        return Err(Error::OutOfRange {
            name: "weight",
            value: to_f64(weight),
            lo: -1.0,
            hi: 1.0,
        });
    }
    match topology {
        Topology::EightTSram => {
            if weight != T::one() && weight != -T::one() {
                return Err(Error::InvalidSramWeight {
                    weight: to_f64(weight),
                });
            }
            let bit_positive = weight == T::one();
            let nominal_wl = if bit_positive {
                BranchConductances {
                    g_to_bl: switch_params.g_on,
                    g_to_blb: switch_params.g_off,
                }
            } else {
                BranchConductances {
                    g_to_bl: switch_params.g_off,
                    g_to_blb: switch_params.g_on,
                }
            };
            Ok(CellInstance {
                devices: CellDevices::EightTSram {
                    bit_positive,
                    switches: *switch_params,
                },
                weight_nominal: weight,
                nominal_wl,
            })
        }
        Topology::FourT2R | Topology::FourT4R => {
            let (r_p, r_n) =
                weight_to_resistances(weight, device_params.r_hrs, device_params.r_lrs)?;
            let g_p = r_p.recip();
            let g_n = r_n.recip();
            let nominal_wl = BranchConductances {
                g_to_bl: g_p,
                g_to_blb: g_n,
            };
            let devices = match topology {
                Topology::FourT2R => CellDevices::FourT2R {
                    p: program_device(g_p, device_params, program, rng)?,
                    n: program_device(g_n, device_params, program, rng)?,
                },
                Topology::FourT4R => CellDevices::FourT4R {
                    upper_p: program_device(g_p, device_params, program, rng)?,
                    upper_n: program_device(g_n, device_params, program, rng)?,
                    lower_p: program_device(g_p, device_params, program, rng)?,
                    lower_n: program_device(g_n, device_params, program, rng)?,
                },
                Topology::EightTSram => unreachable!(),
            };
            Ok(CellInstance {
                devices,
                weight_nominal: weight,
                nominal_wl,
            })
        }
    }
}

/// Resolves the source-to-BL and source-to-BLB conductances for a phase.
///
/// For 4T2R the two phases reference the same two devices with the lines
/// exchanged, so the per-cell total conductance cannot differ between phases.
pub fn branch_conductances<T: Real>(cell: &CellInstance<T>, phase: Phase) -> BranchConductances<T> {
    match (&cell.devices, phase) {
        (CellDevices::FourT4R { upper_p, upper_n, .. }, Phase::Wl) => BranchConductances {
            g_to_bl: upper_p.effective_conductance(),
            g_to_blb: upper_n.effective_conductance(),
        },
        (CellDevices::FourT4R { lower_p, lower_n, .. }, Phase::Wlb) => BranchConductances {
            g_to_bl: lower_n.effective_conductance(),
            g_to_blb: lower_p.effective_conductance(),
        },
        (CellDevices::FourT2R { p, n }, Phase::Wl) => BranchConductances {
            g_to_bl: p.effective_conductance(),
            g_to_blb: n.effective_conductance(),
        },
        (CellDevices::FourT2R { p, n }, Phase::Wlb) => BranchConductances {
            g_to_bl: n.effective_conductance(),
            g_to_blb: p.effective_conductance(),
        },
        (CellDevices::EightTSram { bit_positive, switches }, phase) => {
            let wl_sees_on = match phase {
                Phase::Wl => *bit_positive,
                Phase::Wlb => !*bit_positive,
            };
            if wl_sees_on {
                BranchConductances {
                    g_to_bl: switches.g_on,
                    g_to_blb: switches.g_off,
                }
            } else {
                BranchConductances {
                    g_to_bl: switches.g_off,
                    g_to_blb: switches.g_on,
                }
            }
        }
    }
}

/// Worst relative disagreement between the two copies of a resistance role.
///
/// 4T2R and 8T cells have no role copies, so the mismatch is structurally
/// zero for them.
pub fn intra_cell_mismatch<T: Real>(cell: &CellInstance<T>) -> T {
    match &cell.devices {
        CellDevices::FourT4R {
            upper_p,
            upper_n,
            lower_p,
            lower_n,
        } => {
            let rel = |upper: &ReramDevice<T>, lower: &ReramDevice<T>| {
                let gu = upper.effective_conductance();
                let gl = lower.effective_conductance();
                ((gu - gl) / gu).abs()
            };
            rel(upper_p, lower_p).max(rel(upper_n, lower_n))
        }
        CellDevices::FourT2R { .. } | CellDevices::EightTSram { .. } => T::zero(),
    }
}
