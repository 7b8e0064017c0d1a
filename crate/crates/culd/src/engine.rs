//! Array readout: node solve, charge integration, waveform capture.
//!
//! The array is reduced to a single source node fed by the bias current, with
//! BL and BLB held at the mirror inputs' virtual ground. Between word-line
//! edges every branch conductance is constant, so the node voltage and both
//! line currents are constant too; charge per interval is then exact
//! arithmetic, which is what makes the event-driven integrator a reference
//! oracle the fixed-timestep transient must reproduce.

use crate::cell::{branch_conductances, BranchConductances, CellInstance, Phase};
use crate::encode::{weight_to_resistances, PwmSchedule};
use crate::{to_f64, Error, Real, Result};

/// Bias, capacitors, supply, and mirror settings for one readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutConfig<T> {
    /// Tail bias current (A).
    pub i_bias: T,
    /// Integration capacitor on the BL side (F).
    pub c_p: T,
    /// Integration capacitor on the BLB side (F).
    pub c_n: T,
    /// Supply rail clamping the capacitor voltages (V).
    pub v_dd: T,
    /// Current-mirror replication gain onto C_p.
    pub mirror_gain_p: T,
    /// Current-mirror replication gain onto C_n.
    pub mirror_gain_n: T,
    /// Transient sample step (s); waveform resolution only, results are
    /// step-size independent because steps split at word-line edges.
    pub dt: T,
}

impl<T: Real> ReadoutConfig<T> {
    /// 10 uA bias, 3 pF caps, 0.8 V rail, unit mirrors, 0.1 ns step.
    pub fn default_reram() -> Self {
        Self {
            i_bias: T::of(10e-6),
            c_p: T::of(3e-12),
            c_n: T::of(3e-12),
            v_dd: T::of(0.8),
            mirror_gain_p: T::one(),
            mirror_gain_n: T::one(),
            dt: T::of(0.1e-9),
        }
    }

    /// 4 uA bias and a 1.8 V rail, the SRAM-array reading of the defaults.
    pub fn default_sram() -> Self {
        Self {
            i_bias: T::of(4e-6),
            v_dd: T::of(1.8),
            ..Self::default_reram()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("i_bias", self.i_bias),
            ("c_p", self.c_p),
            ("c_n", self.c_n),
            ("v_dd", self.v_dd),
            ("mirror_gain_p", self.mirror_gain_p),
            ("mirror_gain_n", self.mirror_gain_n),
            ("dt", self.dt),
        ];
        for (name, value) in checks {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: to_f64(value),
                });
            }
        }
        Ok(())
    }
}

impl<T: Real> Default for ReadoutConfig<T> {
    fn default() -> Self {
        Self::default_reram()
    }
}

/// A column of cells plus the PWM schedule driving their word lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayState<T> {
    cells: Vec<CellInstance<T>>,
    schedule: PwmSchedule<T>,
}

impl<T: Real> ArrayState<T> {
    pub fn new(cells: Vec<CellInstance<T>>, schedule: PwmSchedule<T>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidSpec {
                reason: "array has no cells".into(),
            });
        }
        if cells.len() != schedule.rows() {
            return Err(Error::InvalidSpec {
                reason: format!(
                    "{} cells but {} schedule rows",
                    cells.len(),
                    schedule.rows()
                ),
            });
        }
        Ok(Self { cells, schedule })
    }

    pub fn cells(&self) -> &[CellInstance<T>] {
        &self.cells
    }

    pub fn schedule(&self) -> &PwmSchedule<T> {
        &self.schedule
    }

    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    fn phases_at(&self, t: T) -> Vec<Phase> {
        (0..self.rows())
            .map(|row| self.schedule.phase_at(row, t))
            .collect()
    }
}

/// Currents of one cell at a solved operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCurrents<T> {
    pub to_bl: T,
    pub to_blb: T,
}

/// Solution of the current-limited source node for one phase assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSolution<T> {
    /// Source-node voltage (V).
    pub v_node: T,
    /// Total current into BL (A).
    pub i_bl: T,
    /// Total current into BLB (A).
    pub i_blb: T,
    /// Per-cell branch currents, in row order (A).
    pub per_cell: Vec<BranchCurrents<T>>,
}

/// Solves the single-node array model for a fixed phase per row.
///
/// The bias current divides over all branch conductances, so
/// `i_bl + i_blb == i_bias` identically and every cell carries
/// `i_bias * g_cell / g_total` - the current-limit scaling.
pub fn solve_node<T: Real>(
    cells: &[CellInstance<T>],
    phases: &[Phase],
    i_bias: T,
) -> Result<NodeSolution<T>> {
    if cells.len() != phases.len() {
        return Err(Error::InvalidSpec {
            reason: format!("{} cells but {} phases", cells.len(), phases.len()),
        });
    }
    let branches: Vec<BranchConductances<T>> = cells
        .iter()
        .zip(phases)
        .map(|(cell, &phase)| branch_conductances(cell, phase))
        .collect();
    let g_bl = branches.iter().map(|b| b.g_to_bl).sum::<T>();
    let g_blb = branches.iter().map(|b| b.g_to_blb).sum::<T>();
    let g_total = g_bl + g_blb;
    if !(g_total > T::zero()) {
        return Err(Error::OpenCircuit);
    }
    let v_node = i_bias / g_total;
    let per_cell = branches
        .iter()
        .map(|b| BranchCurrents {
            to_bl: v_node * b.g_to_bl,
            to_blb: v_node * b.g_to_blb,
        })
        .collect();
    Ok(NodeSolution {
        v_node,
        i_bl: v_node * g_bl,
        i_blb: v_node * g_blb,
        per_cell,
    })
}

/// One inter-event interval with its constant line currents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventInterval<T> {
    pub t_start: T,
    pub t_end: T,
    pub i_bl: T,
    pub i_blb: T,
}

/// Splits the period at every word-line edge and solves each piece.
pub fn event_intervals<T: Real>(
    array: &ArrayState<T>,
    cfg: &ReadoutConfig<T>,
) -> Result<Vec<EventInterval<T>>> {
    cfg.validate()?;
    let x_max = array.schedule.x_max();
    let mut edges = array.schedule.switch_times();
    edges.push(x_max);

    let mut intervals = Vec::with_capacity(edges.len());
    let mut t_start = T::zero();
    for t_end in edges {
        if !(t_end > t_start) {
            continue;
        }
        // Phases are constant on [t_start, t_end); sample at the midpoint.
        let mid = (t_start + t_end) / T::two();
        let phases = array.phases_at(mid);
        let (g_bl, g_blb) = branch_totals(&array.cells, &phases)?;
        let g_total = g_bl + g_blb;
        let v_node = cfg.i_bias / g_total;
        intervals.push(EventInterval {
            t_start,
            t_end,
            i_bl: v_node * g_bl,
            i_blb: v_node * g_blb,
        });
        t_start = t_end;
    }
    Ok(intervals)
}

fn branch_totals<T: Real>(cells: &[CellInstance<T>], phases: &[Phase]) -> Result<(T, T)> {
    let mut g_bl = T::zero();
    let mut g_blb = T::zero();
    for (cell, &phase) in cells.iter().zip(phases) {
        let b = branch_conductances(cell, phase);
        g_bl = g_bl + b.g_to_bl;
        g_blb = g_blb + b.g_to_blb;
    }
    if !(g_bl + g_blb > T::zero()) {
        return Err(Error::OpenCircuit);
    }
    Ok((g_bl, g_blb))
}

/// Final differential output with its nominal reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacResult<T> {
    /// BL-side capacitor voltage (V).
    pub v_xp: T,
    /// BLB-side capacitor voltage (V).
    pub v_xn: T,
    /// Differential output `v_xp - v_xn` (V).
    pub v_x: T,
    /// Output the nominal, variation-free array would produce (V).
    pub v_x_ideal: T,
    /// Nominal MAC value `sum(a_i * x_i)`.
    pub mac_ideal: T,
    /// `v_x - v_x_ideal` (V).
    pub error: T,
    /// Either capacitor hit the supply rail.
    pub clamped: bool,
}

/// Integrator state shared by the exact and transient paths.
struct CapPair<T> {
    v_xp: T,
    v_xn: T,
    clamped_p: bool,
    clamped_n: bool,
}

impl<T: Real> CapPair<T> {
    fn new() -> Self {
        Self {
            v_xp: T::zero(),
            v_xn: T::zero(),
            clamped_p: false,
            clamped_n: false,
        }
    }

    /// Accumulates one constant-current span; exact because the voltage ramp
    /// is linear and can only stop at the rail.
    fn accumulate(&mut self, i_bl: T, i_blb: T, dt: T, cfg: &ReadoutConfig<T>) {
        let dvp = cfg.mirror_gain_p * i_bl * dt / cfg.c_p;
        let dvn = cfg.mirror_gain_n * i_blb * dt / cfg.c_n;
        self.v_xp = self.v_xp + dvp;
        if self.v_xp >= cfg.v_dd {
            self.v_xp = cfg.v_dd;
            self.clamped_p = true;
        }
        self.v_xn = self.v_xn + dvn;
        if self.v_xn >= cfg.v_dd {
            self.v_xn = cfg.v_dd;
            self.clamped_n = true;
        }
    }

    fn clamped(&self) -> bool {
        self.clamped_p || self.clamped_n
    }
}

/// Event-driven exact integration of the array over one period.
///
/// This is the reference oracle: charge per inter-event interval is computed
/// in closed form, so the result carries no step-size error.
pub fn integrate_exact<T: Real>(
    array: &ArrayState<T>,
    cfg: &ReadoutConfig<T>,
) -> Result<MacResult<T>> {
    let intervals = event_intervals(array, cfg)?;
    let mut caps = CapPair::new();
    for iv in &intervals {
        caps.accumulate(iv.i_bl, iv.i_blb, iv.t_end - iv.t_start, cfg);
    }
    Ok(finish(array, cfg, caps))
}

/// Sampled waveform of one transient run.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T> {
    pub t: Vec<T>,
    pub v_xp: Vec<T>,
    pub v_xn: Vec<T>,
    pub i_bl: Vec<T>,
    pub i_blb: Vec<T>,
    pub clamped: Vec<bool>,
}

impl<T> Waveform<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Fixed-timestep transient with waveform capture.
///
/// Every step is split at word-line edges inside it, so the piecewise
/// constant currents are integrated exactly and the final result matches
/// [`integrate_exact`] up to floating-point summation order.
pub fn simulate_transient<T: Real>(
    array: &ArrayState<T>,
    cfg: &ReadoutConfig<T>,
) -> Result<(MacResult<T>, Waveform<T>)> {
    let intervals = event_intervals(array, cfg)?;
    let x_max = array.schedule.x_max();
    let steps = (x_max / cfg.dt)
        .ceil()
        .to_usize()
        .filter(|&s| s <= MAX_SAMPLES)
        .ok_or(Error::InvalidParameter {
            name: "dt",
            value: to_f64(cfg.dt),
        })?
        .max(1);

    let mut wave = Waveform {
        t: Vec::with_capacity(steps + 2),
        v_xp: Vec::with_capacity(steps + 2),
        v_xn: Vec::with_capacity(steps + 2),
        i_bl: Vec::with_capacity(steps + 2),
        i_blb: Vec::with_capacity(steps + 2),
        clamped: Vec::with_capacity(steps + 2),
    };

    let mut caps = CapPair::new();
    let mut idx = 0usize;
    let mut k = 0usize;
    loop {
        let t_sample = (T::of(k as f64) * cfg.dt).min(x_max);
        // Advance across any intervals the previous sample step spans.
        while idx < intervals.len() && intervals[idx].t_end <= t_sample {
            let iv = &intervals[idx];
            let from = iv.t_start.max(last_time(&wave));
            caps.accumulate(iv.i_bl, iv.i_blb, iv.t_end - from, cfg);
            idx += 1;
        }
        if idx < intervals.len() {
            let iv = &intervals[idx];
            let from = iv.t_start.max(last_time(&wave));
            if t_sample > from {
                caps.accumulate(iv.i_bl, iv.i_blb, t_sample - from, cfg);
            }
        }
        let current = &intervals[idx.min(intervals.len() - 1)];
        wave.t.push(t_sample);
        wave.v_xp.push(caps.v_xp);
        wave.v_xn.push(caps.v_xn);
        wave.i_bl.push(current.i_bl);
        wave.i_blb.push(current.i_blb);
        wave.clamped.push(caps.clamped());
        if t_sample >= x_max {
            break;
        }
        k += 1;
    }

    Ok((finish(array, cfg, caps), wave))
}

/// Upper bound on transient samples; guards against a degenerate `dt`.
const MAX_SAMPLES: usize = 50_000_000;

fn last_time<T: Real>(wave: &Waveform<T>) -> T {
    wave.t.last().copied().unwrap_or_else(T::zero)
}

fn finish<T: Real>(array: &ArrayState<T>, cfg: &ReadoutConfig<T>, caps: CapPair<T>) -> MacResult<T> {
    let v_x = caps.v_xp - caps.v_xn;
    let v_x_ideal = nominal_vx(array, cfg);
    let mac_ideal = array
        .cells
        .iter()
        .zip(array.schedule.widths())
        .map(|(cell, &w)| {
            let x = (T::two() * w - array.schedule.x_max()) / array.schedule.x_max();
            cell.weight_nominal() * x
        })
        .sum::<T>();
    MacResult {
        v_xp: caps.v_xp,
        v_xn: caps.v_xn,
        v_x,
        v_x_ideal,
        mac_ideal,
        error: v_x - v_x_ideal,
        clamped: caps.clamped(),
    }
}

/// Differential output of the variation-free array, from the cells' nominal
/// branch conductances.
///
/// With every row at its nominal composite the node voltage never moves, so
/// the per-row charge difference is `(2X_i - X_max) * (I_p,i - I_n,i)` and
/// the total divides by the capacitance. Uses `c_p` and the BL-side mirror
/// gain as the common scale.
pub fn nominal_vx<T: Real>(array: &ArrayState<T>, cfg: &ReadoutConfig<T>) -> T {
    let g_total = array
        .cells
        .iter()
        .map(|c| c.nominal_wl_branches().total())
        .sum::<T>();
    if !(g_total > T::zero()) {
        return T::zero();
    }
    let v_node = cfg.i_bias / g_total;
    let x_max = array.schedule.x_max();
    let sum = array
        .cells
        .iter()
        .zip(array.schedule.widths())
        .map(|(cell, &w)| {
            let nominal = cell.nominal_wl_branches();
            (T::two() * w - x_max) * v_node * (nominal.g_to_bl - nominal.g_to_blb)
        })
        .sum::<T>();
    cfg.mirror_gain_p * sum / cfg.c_p
}

/// Closed-form MAC output for nominal weights and inputs over a resistance
/// window.
///
/// Evaluates the same charge-difference expression as [`nominal_vx`] but
/// straight from the weight encoding, without building cells; serves as the
/// independent ideal reference for the weight-driven experiments.
pub fn closed_form_vx<T: Real>(
    weights: &[T],
    inputs: &[T],
    r_hrs: T,
    r_lrs: T,
    x_max: T,
    cfg: &ReadoutConfig<T>,
) -> Result<T> {
    if weights.len() != inputs.len() || weights.is_empty() {
        return Err(Error::InvalidSpec {
            reason: format!(
                "{} weights but {} inputs",
                weights.len(),
                inputs.len()
            ),
        });
    }
    cfg.validate()?;
    let pairs = weights
        .iter()
        .map(|&a| weight_to_resistances(a, r_hrs, r_lrs))
        .collect::<Result<Vec<_>>>()?;
    let g_pairs: Vec<(T, T)> = pairs
        .iter()
        .map(|&(r_p, r_n)| (r_p.recip(), r_n.recip()))
        .collect();
    closed_form_vx_from_conductances(&g_pairs, inputs, x_max, cfg)
}

/// Closed-form MAC output from explicit nominal branch-conductance pairs.
pub fn closed_form_vx_from_conductances<T: Real>(
    g_pairs: &[(T, T)],
    inputs: &[T],
    x_max: T,
    cfg: &ReadoutConfig<T>,
) -> Result<T> {
    if g_pairs.len() != inputs.len() || g_pairs.is_empty() {
        return Err(Error::InvalidSpec {
            reason: "conductance pairs and inputs must align".into(),
        });
    }
    if !(x_max > T::zero()) {
        return Err(Error::DegenerateSchedule {
            reason: "x_max must be positive",
        });
    }
    for &x in inputs {
        if x.abs() > T::one() || !x.is_finite() {
            return Err(Error::OutOfRange {
                name: "input",
                value: to_f64(x),
                lo: -1.0,
                hi: 1.0,
            });
        }
    }
    let g_total = g_pairs.iter().map(|&(p, n)| p + n).sum::<T>();
    if !(g_total > T::zero()) {
        return Err(Error::OpenCircuit);
    }
    let v_node = cfg.i_bias / g_total;
    let sum = g_pairs
        .iter()
        .zip(inputs)
        .map(|(&(g_p, g_n), &x)| x * x_max * v_node * (g_p - g_n))
        .sum::<T>();
    Ok(cfg.mirror_gain_p * sum / cfg.c_p)
}
