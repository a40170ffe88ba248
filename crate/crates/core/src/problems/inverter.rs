use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::integrators::PartitionedSystem;
use crate::linalg::{BandMatrix, Jacobian, JacobianStructure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InverterChainConfig {
    pub m: usize,
    pub u_op: f64,
    pub u_t: f64,
    pub gain: f64,
    pub u_source: f64,
    pub t_end: f64,
    /// Inverters kept fast on each side of the active region.
    pub half_width: usize,
    /// `|U'_i|` above which an inverter counts as active.
    pub activity: f64,
}

impl Default for InverterChainConfig {
    fn default() -> Self {
        Self {
            m: 500,
            u_op: 5.0,
            u_t: 1.0,
            gain: 100.0,
            u_source: 0.0,
            t_end: 100.0,
            half_width: 20,
            activity: 1e-4,
        }
    }
}

/// Piecewise-linear input pulse.
pub fn input_signal(t: f64) -> f64 {
    if (5.0..=10.0).contains(&t) {
        t - 5.0
    } else if (10.0..=15.0).contains(&t) {
        5.0
    } else if (15.0..=17.0).contains(&t) {
        2.5 * (17.0 - t)
    } else {
        0.0
    }
}

/// `max(U_G − U_S − U_T, 0)² − max(U_G − U_D − U_T, 0)²`.
pub fn drain_current(ug: f64, ud: f64, us: f64, ut: f64) -> f64 {
    (ug - us - ut).max(0.0).powi(2) - (ug - ud - ut).max(0.0).powi(2)
}

/// Chain of MOS inverters with a sliding fast window.
///
/// The window is recomputed in [`begin_step`](PartitionedSystem::begin_step):
/// it spans the inverters whose derivative exceeds the activity threshold,
/// widened by `half_width` on both sides and extended forward by the distance
/// the leading edge moved during the previous step.
#[derive(Debug, Clone)]
pub struct InverterChain {
    pub cfg: InverterChainConfig,
    window: (usize, usize),
    front: Option<usize>,
    lead: usize,
}

impl InverterChain {
    pub fn new(cfg: InverterChainConfig) -> Self {
        let w = (2 * cfg.half_width + 1).min(cfg.m);
        Self { cfg, window: (0, w), front: None, lead: 0 }
    }

    pub fn initial_state(&self) -> DVector<f64> {
        DVector::from_fn(self.cfg.m, |i, _| if (i + 1) % 2 == 0 { 6.246e-3 } else { 5.0 })
    }

    /// Current fast range `lo..hi`.
    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    pub fn set_window(&mut self, lo: usize, hi: usize) {
        assert!(lo < hi && hi <= self.cfg.m);
        self.window = (lo, hi);
    }

    fn gate(&self, t: f64, y: &DVector<f64>, i: usize) -> f64 {
        if i == 0 {
            input_signal(t)
        } else {
            y[i - 1]
        }
    }

    fn component(&self, t: f64, y: &DVector<f64>, i: usize) -> f64 {
        let c = &self.cfg;
        c.u_op - y[i] - c.gain * drain_current(self.gate(t, y, i), y[i], c.u_source, c.u_t)
    }

    /// Row `i` of the Jacobian: `(∂/∂U_{i−1}, ∂/∂U_i)`.
    fn row_derivatives(&self, t: f64, y: &DVector<f64>, i: usize) -> (f64, f64) {
        let c = &self.cfg;
        let ug = self.gate(t, y, i);
        let on = (ug - c.u_source - c.u_t).max(0.0);
        let sat = (ug - y[i] - c.u_t).max(0.0);
        (-c.gain * 2.0 * (on - sat), -1.0 - c.gain * 2.0 * sat)
    }

    fn in_window(&self, i: usize) -> bool {
        i >= self.window.0 && i < self.window.1
    }

    fn masked_jacobian(&self, t: f64, y: &DVector<f64>, fast: bool) -> Jacobian {
        let m = self.cfg.m;
        let mut j = BandMatrix::zeros(m, 1, 0);
        for i in (0..m).filter(|&i| self.in_window(i) == fast) {
            let (dg, dd) = self.row_derivatives(t, y, i);
            if i > 0 {
                j.set(i, i - 1, dg);
            }
            j.set(i, i, dd);
        }
        Jacobian::Banded(j)
    }

    fn masked_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>, fast: bool) {
        for i in 0..self.cfg.m {
            out[i] = if self.in_window(i) == fast { self.component(t, y, i) } else { 0.0 };
        }
    }
}

impl PartitionedSystem for InverterChain {
    fn dim(&self) -> usize {
        self.cfg.m
    }

    fn fast_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        self.masked_rhs(t, y, out, true);
    }

    fn slow_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        self.masked_rhs(t, y, out, false);
    }

    fn rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        for i in 0..self.cfg.m {
            out[i] = self.component(t, y, i);
        }
    }

    fn fast_jacobian(&self, t: f64, y: &DVector<f64>) -> Option<Jacobian> {
        Some(self.masked_jacobian(t, y, true))
    }

    fn slow_jacobian(&self, t: f64, y: &DVector<f64>) -> Option<Jacobian> {
        Some(self.masked_jacobian(t, y, false))
    }

    fn jacobian(&self, t: f64, y: &DVector<f64>) -> Jacobian {
        let m = self.cfg.m;
        let mut j = BandMatrix::zeros(m, 1, 0);
        for i in 0..m {
            let (dg, dd) = self.row_derivatives(t, y, i);
            if i > 0 {
                j.set(i, i - 1, dg);
            }
            j.set(i, i, dd);
        }
        Jacobian::Banded(j)
    }

    fn jacobian_structure(&self) -> JacobianStructure {
        JacobianStructure::Banded { kl: 1, ku: 0 }
    }

    fn fast_indices(&self) -> Option<Vec<usize>> {
        Some((self.window.0..self.window.1).collect())
    }

    fn fast_dependencies(&self) -> Option<Vec<usize>> {
        Some(self.window.0.checked_sub(1).into_iter().collect())
    }

    fn fast_rhs_subset(&self, t: f64, y: &DVector<f64>, idx: &[usize], out: &mut DVector<f64>) {
        for (o, &i) in out.iter_mut().zip(idx) {
            *o = if self.in_window(i) { self.component(t, y, i) } else { 0.0 };
        }
    }

    fn begin_step(&mut self, t: f64, y: &DVector<f64>, _h: f64) {
        let m = self.cfg.m;
        let active: Vec<usize> = (0..m).filter(|&i| self.component(t, y, i).abs() > self.cfg.activity).collect();
        let (Some(&first), Some(&last)) = (active.first(), active.last()) else {
            return;
        };
        if let Some(prev) = self.front {
            self.lead = last.saturating_sub(prev).max(self.lead / 2);
        }
        self.front = Some(last);
        let hw = self.cfg.half_width;
        let lo = first.saturating_sub(hw);
        let hi = (last + hw + self.lead + 1).min(m);
        self.window = (lo, hi);
    }

    fn name(&self) -> &str {
        "inverter-chain"
    }
}
