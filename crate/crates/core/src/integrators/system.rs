use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::{finite_difference_jacobian, Jacobian, JacobianStructure};

/// An additively partitioned system `y' = f^F(t, y) + f^S(t, y)`.
///
/// Component-partitioned systems report their fast components through
/// [`fast_indices`](Self::fast_indices); `slow_rhs` must then vanish on those
/// components and `fast_rhs` on the rest.
pub trait PartitionedSystem: Sync {
    fn dim(&self) -> usize;

    fn fast_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>);

    fn slow_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>);

    fn rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        let mut tmp = DVector::zeros(self.dim());
        self.fast_rhs(t, y, out);
        self.slow_rhs(t, y, &mut tmp);
        *out += tmp;
    }

    fn fast_jacobian(&self, _t: f64, _y: &DVector<f64>) -> Option<Jacobian> {
        None
    }

    fn slow_jacobian(&self, _t: f64, _y: &DVector<f64>) -> Option<Jacobian> {
        None
    }

    fn jacobian_structure(&self) -> JacobianStructure {
        JacobianStructure::Dense
    }

    /// Jacobian of the full right-hand side; analytic when both parts supply
    /// one, finite differences otherwise.
    fn jacobian(&self, t: f64, y: &DVector<f64>) -> Jacobian {
        if let (Some(f), Some(s)) = (self.fast_jacobian(t, y), self.slow_jacobian(t, y)) {
            return f.sum(&s);
        }
        let mut f0 = DVector::zeros(self.dim());
        self.rhs(t, y, &mut f0);
        finite_difference_jacobian(|v, out| self.rhs(t, v, out), y, &f0, self.jacobian_structure())
    }

    /// Jacobian of the fast part.
    fn fast_jacobian_or_fd(&self, t: f64, y: &DVector<f64>) -> Jacobian {
        if let Some(j) = self.fast_jacobian(t, y) {
            return j;
        }
        let mut f0 = DVector::zeros(self.dim());
        self.fast_rhs(t, y, &mut f0);
        finite_difference_jacobian(|v, out| self.fast_rhs(t, v, out), y, &f0, self.jacobian_structure())
    }

    /// Sorted indices of the fast components of a component-partitioned
    /// system.
    fn fast_indices(&self) -> Option<Vec<usize>> {
        None
    }

    /// Slow components read by the fast right-hand side.
    ///
    /// `None` means any slow component may be read.
    fn fast_dependencies(&self) -> Option<Vec<usize>> {
        None
    }

    /// `f^F` restricted to `idx`.
    fn fast_rhs_subset(&self, t: f64, y: &DVector<f64>, idx: &[usize], out: &mut DVector<f64>) {
        let mut full = DVector::zeros(self.dim());
        self.fast_rhs(t, y, &mut full);
        for (o, &i) in out.iter_mut().zip(idx) {
            *o = full[i];
        }
    }

    fn exact_solution(&self, _t: f64) -> Option<DVector<f64>> {
        None
    }

    /// Called by [`integrate`](super::integrate) before each macro step.
    fn begin_step(&mut self, _t: f64, _y: &DVector<f64>, _h: f64) {}

    /// Domain check applied to accepted states.
    fn check_state(&self, _y: &DVector<f64>) -> Result<()> {
        Ok(())
    }

    fn name(&self) -> &str {
        "system"
    }
}

type RhsFn = Box<dyn Fn(f64, &DVector<f64>, &mut DVector<f64>) + Send + Sync>;

/// A system assembled from closures.
pub struct FnSystem {
    dim: usize,
    fast: RhsFn,
    slow: RhsFn,
    fast_indices: Option<Vec<usize>>,
    name: String,
}

impl FnSystem {
    pub fn new<F, S>(dim: usize, fast: F, slow: S) -> Self
    where
        F: Fn(f64, &DVector<f64>, &mut DVector<f64>) + Send + Sync + 'static,
        S: Fn(f64, &DVector<f64>, &mut DVector<f64>) + Send + Sync + 'static,
    {
        Self { dim, fast: Box::new(fast), slow: Box::new(slow), fast_indices: None, name: "closure".into() }
    }

    pub fn with_fast_indices(mut self, idx: Vec<usize>) -> Self {
        self.fast_indices = Some(idx);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl PartitionedSystem for FnSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn fast_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        (self.fast)(t, y, out)
    }

    fn slow_rhs(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        (self.slow)(t, y, out)
    }

    fn fast_indices(&self) -> Option<Vec<usize>> {
        self.fast_indices.clone()
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// Linear split `y' = F y + S y` with constant matrices.
#[derive(Debug, Clone)]
pub struct LinearSplit {
    pub fast: DMatrix<f64>,
    pub slow: DMatrix<f64>,
}

impl LinearSplit {
    pub fn new(fast: DMatrix<f64>, slow: DMatrix<f64>) -> Self {
        assert_eq!(fast.shape(), slow.shape());
        Self { fast, slow }
    }

    /// The scalar split `y' = λ^F y + λ^S y`.
    pub fn scalar(lambda_f: f64, lambda_s: f64) -> Self {
        Self::new(DMatrix::from_element(1, 1, lambda_f), DMatrix::from_element(1, 1, lambda_s))
    }

    /// `y' = Ω y` split into its fast row and slow row.
    pub fn rows(omega: &DMatrix<f64>) -> Self {
        let mut fast = DMatrix::zeros(2, 2);
        let mut slow = DMatrix::zeros(2, 2);
        fast.row_mut(0).copy_from(&omega.row(0));
        slow.row_mut(1).copy_from(&omega.row(1));
        Self::new(fast, slow)
    }
}

impl PartitionedSystem for LinearSplit {
    fn dim(&self) -> usize {
        self.fast.nrows()
    }

    fn fast_rhs(&self, _t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        self.fast.mul_to(y, out);
    }

    fn slow_rhs(&self, _t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        self.slow.mul_to(y, out);
    }

    fn fast_jacobian(&self, _t: f64, _y: &DVector<f64>) -> Option<Jacobian> {
        Some(Jacobian::Dense(self.fast.clone()))
    }

    fn slow_jacobian(&self, _t: f64, _y: &DVector<f64>) -> Option<Jacobian> {
        Some(Jacobian::Dense(self.slow.clone()))
    }

    fn name(&self) -> &str {
        "linear"
    }
}
