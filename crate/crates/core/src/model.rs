//! Problem instances, penalties, solver options and trace records.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::ssnal::SsnalStatus;

/// Serializes a `DVector<f64>` as a plain JSON array.
pub(crate) mod vec_serde {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        let data = Vec::<f64>::deserialize(d)?;
        Ok(DVector::from_vec(data))
    }
}

pub(crate) mod opt_vec_serde {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<DVector<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.as_slice().to_vec()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DVector<f64>>, D::Error> {
        Ok(Option::<Vec<f64>>::deserialize(d)?.map(DVector::from_vec))
    }
}

/// A least-squares regression problem `min (1/2m)‖Ax − b‖² + penalty`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: DMatrix<f64>,
    b: DVector<f64>,
    cleaned: bool,
}

impl ProblemInstance {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidArgument("design matrix must be nonempty".into()));
        }
        check_len(a.nrows(), b.len())?;
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design and response must be finite".into()));
        }
        Ok(Self { a, b, cleaned: false })
    }

    /// Builds an instance that is guaranteed to have no all-zero column.
    pub fn new_cleaned(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let mut inst = Self::new(a, b)?;
        if let Some(j) = (0..inst.n()).find(|&j| inst.a.column(j).iter().all(|&v| v == 0.0)) {
            return Err(Error::InvalidArgument(format!("column {j} is identically zero")));
        }
        inst.cleaned = true;
        Ok(inst)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn is_cleaned(&self) -> bool {
        self.cleaned
    }

    /// Returns `‖Aᵀb‖∞`, the scale used for the default regularization level.
    pub fn max_correlation(&self) -> f64 {
        self.a.tr_mul(&self.b).amax()
    }

    /// Regularization level `(c/m)·‖Aᵀb‖∞` stated for the unnormalized loss
    /// `½‖Ax − b‖²`, converted to the `1/(2m)`-normalized loss used here by
    /// a further division by `m`. Under this convention `c = m` is the
    /// smallest level at which the Lasso solution is zero.
    pub fn lambda_from_scale(&self, c_lambda: f64) -> f64 {
        let m = self.m() as f64;
        c_lambda * self.max_correlation() / (m * m)
    }
}

/// Known truth for synthetic and toy problems.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(with = "vec_serde")]
    pub x_bar: DVector<f64>,
    pub support: Vec<usize>,
    #[serde(with = "opt_vec_serde")]
    pub noise: Option<DVector<f64>>,
}

impl GroundTruth {
    pub fn new(x_bar: DVector<f64>, noise: Option<DVector<f64>>) -> Self {
        let support = x_bar
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        Self { x_bar, support, noise }
    }

    pub fn r(&self) -> usize {
        self.support.len()
    }
}

/// The separable regularizer `Σ λ·w_i·|x_i| − v_i·x_i + 1{|x_i| ≤ μ_i}`.
///
/// An infinite `box_radius` entry means the coordinate is unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparablePenalty {
    pub lambda: f64,
    pub weights: DVector<f64>,
    pub tilt: DVector<f64>,
    pub box_radius: DVector<f64>,
}

impl SeparablePenalty {
    /// Plain ℓ1 penalty `λ‖x‖₁`.
    pub fn lasso(n: usize, lambda: f64) -> Self {
        Self::weighted_l1(lambda, DVector::from_element(n, 1.0))
    }

    /// Weighted ℓ1 penalty without a box or tilt.
    pub fn weighted_l1(lambda: f64, weights: DVector<f64>) -> Self {
        let n = weights.len();
        Self {
            lambda,
            weights,
            tilt: DVector::zeros(n),
            box_radius: DVector::from_element(n, f64::INFINITY),
        }
    }

    /// Truncated ℓ1 penalty: unit weight on `working` and zero weight with
    /// box radius `mu` on its complement.
    pub fn truncated_l1(n: usize, lambda: f64, working: &[bool], mu: f64) -> Self {
        assert_eq!(working.len(), n, "working-set mask has the wrong length");
        let weights = DVector::from_iterator(n, working.iter().map(|&t| if t { 1.0 } else { 0.0 }));
        let box_radius =
            DVector::from_iterator(n, working.iter().map(|&t| if t { f64::INFINITY } else { mu }));
        Self {
            lambda,
            weights,
            tilt: DVector::zeros(n),
            box_radius,
        }
    }

    pub fn with_tilt(mut self, tilt: DVector<f64>) -> Self {
        self.tilt = tilt;
        self
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        check_len(n, self.tilt.len())?;
        check_len(n, self.box_radius.len())?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be a finite nonnegative number, got {}", self.lambda)));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        if self.tilt.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("tilt must be finite".into()));
        }
        if self.box_radius.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidArgument("box radii must be positive".into()));
        }
        Ok(())
    }

    /// True when the penalty has the truncated-ℓ1 shape (binary weights, no tilt).
    pub fn is_truncated_l1(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0 || w == 1.0) && self.tilt.iter().all(|&v| v == 0.0)
    }

    /// Penalty value at `x`; `+∞` outside the box.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let mut total = 0.0;
        for i in 0..x.len() {
            let xi = x[i];
            if self.box_radius[i].is_finite() && xi.abs() > self.box_radius[i] * (1.0 + 1e-12) {
                return f64::INFINITY;
            }
            total += self.lambda * self.weights[i] * xi.abs() - self.tilt[i] * xi;
        }
        total
    }
}

/// How the per-subproblem inexactness targets are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarsigmaSchedule {
    /// Fixed inner tolerance; the realized inexactness is only recorded.
    ImpliedByInnerTolerance,
    /// Explicit nonincreasing targets `ς_0, ς_1, …` (the last entry repeats).
    Targets(Vec<f64>),
}

/// Options for the sequential truncated-ℓ1 driver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    pub lambda: f64,
    pub rho: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub inner_tolerance: f64,
    pub varsigma_schedule: VarsigmaSchedule,
    pub max_outer: usize,
    /// Relative-change stopping rule; `None` disables it.
    pub rel_change_tol: Option<f64>,
}

impl SolverOptions {
    /// Defaults used in the experiments: `μ = 10³`, `ϱ = 0.2`, `ε = 0`.
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            rho: 0.2,
            mu: 1e3,
            epsilon: 0.0,
            inner_tolerance: 1e-6,
            varsigma_schedule: VarsigmaSchedule::ImpliedByInnerTolerance,
            max_outer: 50,
            rel_change_tol: Some(1e-3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad("rho must lie in (0, 1]");
        }
        if !(self.mu > 0.0) {
            return bad("mu must be positive");
        }
        if !(self.epsilon >= 0.0) {
            return bad("epsilon must be nonnegative");
        }
        if !(self.inner_tolerance > 0.0) {
            return bad("inner tolerance must be positive");
        }
        if self.max_outer == 0 {
            return bad("max_outer must be at least 1");
        }
        if let Some(t) = self.rel_change_tol {
            if !(t > 0.0) {
                return bad("relative-change tolerance must be positive");
            }
        }
        if let VarsigmaSchedule::Targets(targets) = &self.varsigma_schedule {
            if targets.is_empty() || !(targets[0] < 1.0) {
                return bad("varsigma schedule must start below 1");
            }
            if targets.iter().any(|t| !(*t >= 0.0)) || targets.windows(2).any(|w| w[1] > w[0]) {
                return bad("varsigma schedule must be nonnegative and nonincreasing");
            }
        }
        Ok(())
    }
}

/// Counters and certificates from one inner solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnerStats {
    pub alm_iterations: usize,
    pub newton_iterations: usize,
    pub cg_iterations: usize,
    pub kkt_residual: f64,
    pub status: SsnalStatus,
    /// Number of tightened re-solves needed to meet an inexactness target.
    pub resolves: usize,
}

/// One outer iteration of a sequential relaxation method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    #[serde(with = "vec_serde")]
    pub x: DVector<f64>,
    /// Indices identified at this iteration (empty on the terminal record).
    pub selected: Vec<usize>,
    /// Working set after this iteration.
    pub working_set: Vec<usize>,
    pub realized_inexactness: f64,
    pub inner: Option<InnerStats>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceStatus {
    ConvergedByEpsilon,
    ConvergedByRelativeChange,
    WorkingSetEmpty,
    MaxIterations,
}

/// Full history of an outer solver run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveTrace {
    pub n: usize,
    pub iterates: Vec<IterationRecord>,
    #[serde(with = "vec_serde")]
    pub final_x: DVector<f64>,
    pub status: TraceStatus,
}

impl SolveTrace {
    /// Number of records that required a subproblem solve.
    pub fn subproblem_solves(&self) -> usize {
        self.iterates.iter().filter(|r| r.inner.is_some()).count()
    }

    pub fn max_inexactness(&self) -> f64 {
        self.iterates
            .iter()
            .filter(|r| r.inner.is_some())
            .map(|r| r.realized_inexactness)
            .fold(0.0, f64::max)
    }

    /// Working set entering the last recorded iteration.
    pub fn terminal_working_set(&self) -> Vec<usize> {
        match self.iterates.last() {
            None => (0..self.n).collect(),
            Some(rec) => {
                let mut set: Vec<usize> = rec.working_set.iter().chain(&rec.selected).copied().collect();
                set.sort_unstable();
                set
            }
        }
    }

    /// Checks the chain `T^k = T^{k-1} \ I^k`, `T^0 = [n]`, and that the
    /// identified sets are disjoint and nonempty on non-terminal records.
    pub fn validate_chain(&self) -> Result<()> {
        let mut working: Vec<usize> = (0..self.n).collect();
        let mut seen = vec![false; self.n];
        let last = self.iterates.len().saturating_sub(1);
        for (pos, rec) in self.iterates.iter().enumerate() {
            let fail = |msg: String| Err(Error::InvalidArgument(format!("iteration {}: {msg}", rec.k)));
            if rec.k != pos + 1 {
                return fail(format!("expected index {}", pos + 1));
            }
            if pos != last && rec.selected.is_empty() {
                return fail("non-terminal iteration selected nothing".into());
            }
            for &i in &rec.selected {
                if i >= self.n || seen[i] {
                    return fail(format!("index {i} selected twice or out of range"));
                }
                if !working.contains(&i) {
                    return fail(format!("index {i} selected outside the working set"));
                }
                seen[i] = true;
            }
            working.retain(|i| !rec.selected.contains(i));
            if working != rec.working_set {
                return fail("working set does not equal previous set minus selection".into());
            }
        }
        Ok(())
    }
}

/// `(1/2m)‖Ax − b‖²`.
pub fn loss(instance: &ProblemInstance, x: &DVector<f64>) -> Result<f64> {
    check_len(instance.n(), x.len())?;
    let r = instance.a() * x - instance.b();
    Ok(r.norm_squared() / (2.0 * instance.m() as f64))
}

/// `‖x − x̄‖ / ‖x̄‖`.
pub fn relative_error(x: &DVector<f64>, truth: &GroundTruth) -> Result<f64> {
    check_len(truth.x_bar.len(), x.len())?;
    let denom = truth.x_bar.norm();
    if denom == 0.0 {
        return Err(Error::InvalidArgument("true vector is zero".into()));
    }
    Ok((x - &truth.x_bar).norm() / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportMetrics {
    pub top_r_match: bool,
    pub exact_support_match: bool,
    pub nnz: usize,
}

/// Default threshold below which an entry is not counted as nonzero.
pub fn nnz_threshold(x: &DVector<f64>) -> f64 {
    1e-8 * (1.0 + x.amax())
}

/// Indices of the `r` largest magnitudes, ties broken by smaller index, sorted ascending.
pub fn top_r_support(x: &DVector<f64>, r: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    idx.truncate(r);
    idx.sort_unstable();
    idx
}

pub fn support_metrics(x: &DVector<f64>, truth: &GroundTruth) -> SupportMetrics {
    let top = top_r_support(x, truth.r());
    let exact: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    let thr = nnz_threshold(x);
    SupportMetrics {
        top_r_match: top == truth.support,
        exact_support_match: exact == truth.support,
        nnz: x.iter().filter(|v| v.abs() > thr).count(),
    }
}
