//! Drift and diffusion coefficients with their regularity metadata.
//!
//! A drift splits as `b = b_A + b_H`: a bounded-variation-style part built
//! from bounded monotone pieces combined by sums, scalar multiples and
//! products, plus a bounded Hölder-continuous part. The diffusion is
//! uniformly elliptic, globally bounded and (1/2 + alpha)-Hölder for some
//! alpha in [0, 1/2]. All declared constants (sup bounds, Hölder norms,
//! L1 norms, ellipticity) travel with the coefficients so downstream code
//! can compute the transform constant and theoretical rates, and so the
//! sampling validator can cross-check the declarations.
//!
//! Everything here is immutable after construction and cheap to clone
//! (closures are shared), so coefficient evaluation is safe to call from
//! any number of workers.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{EmlabError, Result};
use crate::numerics::quad;

/// Shared pointwise evaluator.
pub type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Slack allowed when checking declared inequalities by sampling.
pub const VALIDATION_SLACK: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Hölder part
// ---------------------------------------------------------------------------

/// A bounded beta-Hölder function together with its declared norm
/// (sup norm plus Hölder seminorm).
#[derive(Clone)]
pub struct HoelderFn {
    eval: EvalFn,
    beta: f64,
    hoelder_norm: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for HoelderFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HoelderFn")
            .field("beta", &self.beta)
            .field("hoelder_norm", &self.hoelder_norm)
            .finish_non_exhaustive()
    }
}

impl HoelderFn {
    /// `breakpoints` lists kink locations that quadrature meshes should
    /// not straddle.
    pub fn new(
        eval: EvalFn,
        beta: f64,
        hoelder_norm: f64,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(EmlabError::InvalidParameter {
                name: "beta",
                reason: format!("must lie in (0, 1], got {beta}"),
            });
        }
        if !(hoelder_norm.is_finite() && hoelder_norm >= 0.0) {
            return Err(EmlabError::InvalidParameter {
                name: "hoelder_norm",
                reason: format!("must be finite and nonnegative, got {hoelder_norm}"),
            });
        }
        Ok(Self {
            eval,
            beta,
            hoelder_norm,
            breakpoints,
        })
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hoelder_norm(&self) -> f64 {
        self.hoelder_norm
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

// ---------------------------------------------------------------------------
// Class-A part: bounded monotone pieces under sums, scales and products
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// A bounded monotone primitive.
#[derive(Clone)]
pub struct MonotonePiece {
    eval: EvalFn,
    bound: f64,
    direction: Monotonicity,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for MonotonePiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotonePiece")
            .field("bound", &self.bound)
            .field("direction", &self.direction)
            .finish_non_exhaustive()
    }
}

impl MonotonePiece {
    pub fn new(
        eval: EvalFn,
        bound: f64,
        direction: Monotonicity,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(EmlabError::InvalidParameter {
                name: "bound",
                reason: format!("must be finite and nonnegative, got {bound}"),
            });
        }
        Ok(Self {
            eval,
            bound,
            direction,
            breakpoints,
        })
    }

    /// Indicator of `[a, inf)`. The boundary is closed: the indicator is 1
    /// at the jump itself, fixed for determinism (the dynamics only see the
    /// coefficient up to a Lebesgue-null set).
    pub fn step_ge(a: f64) -> Self {
        Self {
            eval: Arc::new(move |x| if x >= a { 1.0 } else { 0.0 }),
            bound: 1.0,
            direction: Monotonicity::Increasing,
            breakpoints: vec![a],
        }
    }

    /// Indicator of `(a, inf)` (open at the jump).
    pub fn step_gt(a: f64) -> Self {
        Self {
            eval: Arc::new(move |x| if x > a { 1.0 } else { 0.0 }),
            bound: 1.0,
            direction: Monotonicity::Increasing,
            breakpoints: vec![a],
        }
    }

    /// Indicator of `(-inf, a)`.
    pub fn step_lt(a: f64) -> Self {
        Self {
            eval: Arc::new(move |x| if x < a { 1.0 } else { 0.0 }),
            bound: 1.0,
            direction: Monotonicity::Decreasing,
            breakpoints: vec![a],
        }
    }

    /// `-sign(x) * (|x| /\ 1)`, i.e. minus the clamp of `x` to `[-1, 1]`;
    /// decreasing with bound 1 and kinks at -1 and 1.
    pub fn neg_unit_clamp() -> Self {
        Self {
            eval: Arc::new(|x| -x.clamp(-1.0, 1.0)),
            bound: 1.0,
            direction: Monotonicity::Decreasing,
            breakpoints: vec![-1.0, 1.0],
        }
    }

    /// `sign(x)` with `sign(0) = 0`; increasing with bound 1.
    pub fn sign() -> Self {
        Self {
            eval: Arc::new(|x| {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }),
            bound: 1.0,
            direction: Monotonicity::Increasing,
            breakpoints: vec![0.0],
        }
    }

    /// Smoothstep ramp rising from 0 at `lo` to 1 at `hi` (C^1).
    pub fn ramp_up(lo: f64, hi: f64) -> Self {
        assert!(lo < hi);
        Self {
            eval: Arc::new(move |x| smoothstep((x - lo) / (hi - lo))),
            bound: 1.0,
            direction: Monotonicity::Increasing,
            breakpoints: vec![lo, hi],
        }
    }

    /// Smoothstep ramp falling from 1 at `lo` to 0 at `hi` (C^1).
    pub fn ramp_down(lo: f64, hi: f64) -> Self {
        assert!(lo < hi);
        Self {
            eval: Arc::new(move |x| 1.0 - smoothstep((x - lo) / (hi - lo))),
            bound: 1.0,
            direction: Monotonicity::Decreasing,
            breakpoints: vec![lo, hi],
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn direction(&self) -> Monotonicity {
        self.direction
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Combination tree over monotone pieces. Only the closure operations of
/// the class are representable: sums, scalar multiples and products.
#[derive(Clone, Debug)]
enum Expr {
    Piece(usize),
    Scale(f64, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn eval(&self, pieces: &[MonotonePiece], x: f64) -> f64 {
        match self {
            Expr::Piece(i) => pieces[*i].value(x),
            Expr::Scale(c, e) => c * e.eval(pieces, x),
            Expr::Sum(a, b) => a.eval(pieces, x) + b.eval(pieces, x),
            Expr::Product(a, b) => a.eval(pieces, x) * b.eval(pieces, x),
        }
    }

    fn shift(self, offset: usize) -> Expr {
        match self {
            Expr::Piece(i) => Expr::Piece(i + offset),
            Expr::Scale(c, e) => Expr::Scale(c, Box::new(e.shift(offset))),
            Expr::Sum(a, b) => Expr::Sum(Box::new(a.shift(offset)), Box::new(b.shift(offset))),
            Expr::Product(a, b) => {
                Expr::Product(Box::new(a.shift(offset)), Box::new(b.shift(offset)))
            }
        }
    }
}

/// A bounded measurable function assembled from bounded monotone pieces by
/// sums, scalar multiples and products, together with declared bounds.
#[derive(Clone)]
pub struct ClassAFn {
    pieces: Vec<MonotonePiece>,
    expr: Expr,
    class_a_norm: f64,
    sup_bound: f64,
}

impl fmt::Debug for ClassAFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassAFn")
            .field("pieces", &self.pieces.len())
            .field("class_a_norm", &self.class_a_norm)
            .field("sup_bound", &self.sup_bound)
            .finish_non_exhaustive()
    }
}

impl ClassAFn {
    pub fn from_piece(piece: MonotonePiece) -> Self {
        let bound = piece.bound();
        Self {
            pieces: vec![piece],
            expr: Expr::Piece(0),
            class_a_norm: bound,
            sup_bound: bound,
        }
    }

    pub fn scale(mut self, c: f64) -> Self {
        self.expr = Expr::Scale(c, Box::new(self.expr));
        self.class_a_norm *= c.abs();
        self.sup_bound *= c.abs();
        self
    }

    pub fn sum(mut self, other: ClassAFn) -> Self {
        let offset = self.pieces.len();
        self.pieces.extend(other.pieces);
        self.expr = Expr::Sum(Box::new(self.expr), Box::new(other.expr.shift(offset)));
        self.class_a_norm += other.class_a_norm;
        self.sup_bound += other.sup_bound;
        self
    }

    /// Product of two members. The sup bound multiplies exactly; the class
    /// norm of a product is only known up to a constant, declared here as
    /// three times the product of the factor norms.
    pub fn product(mut self, other: ClassAFn) -> Self {
        let offset = self.pieces.len();
        self.pieces.extend(other.pieces);
        self.expr = Expr::Product(Box::new(self.expr), Box::new(other.expr.shift(offset)));
        self.class_a_norm = 3.0 * self.class_a_norm * other.class_a_norm;
        self.sup_bound *= other.sup_bound;
        self
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.expr.eval(&self.pieces, x)
    }

    pub fn pieces(&self) -> &[MonotonePiece] {
        &self.pieces
    }

    pub fn class_a_norm(&self) -> f64 {
        self.class_a_norm
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| p.breakpoints.iter().copied())
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

// ---------------------------------------------------------------------------
// Drift
// ---------------------------------------------------------------------------

/// Declared integrability of a drift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum L1Norm {
    Finite(f64),
    NotIntegrable,
}

impl L1Norm {
    pub fn finite(&self) -> Option<f64> {
        match self {
            L1Norm::Finite(v) => Some(*v),
            L1Norm::NotIntegrable => None,
        }
    }
}

impl fmt::Display for L1Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            L1Norm::Finite(v) => write!(f, "{v}"),
            L1Norm::NotIntegrable => write!(f, "not integrable"),
        }
    }
}

/// Drift `b = b_A + b_H` with declared sup bound and L1 norm.
#[derive(Clone)]
pub struct DriftSpec {
    class_a_part: Option<ClassAFn>,
    hoelder_part: Option<HoelderFn>,
    sup_bound: f64,
    l1_norm: L1Norm,
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftSpec")
            .field("class_a_part", &self.class_a_part)
            .field("hoelder_part", &self.hoelder_part)
            .field("sup_bound", &self.sup_bound)
            .field("l1_norm", &self.l1_norm)
            .finish()
    }
}

impl DriftSpec {
    pub fn new(
        class_a_part: Option<ClassAFn>,
        hoelder_part: Option<HoelderFn>,
        sup_bound: f64,
        l1_norm: L1Norm,
    ) -> Result<Self> {
        if !(sup_bound.is_finite() && sup_bound >= 0.0) {
            return Err(EmlabError::InvalidParameter {
                name: "sup_bound",
                reason: format!("must be finite and nonnegative, got {sup_bound}"),
            });
        }
        if let L1Norm::Finite(v) = l1_norm {
            if !(v.is_finite() && v >= 0.0) {
                return Err(EmlabError::InvalidParameter {
                    name: "l1_norm",
                    reason: format!("must be finite and nonnegative, got {v}"),
                });
            }
        }
        Ok(Self {
            class_a_part,
            hoelder_part,
            sup_bound,
            l1_norm,
        })
    }

    pub fn zero() -> Self {
        Self {
            class_a_part: None,
            hoelder_part: None,
            sup_bound: 0.0,
            l1_norm: L1Norm::Finite(0.0),
        }
    }

    /// Pointwise drift value `b_A(x) + b_H(x)`; total on the real line.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let a = self.class_a_part.as_ref().map_or(0.0, |p| p.value(x));
        let h = self.hoelder_part.as_ref().map_or(0.0, |p| p.value(x));
        a + h
    }

    pub fn class_a_part(&self) -> Option<&ClassAFn> {
        self.class_a_part.as_ref()
    }

    pub fn hoelder_part(&self) -> Option<&HoelderFn> {
        self.hoelder_part.as_ref()
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn l1_norm(&self) -> L1Norm {
        self.l1_norm
    }

    /// Hölder exponent used in rate statements: the declared beta of the
    /// Hölder part, or 1 when the drift has no Hölder part (the zero
    /// function is Lipschitz).
    pub fn effective_beta(&self) -> f64 {
        self.hoelder_part.as_ref().map_or(1.0, |h| h.beta())
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = self
            .class_a_part
            .as_ref()
            .map_or_else(Vec::new, |p| p.breakpoints());
        if let Some(h) = &self.hoelder_part {
            out.extend_from_slice(h.breakpoints());
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

// ---------------------------------------------------------------------------
// Diffusion
// ---------------------------------------------------------------------------

/// Uniformly elliptic, bounded, (1/2 + alpha)-Hölder diffusion.
///
/// Declared constants: `1/k_sigma^2 <= sigma^2 <= k_sigma^2` and
/// `|sigma(x) - sigma(y)| <= k_sigma |x - y|^(1/2 + alpha)`. A constant
/// diffusion admits `k_sigma = 1` exactly, which is accepted.
#[derive(Clone)]
pub struct DiffusionSpec {
    eval: EvalFn,
    k_sigma: f64,
    alpha: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("k_sigma", &self.k_sigma)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl DiffusionSpec {
    pub fn new(eval: EvalFn, k_sigma: f64, alpha: f64, breakpoints: Vec<f64>) -> Result<Self> {
        if !(k_sigma.is_finite() && k_sigma >= 1.0) {
            return Err(EmlabError::InvalidParameter {
                name: "k_sigma",
                reason: format!("must be >= 1, got {k_sigma}"),
            });
        }
        if !(0.0..=0.5).contains(&alpha) {
            return Err(EmlabError::InvalidParameter {
                name: "alpha",
                reason: format!("must lie in [0, 1/2], got {alpha}"),
            });
        }
        Ok(Self {
            eval,
            k_sigma,
            alpha,
            breakpoints,
        })
    }

    /// Constant unit diffusion.
    pub fn unit() -> Self {
        Self {
            eval: Arc::new(|_| 1.0),
            k_sigma: 1.0,
            alpha: 0.5,
            breakpoints: Vec::new(),
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn k_sigma(&self) -> f64 {
        self.k_sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

/// A fully specified scalar problem: coefficients, start point, horizon.
#[derive(Clone)]
pub struct SdeProblem {
    pub drift: DriftSpec,
    pub diffusion: DiffusionSpec,
    pub x0: f64,
    pub horizon: f64,
    pub label: String,
}

impl SdeProblem {
    pub fn new(
        drift: DriftSpec,
        diffusion: DiffusionSpec,
        x0: f64,
        horizon: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(EmlabError::InvalidParameter {
                name: "horizon",
                reason: format!("must be positive, got {horizon}"),
            });
        }
        if !x0.is_finite() {
            return Err(EmlabError::InvalidParameter {
                name: "x0",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            drift,
            diffusion,
            x0,
            horizon,
            label: label.into(),
        })
    }

    /// Symmetric interval around the start that paths leave only with
    /// Gaussian-tail probability below 1e-14: drift range plus eight
    /// diffusion standard deviations.
    pub fn default_working_interval(&self) -> (f64, f64) {
        let w = self.drift.sup_bound() * self.horizon
            + 8.0 * self.diffusion.k_sigma() * self.horizon.sqrt();
        (self.x0 - w, self.x0 + w)
    }

    /// All declared coefficient breakpoints (drift jumps/kinks plus
    /// diffusion kinks), sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = self.drift.breakpoints();
        out.extend_from_slice(self.diffusion.breakpoints());
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

// ---------------------------------------------------------------------------
// Drift truncation
// ---------------------------------------------------------------------------

/// The C^1 cutoff used by [`truncate_drift`]: 1 on `[-m, m]`, smoothstep
/// ramps of width 2 down to 0 outside `[-(m+2), m+2]`. Its derivative is
/// bounded by 3/4 and the area under it is exactly `2m + 2`.
pub fn cutoff_value(m: u32, x: f64) -> f64 {
    let a = x.abs();
    let m = f64::from(m);
    if a <= m {
        1.0
    } else if a >= m + 2.0 {
        0.0
    } else {
        1.0 - smoothstep((a - m) / 2.0)
    }
}

/// Multiply the drift by the compact cutoff `g_m`, producing an integrable
/// drift with declared L1 norm `(2m + 2) * sup_bound` and unchanged sup
/// bound. The class part is multiplied inside the class (cutoff ramps are
/// monotone pieces); the Hölder part keeps its exponent with the declared
/// norm doubled.
pub fn truncate_drift(spec: &DriftSpec, m: u32) -> Result<DriftSpec> {
    if m < 1 {
        return Err(EmlabError::InvalidParameter {
            name: "m",
            reason: "must be at least 1".into(),
        });
    }
    let mf = f64::from(m);
    let (lo, hi) = (-(mf + 2.0), mf + 2.0);

    let cutoff_class = ClassAFn::from_piece(MonotonePiece::ramp_up(lo, -mf))
        .product(ClassAFn::from_piece(MonotonePiece::ramp_down(mf, hi)));

    let class_a_part = spec.class_a_part().map(|p| {
        let mut out = p.clone().product(cutoff_class.clone());
        // Declared bounds for the cutoff product: sup unchanged, class
        // norm at most three times the original.
        out.sup_bound = p.sup_bound();
        out.class_a_norm = 3.0 * p.class_a_norm();
        out
    });

    let hoelder_part = match spec.hoelder_part() {
        Some(h) => {
            let inner = h.clone();
            let mut bps = inner.breakpoints().to_vec();
            bps.extend_from_slice(&[lo, -mf, mf, hi]);
            Some(HoelderFn::new(
                Arc::new(move |x| inner.value(x) * cutoff_value(m, x)),
                h.beta(),
                2.0 * h.hoelder_norm(),
                bps,
            )?)
        }
        None => None,
    };

    DriftSpec::new(
        class_a_part,
        hoelder_part,
        spec.sup_bound(),
        L1Norm::Finite((2.0 * mf + 2.0) * spec.sup_bound()),
    )
}

// ---------------------------------------------------------------------------
// Gallery
// ---------------------------------------------------------------------------

/// Optional parameter overrides for gallery problems. Unknown problems
/// ignore keys that do not apply to them.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalleryParams {
    /// Drift jump height (G1).
    pub kappa: Option<f64>,
    /// Hölder exponent of the drift (G3).
    pub beta: Option<f64>,
    /// Drift amplitude (G3).
    pub c: Option<f64>,
    /// Diffusion Hölder offset (G4).
    pub alpha: Option<f64>,
    /// Truncation radius (G2).
    pub m: Option<u32>,
    pub x0: Option<f64>,
    pub horizon: Option<f64>,
}

const GALLERY: [(&str, &str); 6] = [
    ("G1", "step drift kappa*1_{x>=0}, unit diffusion (not integrable)"),
    ("G2", "mean-reverting clamp drift cut to [-4, 4], unit diffusion"),
    ("G3", "Hölder bump drift c*(1-|x|)+^beta, unit diffusion"),
    ("G4", "box drift 1_{0<x<1}, Hölder diffusion 1+(|x|/\\1)^(1/2+alpha)"),
    ("G5", "zero drift, unit diffusion (scheme is exact)"),
    ("G6", "Lipschitz drift -tanh(x), unit diffusion (not integrable)"),
];

/// Names and one-line descriptions of the built-in problems.
pub fn gallery_names() -> &'static [(&'static str, &'static str)] {
    &GALLERY
}

/// Look up a gallery problem with default parameters.
pub fn gallery_problem(name: &str) -> Result<SdeProblem> {
    gallery_problem_with(name, &GalleryParams::default())
}

/// Look up a gallery problem with parameter overrides.
pub fn gallery_problem_with(name: &str, params: &GalleryParams) -> Result<SdeProblem> {
    let x0 = params.x0.unwrap_or(0.0);
    let horizon = params.horizon.unwrap_or(1.0);
    match name {
        "G1" => {
            let kappa = params.kappa.unwrap_or(1.0);
            let drift = DriftSpec::new(
                Some(ClassAFn::from_piece(MonotonePiece::step_ge(0.0)).scale(kappa)),
                None,
                kappa.abs(),
                L1Norm::NotIntegrable,
            )?;
            SdeProblem::new(drift, DiffusionSpec::unit(), x0, horizon, "G1")
        }
        "G2" => {
            let m = params.m.unwrap_or(2);
            let base = DriftSpec::new(
                Some(ClassAFn::from_piece(MonotonePiece::neg_unit_clamp())),
                None,
                1.0,
                L1Norm::NotIntegrable,
            )?;
            let drift = truncate_drift(&base, m)?;
            SdeProblem::new(drift, DiffusionSpec::unit(), x0, horizon, "G2")
        }
        "G3" => {
            let beta = params.beta.unwrap_or(0.5);
            let c = params.c.unwrap_or(1.0);
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(EmlabError::InvalidParameter {
                    name: "beta",
                    reason: format!("must lie in (0, 1], got {beta}"),
                });
            }
            let hoelder = HoelderFn::new(
                Arc::new(move |x: f64| c * (1.0 - x.abs()).max(0.0).powf(beta)),
                beta,
                2.0 * c.abs(),
                vec![-1.0, 0.0, 1.0],
            )?;
            let drift = DriftSpec::new(
                None,
                Some(hoelder),
                c.abs(),
                L1Norm::Finite(2.0 * c.abs() / (beta + 1.0)),
            )?;
            SdeProblem::new(drift, DiffusionSpec::unit(), x0, horizon, "G3")
        }
        "G4" => {
            let alpha = params.alpha.unwrap_or(0.25);
            if !(0.0..=0.5).contains(&alpha) {
                return Err(EmlabError::InvalidParameter {
                    name: "alpha",
                    reason: format!("must lie in [0, 1/2], got {alpha}"),
                });
            }
            let drift = DriftSpec::new(
                Some(
                    ClassAFn::from_piece(MonotonePiece::step_gt(0.0))
                        .product(ClassAFn::from_piece(MonotonePiece::step_lt(1.0))),
                ),
                None,
                1.0,
                L1Norm::Finite(1.0),
            )?;
            let theta = 0.5 + alpha;
            let diffusion = DiffusionSpec::new(
                Arc::new(move |x: f64| 1.0 + x.abs().min(1.0).powf(theta)),
                2.0,
                alpha,
                vec![-1.0, 0.0, 1.0],
            )?;
            SdeProblem::new(drift, diffusion, x0, horizon, "G4")
        }
        "G5" => SdeProblem::new(DriftSpec::zero(), DiffusionSpec::unit(), x0, horizon, "G5"),
        "G6" => {
            let hoelder = HoelderFn::new(Arc::new(|x: f64| -x.tanh()), 1.0, 2.0, Vec::new())?;
            let drift = DriftSpec::new(None, Some(hoelder), 1.0, L1Norm::NotIntegrable)?;
            SdeProblem::new(drift, DiffusionSpec::unit(), x0, horizon, "G6")
        }
        _ => Err(EmlabError::UnknownProblem {
            name: name.to_string(),
            known: GALLERY
                .iter()
                .map(|(n, _)| *n)
                .collect::<Vec<_>>()
                .join(", "),
        }),
    }
}

// ---------------------------------------------------------------------------
// Sampling validator
// ---------------------------------------------------------------------------

/// Outcome of one sampled invariant check.
#[derive(Clone, Debug)]
pub struct RegularityCheck {
    pub name: String,
    pub passed: bool,
    /// Worst violating pair and the (negative) slack it achieved.
    pub worst: Option<(f64, f64, f64)>,
}

/// Validation report; advisory, never aborts a simulation.
#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub checks: Vec<RegularityCheck>,
    pub samples: u64,
}

impl RegularityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            write!(f, "[{status}] {}", c.name)?;
            if let Some((x, y, slack)) = c.worst {
                if !c.passed {
                    write!(f, "  worst pair ({x:.6}, {y:.6}), slack {slack:.3e}")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct CheckAcc {
    name: String,
    worst_slack: f64,
    worst_pair: (f64, f64),
    any: bool,
}

impl CheckAcc {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            worst_slack: f64::INFINITY,
            worst_pair: (f64::NAN, f64::NAN),
            any: false,
        }
    }

    /// Record one inequality with `slack >= -VALIDATION_SLACK` required.
    fn record(&mut self, x: f64, y: f64, slack: f64) {
        self.any = true;
        if slack < self.worst_slack {
            self.worst_slack = slack;
            self.worst_pair = (x, y);
        }
    }

    fn finish(self) -> RegularityCheck {
        RegularityCheck {
            passed: !self.any || self.worst_slack >= -VALIDATION_SLACK,
            worst: self
                .any
                .then_some((self.worst_pair.0, self.worst_pair.1, self.worst_slack)),
            name: self.name,
        }
    }
}

/// Check the declared coefficient bounds by sampling point pairs from a
/// heavy-tailed proposal: uniform on [-10, 10] mixed with Cauchy tails,
/// with near-coincident partners mixed in to probe the Hölder moduli.
pub fn verify_regularity(problem: &SdeProblem, samples: u64, seed: u64) -> Result<RegularityReport> {
    if samples < 2 {
        return Err(EmlabError::InvalidParameter {
            name: "samples",
            reason: "need at least 2 sampled pairs".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw_point = |rng: &mut ChaCha8Rng| -> f64 {
        if rng.random::<f64>() < 0.75 {
            rng.random_range(-10.0..10.0)
        } else {
            // Cauchy tail, clipped so powf stays finite.
            let u: f64 = rng.random_range(-0.499..0.499);
            ((std::f64::consts::PI * u).tan() * 2.0).clamp(-1e6, 1e6)
        }
    };

    let k = problem.diffusion.k_sigma();
    let theta = 0.5 + problem.diffusion.alpha();
    let mut ellipticity = CheckAcc::new(format!(
        "ellipticity and bound: 1/{k}^2 <= sigma^2 <= {k}^2"
    ));
    let mut sigma_hoelder = CheckAcc::new(format!(
        "diffusion modulus: |sigma(x)-sigma(y)| <= {k} |x-y|^{theta}"
    ));
    let mut drift_bound = CheckAcc::new(format!(
        "drift bound: |b(x)| <= {}",
        problem.drift.sup_bound()
    ));
    let mut hoelder_bound = CheckAcc::new("Hölder part bound");
    let mut hoelder_modulus = CheckAcc::new("Hölder part modulus");
    let mut class_bound = CheckAcc::new("class part bound");
    let mut monotone = CheckAcc::new("class pieces monotone");

    for _ in 0..samples {
        let x = draw_point(&mut rng);
        // Partner: mostly a local perturbation, sometimes independent.
        let y = match rng.random_range(0u32..4) {
            0 => x + rng.random_range(-1e-3..1e-3),
            1 => x + rng.random_range(-1.0..1.0),
            _ => draw_point(&mut rng),
        };

        let (sx, sy) = (problem.diffusion.value(x), problem.diffusion.value(y));
        ellipticity.record(x, x, sx * sx - 1.0 / (k * k));
        ellipticity.record(x, x, k * k - sx * sx);
        let d = (x - y).abs();
        if d > 0.0 {
            sigma_hoelder.record(x, y, k * d.powf(theta) - (sx - sy).abs());
        }

        drift_bound.record(x, x, problem.drift.sup_bound() - problem.drift.value(x).abs());

        if let Some(h) = problem.drift.hoelder_part() {
            hoelder_bound.record(x, x, h.hoelder_norm() - h.value(x).abs());
            if d > 0.0 {
                hoelder_modulus.record(
                    x,
                    y,
                    h.hoelder_norm() * d.powf(h.beta()) - (h.value(x) - h.value(y)).abs(),
                );
            }
        }

        if let Some(a) = problem.drift.class_a_part() {
            class_bound.record(x, x, a.sup_bound() - a.value(x).abs());
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            for piece in a.pieces() {
                let (plo, phi) = (piece.value(lo), piece.value(hi));
                let slack = match piece.direction() {
                    Monotonicity::Increasing => phi - plo,
                    Monotonicity::Decreasing => plo - phi,
                };
                monotone.record(lo, hi, slack);
                monotone.record(x, x, piece.bound() - piece.value(x).abs());
            }
        }
    }

    let mut checks: Vec<RegularityCheck> = vec![
        ellipticity.finish(),
        sigma_hoelder.finish(),
        drift_bound.finish(),
        hoelder_bound.finish(),
        hoelder_modulus.finish(),
        class_bound.finish(),
        monotone.finish(),
    ];

    // Declared L1 norm vs quadrature of |b| over a wide interval.
    if let Some(declared) = problem.drift.l1_norm().finite() {
        let bps = problem.drift.breakpoints();
        let wide = bps
            .iter()
            .fold(12.0f64, |acc, &p| acc.max(p.abs() + 2.0));
        let drift = problem.drift.clone();
        let quad_l1 =
            quad::integrate_with_breakpoints(&|x| drift.value(x).abs(), -wide, wide, &bps, 1e-10);
        checks.push(RegularityCheck {
            name: format!("L1 norm: quadrature {quad_l1:.6} <= declared {declared}"),
            passed: quad_l1 <= declared + 1e-6,
            worst: Some((-wide, wide, declared - quad_l1)),
        });
    }

    Ok(RegularityReport { checks, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_drift_off_support_is_zero() {
        let p = gallery_problem("G1").unwrap();
        assert_eq!(p.drift.value(-1.0), 0.0);
    }

    #[test]
    fn step_drift_boundary_is_closed() {
        let p = gallery_problem("G1").unwrap();
        assert_eq!(p.drift.value(0.0), 1.0);
    }

    #[test]
    fn two_part_drift_sums_pointwise() {
        // b_A = -sign(x), b_H = (|x| /\ 1)^(1/2); at x = 4 the parts cancel.
        let class = ClassAFn::from_piece(MonotonePiece::sign()).scale(-1.0);
        let hoelder = HoelderFn::new(
            Arc::new(|x: f64| x.abs().min(1.0).sqrt()),
            0.5,
            2.0,
            vec![-1.0, 0.0, 1.0],
        )
        .unwrap();
        let drift = DriftSpec::new(Some(class), Some(hoelder), 2.0, L1Norm::NotIntegrable).unwrap();
        assert_eq!(drift.value(4.0), -1.0 + 1.0);
        assert_eq!(drift.value(0.25), 0.5 - 0.0);
    }

    #[test]
    fn constant_diffusion_passes_validation() {
        let problem = SdeProblem::new(
            DriftSpec::zero(),
            DiffusionSpec::new(Arc::new(|_| 1.0), 2.0, 0.5, vec![]).unwrap(),
            0.0,
            1.0,
            "const",
        )
        .unwrap();
        let report = verify_regularity(&problem, 2000, 7).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn clamped_affine_diffusion_passes_validation() {
        let problem = SdeProblem::new(
            DriftSpec::zero(),
            DiffusionSpec::new(
                Arc::new(|x: f64| 1.0 + x.abs().min(1.0)),
                2.0,
                0.5,
                vec![-1.0, 0.0, 1.0],
            )
            .unwrap(),
            0.0,
            1.0,
            "affine",
        )
        .unwrap();
        let report = verify_regularity(&problem, 2000, 11).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn unbounded_diffusion_fails_ellipticity() {
        let problem = SdeProblem::new(
            DriftSpec::zero(),
            DiffusionSpec::new(Arc::new(|x: f64| x), 2.0, 0.5, vec![]).unwrap(),
            0.0,
            1.0,
            "linear",
        )
        .unwrap();
        let report = verify_regularity(&problem, 2000, 13).unwrap();
        assert!(!report.passed());
        let ell = &report.checks[0];
        assert!(!ell.passed, "ellipticity must be the failing check");
    }

    #[test]
    fn cutoff_contract() {
        for m in [1u32, 3, 5] {
            let mf = f64::from(m);
            assert_eq!(cutoff_value(m, 0.0), 1.0);
            assert_eq!(cutoff_value(m, mf), 1.0);
            assert_eq!(cutoff_value(m, mf + 2.0), 0.0);
            assert_eq!(cutoff_value(m, -(mf + 2.0)), 0.0);
            assert_eq!(cutoff_value(m, mf + 5.0), 0.0);
            // Values stay inside [0, 1] on the ramp.
            for k in 0..200 {
                let x = mf + 2.0 * k as f64 / 199.0;
                let g = cutoff_value(m, x);
                assert!((0.0..=1.0).contains(&g));
            }
        }
    }

    #[test]
    fn cutoff_derivative_peaks_at_three_quarters() {
        // Finite differences across the ramp; max |g'| = (3/2)*(1/2) = 3/4.
        let m = 4u32;
        let h = 1e-6;
        let mut max_slope: f64 = 0.0;
        for k in 0..=4000 {
            let x = 3.5 + 3.0 * k as f64 / 4000.0;
            let slope = (cutoff_value(m, x + h) - cutoff_value(m, x - h)) / (2.0 * h);
            max_slope = max_slope.max(slope.abs());
        }
        assert!(max_slope <= 1.0 + 1e-6);
        assert!((max_slope - 0.75).abs() < 1e-3, "max slope {max_slope}");
    }

    #[test]
    fn truncation_matches_inside_and_vanishes_outside() {
        let p = gallery_problem("G1").unwrap();
        let m = 3u32;
        let truncated = truncate_drift(&p.drift, m).unwrap();
        for k in 0..400 {
            let x = -8.0 + 16.0 * k as f64 / 399.0;
            let g = truncated.value(x);
            if x.abs() <= 3.0 {
                assert_eq!(g, p.drift.value(x), "agree on the plateau, x={x}");
            }
            if x.abs() >= 5.0 {
                assert_eq!(g, 0.0, "vanish outside the support, x={x}");
            }
            assert!(g.abs() <= p.drift.sup_bound() + 1e-15);
        }
        assert_eq!(truncated.l1_norm(), L1Norm::Finite(8.0));
    }

    #[test]
    fn gallery_defaults() {
        let g5 = gallery_problem("G5").unwrap();
        assert_eq!(g5.drift.value(0.3), 0.0);
        assert_eq!(g5.diffusion.value(-2.0), 1.0);
        assert_eq!(g5.x0, 0.0);
        assert_eq!(g5.horizon, 1.0);

        let g1 = gallery_problem("G1").unwrap();
        assert_eq!(g1.drift.sup_bound(), 1.0);
        assert_eq!(g1.drift.l1_norm(), L1Norm::NotIntegrable);

        let g4 = gallery_problem("G4").unwrap();
        assert_eq!(g4.diffusion.alpha(), 0.25);
        assert_eq!(g4.diffusion.k_sigma(), 2.0);
        for k in 0..100 {
            let x = -3.0 + 6.0 * k as f64 / 99.0;
            let s = g4.diffusion.value(x);
            assert!((1.0..=2.0).contains(&s));
        }
    }

    #[test]
    fn unknown_gallery_name_lists_problems() {
        let err = gallery_problem("G9").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("G1") && msg.contains("G6"), "{msg}");
    }

    #[test]
    fn class_combinators_track_bounds() {
        let a = ClassAFn::from_piece(MonotonePiece::step_ge(0.0));
        let b = ClassAFn::from_piece(MonotonePiece::step_lt(1.0));
        let box_ind = a.product(b);
        assert_eq!(box_ind.sup_bound(), 1.0);
        assert_eq!(box_ind.value(0.5), 1.0);
        assert_eq!(box_ind.value(-0.5), 0.0);
        assert_eq!(box_ind.value(1.5), 0.0);

        let sum = ClassAFn::from_piece(MonotonePiece::sign())
            .scale(2.0)
            .sum(ClassAFn::from_piece(MonotonePiece::step_ge(0.0)));
        assert_eq!(sum.sup_bound(), 3.0);
        for k in 0..100 {
            let x = -5.0 + 10.0 * k as f64 / 99.0;
            assert!(sum.value(x).abs() <= sum.sup_bound());
        }
    }

    #[test]
    fn gallery_regularity_small_sample() {
        for (name, _) in gallery_names() {
            let p = gallery_problem(name).unwrap();
            let report = verify_regularity(&p, 2000, 42).unwrap();
            assert!(report.passed(), "{name}: {report}");
        }
    }
}
