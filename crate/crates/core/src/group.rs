//! Compact-group machinery: conjugacy-class quadrature, irreducible
//! characters and character coefficients of exponentiated actions.
//!
//! Supported groups are Z_N, U(1) and SU(2). Class functions are
//! parametrized by a single angle: the group element itself (as
//! `2πj/N` or `θ`) for the abelian groups, the rotation angle
//! `θ ∈ [0, π]` for SU(2). Class integration uses the equal-weight
//! trapezoid rule, which is spectrally accurate here because every
//! integrand is smooth and extends to an even periodic function; for
//! Z_N it is the exact N-point average.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numeric::Real;

/// Hard ceiling on quadrature nodes before giving up.
const NODE_BUDGET: u32 = 1 << 20;

/// Compact group with a one-parameter class space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    /// Cyclic group Z_N.
    Cyclic(u32),
    /// The circle group U(1).
    Circle,
    /// SU(2).
    Su2,
}

impl Group {
    /// Order of the center as far as twist sectors are concerned:
    /// N for Z_N, 2 for SU(2), `None` for the continuous U(1) sectors.
    pub fn center_order(self) -> Option<u32> {
        match self {
            Group::Cyclic(n) => Some(n),
            Group::Circle => None,
            Group::Su2 => Some(2),
        }
    }

    pub fn name(self) -> String {
        match self {
            Group::Cyclic(n) => format!("Z{n}"),
            Group::Circle => "U(1)".to_owned(),
            Group::Su2 => "SU(2)".to_owned(),
        }
    }

    /// Irreps in enumeration order: by |charge| for Z_N / U(1)
    /// (0, +1, -1, +2, ...), by increasing spin for SU(2). `cutoff`
    /// bounds the maximum |charge| resp. 2j.
    pub fn irreps(self, cutoff: u32) -> Vec<Irrep> {
        match self {
            Group::Cyclic(n) => {
                let half = (n / 2) as i64;
                let mut out = vec![Irrep::charge(self, 0)];
                for q in 1..=half.min(cutoff as i64) {
                    out.push(Irrep::charge(self, q));
                    // for even n the charge n/2 is its own conjugate mod n
                    if !(n % 2 == 0 && q == half) {
                        out.push(Irrep::charge(self, -q));
                    }
                }
                out
            }
            Group::Circle => {
                let mut out = vec![Irrep::charge(self, 0)];
                for q in 1..=cutoff as i64 {
                    out.push(Irrep::charge(self, q));
                    out.push(Irrep::charge(self, -q));
                }
                out
            }
            Group::Su2 => (0..=cutoff).map(Irrep::spin).collect(),
        }
    }

    pub fn trivial_irrep(self) -> Irrep {
        match self {
            Group::Su2 => Irrep::spin(0),
            _ => Irrep::charge(self, 0),
        }
    }
}

/// Label of an irreducible representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IrrepLabel {
    /// Integer charge for Z_N and U(1).
    Charge(i64),
    /// Twice the spin (so half-integer spins stay integral).
    TwiceSpin(u32),
}

/// An irreducible representation with its dimension and N-ality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Irrep {
    pub label: IrrepLabel,
    pub dim: u32,
    /// N-ality: charge mod N for Z_N, the charge itself for U(1),
    /// 2j mod 2 for SU(2). Zero exactly for center-blind irreps.
    pub n_ality: i64,
}

impl Irrep {
    pub fn charge(group: Group, q: i64) -> Self {
        let n_ality = match group {
            Group::Cyclic(n) => q.rem_euclid(n as i64),
            _ => q,
        };
        Irrep {
            label: IrrepLabel::Charge(q),
            dim: 1,
            n_ality,
        }
    }

    pub fn spin(twoj: u32) -> Self {
        Irrep {
            label: IrrepLabel::TwiceSpin(twoj),
            dim: twoj + 1,
            n_ality: (twoj % 2) as i64,
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.label, IrrepLabel::Charge(0) | IrrepLabel::TwiceSpin(0))
    }

    pub fn conjugate(&self) -> Self {
        match self.label {
            IrrepLabel::Charge(q) => Irrep {
                label: IrrepLabel::Charge(-q),
                dim: self.dim,
                n_ality: -self.n_ality,
            },
            // SU(2) irreps are self-conjugate
            IrrepLabel::TwiceSpin(_) => *self,
        }
    }

    /// Character evaluated on the class parameter.
    ///
    /// For SU(2) the sine ratio sin((2j+1)θ)/sin θ is evaluated through
    /// the Chebyshev recurrence U_{2j}(cos θ), which has no removable
    /// singularity at θ ∈ {0, π}.
    pub fn character<R: Real>(&self, theta: R) -> Complex<R> {
        match self.label {
            IrrepLabel::Charge(q) => {
                let phase = theta * R::from_i64(q).unwrap();
                Complex::new(phase.cos(), phase.sin())
            }
            IrrepLabel::TwiceSpin(twoj) => Complex::new(chebyshev_u(twoj, theta.cos()), R::zero()),
        }
    }
}

/// Chebyshev polynomial of the second kind, U_m(x).
fn chebyshev_u<R: Real>(m: u32, x: R) -> R {
    let mut prev = R::one();
    if m == 0 {
        return prev;
    }
    let mut cur = R::two() * x;
    for _ in 1..m {
        let next = R::two() * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// One-plaquette / one-bond class action; `exponent` is the θ-dependent
/// exponent of the Boltzmann factor e^{-S}.
#[derive(Clone)]
pub enum ClassAction<R: Real> {
    /// Wilson action: e^{β cos θ} (β Re U for U(1)/Z_N, (β/2) Tr U for SU(2)).
    Wilson { beta: R },
    /// Arbitrary class-invariant exponent w(θ); e^{-S} = e^{w(θ)}.
    Custom {
        beta: R,
        exponent: Arc<dyn Fn(R) -> R + Send + Sync>,
    },
}

impl<R: Real> ClassAction<R> {
    pub fn wilson(beta: R) -> Self {
        ClassAction::Wilson { beta }
    }

    pub fn custom(beta: R, exponent: impl Fn(R) -> R + Send + Sync + 'static) -> Self {
        ClassAction::Custom {
            beta,
            exponent: Arc::new(exponent),
        }
    }

    pub fn beta(&self) -> R {
        match self {
            ClassAction::Wilson { beta } => *beta,
            ClassAction::Custom { beta, .. } => *beta,
        }
    }

    pub fn boltzmann_exponent(&self, theta: R) -> R {
        match self {
            ClassAction::Wilson { beta } => *beta * theta.cos(),
            ClassAction::Custom { exponent, .. } => exponent(theta),
        }
    }

    pub fn is_wilson(&self) -> bool {
        matches!(self, ClassAction::Wilson { .. })
    }
}

/// Value returned by the quadrature routines.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T, R> {
    pub value: T,
    pub error_bound: R,
    pub nodes: u32,
}

/// Haar integral of a class function via class-measure quadrature.
///
/// The error bound is the difference between the last two refinement
/// levels; for Z_N the N-point average is exact and the bound is zero.
pub fn class_integral<R, F>(group: Group, f: F, tol: R) -> Result<QuadResult<Complex<R>, R>>
where
    R: Real,
    F: Fn(R) -> Complex<R>,
{
    class_integral_banded(group, f, tol, 0)
}

/// As [`class_integral`], with a caller-supplied bandwidth hint: the
/// initial trapezoid grid resolves frequencies up to `bandwidth`, so
/// oscillatory integrands (high-charge characters) cannot alias into a
/// spurious two-level agreement.
pub fn class_integral_banded<R, F>(
    group: Group,
    f: F,
    tol: R,
    bandwidth: u32,
) -> Result<QuadResult<Complex<R>, R>>
where
    R: Real,
    F: Fn(R) -> Complex<R>,
{
    if !(tol > R::zero()) {
        return Err(Error::InvalidSpec("quadrature tol must be > 0".into()));
    }
    let start = 2 * (bandwidth + 1).next_power_of_two().max(8);
    match group {
        Group::Cyclic(n) => {
            let mut acc = Complex::new(R::zero(), R::zero());
            for j in 0..n {
                let theta = R::two() * R::PI() * R::from_u32(j).unwrap() / R::from_u32(n).unwrap();
                acc = acc + f(theta);
            }
            let inv = R::one() / R::from_u32(n).unwrap();
            Ok(QuadResult {
                value: acc * inv,
                error_bound: R::zero(),
                nodes: n,
            })
        }
        Group::Circle => adaptive_trapezoid(tol, start, |n| circle_sum(n, &f)),
        Group::Su2 => adaptive_trapezoid(tol, start, |n| su2_sum(n, &f)),
    }
}

fn circle_sum<R: Real, F: Fn(R) -> Complex<R>>(n: u32, f: &F) -> Complex<R> {
    let mut acc = Complex::new(R::zero(), R::zero());
    let step = R::two() * R::PI() / R::from_u32(n).unwrap();
    for j in 0..n {
        acc = acc + f(step * R::from_u32(j).unwrap());
    }
    acc / R::from_u32(n).unwrap()
}

fn su2_sum<R: Real, F: Fn(R) -> Complex<R>>(n: u32, f: &F) -> Complex<R> {
    // ∫ (2/π) sin²θ f(θ) dθ over [0, π]; the weight kills the endpoints.
    let mut acc = Complex::new(R::zero(), R::zero());
    let step = R::PI() / R::from_u32(n).unwrap();
    for j in 1..n {
        let theta = step * R::from_u32(j).unwrap();
        let w = theta.sin();
        acc = acc + f(theta) * (w * w);
    }
    acc * (R::two() / R::from_u32(n).unwrap())
}

fn adaptive_trapezoid<R: Real>(
    tol: R,
    start: u32,
    level_sum: impl Fn(u32) -> Complex<R>,
) -> Result<QuadResult<Complex<R>, R>> {
    let mut n = start.max(16);
    let mut prev = level_sum(n);
    loop {
        n *= 2;
        let cur = level_sum(n);
        let err = (cur - prev).norm();
        if err <= tol {
            return Ok(QuadResult {
                value: cur,
                error_bound: err,
                nodes: n,
            });
        }
        if n >= NODE_BUDGET {
            return Err(Error::QuadratureFailure {
                estimate: cur.re.to_f64().unwrap_or(f64::NAN),
                error_bound: err.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        prev = cur;
    }
}

/// Character coefficient F_r = (1/d_r) ∫ dU e^{-S(U)} conj(χ_r(U)).
pub fn character_coefficient<R: Real>(
    group: Group,
    action: &ClassAction<R>,
    r: &Irrep,
    tol: R,
) -> Result<R> {
    let bandwidth = match r.label {
        IrrepLabel::Charge(q) => q.unsigned_abs() as u32,
        IrrepLabel::TwiceSpin(twoj) => twoj + 2,
    };
    let quad = class_integral_banded(
        group,
        |theta| {
            let w = action.boltzmann_exponent(theta).exp();
            r.character(theta).conj() * w
        },
        tol,
        bandwidth,
    )?;
    let dim = R::from_u32(r.dim).unwrap();
    let value = quad.value / dim;
    // real action + conjugation symmetry make F_r real
    let scale = value.norm().max(R::one());
    if value.im.abs() > R::lit(1e-10) * scale {
        return Err(Error::InternalConsistency(format!(
            "character coefficient has imaginary part {:e}",
            value.im.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(value.re)
}

/// Character coefficient of one irrep together with its normalization.
#[derive(Clone, Copy, Debug)]
pub struct CoeffEntry<R> {
    pub irrep: Irrep,
    /// F_r.
    pub f: R,
    /// c_r = F_r / F_T.
    pub c: R,
}

/// Expansion coefficients of an exponentiated action, trivial irrep first.
#[derive(Clone, Debug)]
pub struct CharacterCoefficients<R: Real> {
    pub group: Group,
    pub beta: R,
    pub cutoff: u32,
    pub entries: Vec<CoeffEntry<R>>,
    /// Geometric-extrapolation bound on the neglected |c_r| tail.
    pub tail_bound: R,
}

impl<R: Real> CharacterCoefficients<R> {
    pub fn f_trivial(&self) -> R {
        self.entries[0].f
    }

    pub fn c_of(&self, label: IrrepLabel) -> Option<R> {
        self.entries
            .iter()
            .find(|e| e.irrep.label == label)
            .map(|e| e.c)
    }

    pub fn nontrivial(&self) -> impl Iterator<Item = &CoeffEntry<R>> {
        self.entries.iter().filter(|e| !e.irrep.is_trivial())
    }

    /// Largest |c_r| among irreps of nonzero N-ality (the `c_{r'}` that
    /// controls the thermodynamic limit of the sector sums).
    pub fn leading_nonzero_nality_c(&self) -> Option<R> {
        self.entries
            .iter()
            .filter(|e| e.irrep.n_ality != 0)
            .map(|e| e.c.abs())
            .fold(None, |acc, c| Some(acc.map_or(c, |a: R| a.max(c))))
    }
}

/// Default irrep cutoff used by the model constructors.
pub const DEFAULT_CUTOFF: u32 = 64;

/// Expand e^{-S} into characters up to `cutoff` (max |charge| or 2j).
///
/// The attached tail bound extrapolates the decay of the last retained
/// |c_r| geometrically; if it exceeds `tol`, the expansion is rejected
/// with an estimate of the smallest adequate cutoff.
pub fn expand_action<R: Real>(
    group: Group,
    action: &ClassAction<R>,
    cutoff: u32,
    tol: R,
) -> Result<CharacterCoefficients<R>> {
    if cutoff == 0 {
        return Err(Error::InvalidSpec("cutoff must be >= 1".into()));
    }
    let irreps = group.irreps(cutoff);
    let f_t = character_coefficient(group, action, &group.trivial_irrep(), tol)?;
    if !(f_t > R::zero()) {
        return Err(Error::InternalConsistency(
            "trivial character coefficient must be positive".into(),
        ));
    }
    let mut entries = Vec::with_capacity(irreps.len());
    for r in &irreps {
        let f = if r.is_trivial() {
            f_t
        } else {
            character_coefficient(group, action, r, tol)?
        };
        entries.push(CoeffEntry {
            irrep: *r,
            f,
            c: f / f_t,
        });
    }

    // tail estimate: per-level magnitudes (level = |charge| or 2j, so
    // conjugate pairs do not fake a unit decay ratio)
    let level_mags: Vec<R> = match group {
        // finite group fully enumerated: no tail
        Group::Cyclic(n) if entries.len() as u32 >= n => Vec::new(),
        _ => {
            let mut mags: Vec<R> = Vec::new();
            for e in &entries {
                if e.irrep.is_trivial() {
                    continue;
                }
                let level = match e.irrep.label {
                    IrrepLabel::Charge(q) => q.unsigned_abs() as usize,
                    IrrepLabel::TwiceSpin(twoj) => twoj as usize,
                } - 1;
                if mags.len() <= level {
                    mags.resize(level + 1, R::zero());
                }
                mags[level] = mags[level].max(e.c.abs());
            }
            mags
        }
    };
    let tail_bound = match level_mags.len() {
        0 => R::zero(),
        1 => level_mags[0],
        len => {
            let last = level_mags[len - 1];
            if last <= tol {
                // the expansion has already decayed to the target
                last
            } else {
                let prev = level_mags[len - 2];
                let q = (last / prev).min(R::lit(0.99));
                last * q / (R::one() - q)
            }
        }
    };

    if tail_bound > tol {
        // how many more geometric steps would push the tail below tol
        let smallest = if level_mags.len() >= 2 {
            let q = level_mags[level_mags.len() - 1] / level_mags[level_mags.len() - 2];
            if q < R::one() && q > R::zero() {
                let extra = (tol / tail_bound).ln() / q.ln();
                extra
                    .to_f64()
                    .map(|e| cutoff as usize + e.ceil().max(1.0) as usize)
            } else {
                None
            }
        } else {
            None
        };
        return Err(Error::TruncationInsufficient {
            cutoff: cutoff as usize,
            tail: tail_bound.to_f64().unwrap_or(f64::NAN),
            smallest_adequate: smallest,
        });
    }

    Ok(CharacterCoefficients {
        group,
        beta: action.beta(),
        cutoff,
        entries,
        tail_bound,
    })
}
