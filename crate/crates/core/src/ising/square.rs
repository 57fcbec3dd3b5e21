//! Square-lattice Ising model on an L₁×L₂ torus with couplings a (along
//! direction 1) and b (along direction 2), in the `∫dσ = ½Σ` measure.
//!
//! The exact torus partition function is a four-term combination of
//! products `2cosh/2sinh(L₁γ_k/2)` over the Onsager spectrum γ_k; the
//! antiperiodic (in direction 1) partner Z⁻ flips two of the four signs.
//! All products are accumulated in the log domain, and the small
//! quantities 1 − Z⁻/Z are produced through expm1/log1p paths that keep
//! full relative precision down to ~1e-280.

use crate::error::{Error, Result};
use crate::ising::Phase;
use crate::numeric::{ln_2cosh, ln_2sinh, log_add_exp, Real};

/// Dual coupling ā: sinh(2a)·sinh(2ā) = 1.
pub fn dual_coupling<R: Real>(a: R) -> Result<R> {
    if !(a > R::zero()) {
        return Err(Error::Domain(format!(
            "dual coupling undefined for a = {a} <= 0"
        )));
    }
    Ok(R::half() * (R::one() / (R::two() * a).sinh()).asinh())
}

/// Untwisted / antiperiodic log partition functions.
#[derive(Clone, Copy, Debug)]
pub struct SquarePartitionPair<R> {
    pub log_z: R,
    pub log_z_minus: R,
}

/// Square-lattice spec; `a` couples sites along the (possibly long)
/// direction of extent `l1`, which is also the direction the
/// antiperiodic twist acts on.
#[derive(Clone, Copy, Debug)]
pub struct SquareIsing<R: Real> {
    pub a: R,
    pub b: R,
    pub l1: u32,
    pub l2: u32,
}

impl<R: Real> SquareIsing<R> {
    pub fn new(a: R, b: R, l1: u32, l2: u32) -> Result<Self> {
        if l1 == 0 || l2 == 0 {
            return Err(Error::InvalidSpec("lattice sides must be positive".into()));
        }
        if !(a > R::zero()) || !(b >= R::zero()) {
            return Err(Error::Domain(
                "square closed form requires a > 0, b >= 0".into(),
            ));
        }
        Ok(SquareIsing { a, b, l1, l2 })
    }

    pub fn dual_a(&self) -> R {
        dual_coupling(self.a).expect("a > 0 checked at construction")
    }

    /// Exact mass gap M = 2(ā − b) of the disordered phase.
    pub fn mass_gap(&self) -> R {
        R::two() * (self.dual_a() - self.b)
    }

    pub fn phase(&self) -> Phase {
        // criticality: sinh 2a sinh 2b = 1, i.e. ā = b
        let s = (R::two() * self.a).sinh() * (R::two() * self.b).sinh();
        let eps = R::lit(1e-12);
        if (s - R::one()).abs() <= eps {
            Phase::Critical
        } else if s < R::one() {
            Phase::Disordered
        } else {
            Phase::Ordered
        }
    }

    /// Onsager spectrum: cosh γ_k = cosh2ā cosh2b − cos(πk/L₂) sinh2ā sinh2b,
    /// for k = 0..2L₂−1, all taken ≥ 0.
    pub fn gamma(&self, k: u32) -> R {
        let abar2 = R::two() * self.dual_a();
        let b2 = R::two() * self.b;
        let angle = R::PI() * R::from_u32(k).unwrap() / R::from_u32(self.l2).unwrap();
        let ch = abar2.cosh() * b2.cosh() - angle.cos() * abar2.sinh() * b2.sinh();
        ch.acosh()
    }

    pub fn gammas(&self) -> Vec<R> {
        (0..2 * self.l2).map(|k| self.gamma(k)).collect()
    }

    /// The four log-products entering the torus combination:
    /// (Σ ln2cosh odd, Σ ln2sinh odd, Σ ln2cosh even, Σ ln2sinh even).
    fn log_products(&self) -> (R, R, R, R) {
        let half_l1 = R::half() * R::from_u32(self.l1).unwrap();
        let mut co = R::zero();
        let mut so = R::zero();
        let mut ce = R::zero();
        let mut se = R::zero();
        for k in 1..=self.l2 {
            let x_odd = half_l1 * self.gamma(2 * k - 1);
            let x_even = half_l1 * self.gamma(2 * k - 2);
            co += ln_2cosh(x_odd);
            so += ln_2sinh(x_odd);
            ce += ln_2cosh(x_even);
            se += if x_even > R::zero() {
                ln_2sinh(x_even)
            } else {
                R::neg_infinity() // γ_0 = 0 exactly at criticality
            };
        }
        (co, so, ce, se)
    }

    /// Sign of the even-sinh product term in Z: −1 in the disordered
    /// phase (ā > b), +1 in the ordered phase. At criticality the term
    /// vanishes (γ₀ = 0) and the sign is immaterial.
    fn even_sinh_sign(&self) -> bool {
        self.dual_a() < self.b
    }

    fn log_prefactor(&self) -> R {
        // ½ Σσ measure: divide the conventional form by 2^{L1L2}
        let vol = R::from_u64(self.l1 as u64 * self.l2 as u64).unwrap();
        let half = R::half();
        -vol * R::lit(2.0).ln() - R::lit(2.0).ln()
            + half * vol * (R::two() * (R::two() * self.a).sinh()).ln()
    }

    /// log Z and log Z⁻ via the four-product combination.
    pub fn partition_pair(&self) -> Result<SquarePartitionPair<R>> {
        let (co, so, ce, se) = self.log_products();
        let pref = self.log_prefactor();
        let sgn = self.even_sinh_sign();
        let z_terms = [(co, true), (so, true), (ce, true), (se, sgn)];
        let zm_terms = [(co, true), (so, true), (ce, false), (se, !sgn)];
        let log_z = crate::numeric::log_sum_exp_signed(&z_terms).ok_or_else(|| {
            Error::InternalConsistency("partition combination not positive".into())
        })?;
        let log_zm = crate::numeric::log_sum_exp_signed(&zm_terms)
            .ok_or_else(|| Error::InternalConsistency("twisted combination not positive".into()))?;
        Ok(SquarePartitionPair {
            log_z: pref + log_z,
            log_z_minus: pref + log_zm,
        })
    }

    /// (Z − Z⁻)/(Z + Z⁻) through the tanh/cosh-ratio form, which keeps
    /// relative precision when the difference is ~e^{-L₁γ₀}.
    pub fn ratio_diff(&self) -> Result<R> {
        if self.phase() == Phase::Ordered {
            return Err(Error::Phase(
                "tanh-ratio form defined in the disordered phase (γ₀ = 2(ā−b) > 0)".into(),
            ));
        }
        let l1 = R::from_u32(self.l1).unwrap();
        // numerator: 1 − Π tanh(L1 γ_even/2) = −expm1(Σ ln tanh)
        let mut ln_tanh_sum = R::zero();
        // denominator exponents: Σ[ln 2cosh(L1 γ_odd/2) − ln 2cosh(L1 γ_even/2)]
        let mut d1 = R::zero();
        let mut d2 = R::zero();
        for k in 1..=self.l2 {
            let xe = R::half() * l1 * self.gamma(2 * k - 2);
            let xo = R::half() * l1 * self.gamma(2 * k - 1);
            ln_tanh_sum += crate::numeric::ln_tanh(xe);
            d1 += ln_2cosh(xo) - ln_2cosh(xe);
            d2 += ln_2sinh(xo) - ln_2cosh(xe);
        }
        let ln_num = (-ln_tanh_sum.exp_m1()).ln();
        let ln_den = log_add_exp(d1, d2);
        Ok((ln_num - ln_den).exp())
    }

    /// 1 − Z⁻/Z = 2r/(1+r) with r the stable difference ratio.
    pub fn one_minus_ratio(&self) -> Result<R> {
        let r = self.ratio_diff()?;
        Ok(R::two() * r / (R::one() + r))
    }

    /// The L₁ → ∞ limit of (1 − Z⁻/Z)^{1/L₁} at this L₂:
    /// exp{−(γ₀ + ½ Σ_{k<2L₂} (−1)^{k+1} γ_k)}.
    pub fn decay_rate(&self) -> Result<R> {
        if self.phase() == Phase::Ordered {
            return Err(Error::Phase(
                "decay rate requires the disordered phase".into(),
            ));
        }
        let mut alt = R::zero();
        for k in 0..2 * self.l2 {
            let g = self.gamma(k);
            if k % 2 == 1 {
                alt += g;
            } else {
                alt -= g;
            }
        }
        Ok((-(self.gamma(0) + R::half() * alt)).exp())
    }

    /// L₂ → ∞ limit of the decay rate: e^{−γ₀} = e^{−M}.
    pub fn decay_rate_infinite_l2(&self) -> R {
        (-self.mass_gap()).exp()
    }
}
