//! One-dimensional G×G principal chiral model on a periodic chain:
//! twisted partition functions for arbitrary twist subgroups, wall free
//! energies, correlation functions and the spin-system mass-gap bound.
//!
//! On the chain the character expansion is exact:
//! `Z = Σ_r d_r² F_r^L` and a twist by `g` inserts `χ_r(g)/d_r` into
//! one bond, so `Z^g = Σ_r d_r χ_r(g) F_r^L`. Averaging the twist over
//! a closed subgroup G′ projects each irrep onto its G′-invariant part,
//! which is what the wall projection measures.

use crate::error::{Error, Result};
use crate::group::{
    expand_action, CharacterCoefficients, ClassAction, Group, Irrep, IrrepLabel, DEFAULT_CUTOFF,
};
use crate::numeric::Real;

/// Twist subgroup G′ ⊆ G.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwistSubgroup {
    /// Only the identity; every wall is trivial.
    Trivial,
    /// The center (Z_N for Z_N itself, Z₂ ⊂ SU(2)); for U(1) the given
    /// finite cyclic subgroup Z_m.
    Cyclic(u32),
    /// The whole group.
    Full,
}

/// G×G principal chiral chain of length L.
#[derive(Clone, Debug)]
pub struct ChainSpec<R: Real> {
    pub group: Group,
    pub subgroup: TwistSubgroup,
    pub beta: R,
    pub l: u32,
    pub coeffs: CharacterCoefficients<R>,
}

/// One row of the spin-system bound check.
#[derive(Clone, Copy, Debug)]
pub struct SpinBoundRow<R> {
    pub n: u32,
    pub lhs: R,
    pub rhs: R,
    /// ⟨Γ(0)²⟩/⟨Γ(0)⟩², evaluated explicitly (χ_R(1) is deterministic,
    /// so it comes out exactly 1 for character observables).
    pub prefactor: R,
    pub ok: bool,
    /// L = 2^k·n holds, i.e. the doubling proof covers this separation.
    pub regime: bool,
}

impl<R: Real> ChainSpec<R> {
    pub fn new(group: Group, subgroup: TwistSubgroup, beta: R, l: u32) -> Result<Self> {
        Self::with_cutoff(group, subgroup, beta, l, DEFAULT_CUTOFF)
    }

    pub fn with_cutoff(
        group: Group,
        subgroup: TwistSubgroup,
        beta: R,
        l: u32,
        cutoff: u32,
    ) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidSpec("chain length must be >= 2".into()));
        }
        if let TwistSubgroup::Cyclic(m) = subgroup {
            let ok = match group {
                Group::Cyclic(n) => m == n || (m > 0 && n % m == 0),
                Group::Circle => m > 0,
                Group::Su2 => m == 2,
            };
            if !ok {
                return Err(Error::InvalidSpec(format!(
                    "Z_{m} is not a supported subgroup of {}",
                    group.name()
                )));
            }
        }
        // chain action β·Re Tr(U V^{-1}): the unnormalized trace is
        // 2cos θ for SU(2) and cos θ for the abelian groups
        let action = match group {
            Group::Su2 => ClassAction::custom(beta, move |theta: R| R::two() * beta * theta.cos()),
            _ => ClassAction::wilson(beta),
        };
        let coeffs = expand_action(group, &action, cutoff, R::lit(1e-12))?;
        Ok(ChainSpec {
            group,
            subgroup,
            beta,
            l,
            coeffs,
        })
    }

    fn pow_l(&self, c: R) -> R {
        c.powi(self.l as i32)
    }

    /// Multiplicity of the G′-trivial component in r restricted to G′,
    /// as a fraction of d_r (1 when r restricts trivially, 0 when the
    /// restriction has no invariant part — the only cases that occur
    /// for the supported groups and subgroups).
    fn invariant_fraction(&self, irrep: &Irrep) -> R {
        match self.subgroup {
            TwistSubgroup::Trivial => R::one(),
            TwistSubgroup::Full => {
                if irrep.is_trivial() {
                    R::one()
                } else {
                    R::zero()
                }
            }
            TwistSubgroup::Cyclic(m) => {
                // average of χ_r over Z_m, normalized by d_r
                match irrep.label {
                    IrrepLabel::Charge(q) => {
                        if q.rem_euclid(m as i64) == 0 {
                            R::one()
                        } else {
                            R::zero()
                        }
                    }
                    IrrepLabel::TwiceSpin(twoj) => {
                        // center Z₂ of SU(2): integer spins restrict trivially
                        if twoj % 2 == 0 {
                            R::one()
                        } else {
                            R::zero()
                        }
                    }
                }
            }
        }
    }

    /// Whether r is nontrivial w.r.t. G′ (no G′-invariant component).
    pub fn nontrivial_wrt_subgroup(&self, irrep: &Irrep) -> bool {
        self.invariant_fraction(irrep) == R::zero()
    }

    /// Σ_r d_r² c_r^L (trivial term = 1 included).
    fn reduced_sum(&self) -> R {
        let mut s = R::zero();
        for e in &self.coeffs.entries {
            let d = R::from_u32(e.irrep.dim).unwrap();
            s += d * d * self.pow_l(e.c);
        }
        s
    }

    /// log Z = log Σ_r d_r² F_r^L, trivial factor pulled out.
    pub fn partition_function(&self) -> Result<R> {
        let s = self.reduced_sum();
        if !(s > R::zero()) {
            return Err(Error::InternalConsistency(
                "reduced chain sum not positive".into(),
            ));
        }
        Ok(R::from_u32(self.l).unwrap() * self.coeffs.f_trivial().ln() + s.ln())
    }

    /// log Z^g = log Σ_r d_r χ_r(g) F_r^L for a twist by the class of g.
    ///
    /// `theta` is the class parameter of g (angle for U(1)/SU(2), 2πj/N
    /// for Z_N).
    pub fn twisted_partition_function(&self, theta: R) -> Result<R> {
        let s = self.reduced_twisted_sum(theta)?;
        if !(s > R::zero()) {
            return Err(Error::InternalConsistency(
                "twisted chain sum not positive".into(),
            ));
        }
        Ok(R::from_u32(self.l).unwrap() * self.coeffs.f_trivial().ln() + s.ln())
    }

    fn reduced_twisted_sum(&self, theta: R) -> Result<R> {
        let mut re = R::zero();
        let mut im = R::zero();
        for e in &self.coeffs.entries {
            let d = R::from_u32(e.irrep.dim).unwrap();
            let chi = e.irrep.character(theta);
            let w = d * self.pow_l(e.c);
            re += w * chi.re;
            im += w * chi.im;
        }
        if im.abs() > R::lit(1e-12) * re.abs().max(R::one()) {
            return Err(Error::InternalConsistency(format!(
                "twisted chain sum has imaginary residue {:e}",
                im.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(re)
    }

    /// ⟨O(g)⟩ = Z^g/Z as a ratio of reduced sums.
    pub fn wall_expectation(&self, theta: R) -> Result<R> {
        Ok(self.reduced_twisted_sum(theta)? / self.reduced_sum())
    }

    /// 1 − ∫_{G′} dg ⟨O(g)⟩ = Σ′_r d_r² c_r^L / Σ_r d_r² c_r^L with Σ′
    /// over irreps nontrivial w.r.t. G′.
    pub fn wall_projection(&self) -> Result<R> {
        let v = match self.log_wall_projection()? {
            Some(lv) => lv.exp(),
            None => R::zero(),
        };
        let slack = R::lit(1e-12);
        if v > R::one() + slack {
            return Err(Error::InternalConsistency(format!(
                "wall projection {v} outside [0, 1]"
            )));
        }
        Ok(v)
    }

    /// Log-domain wall projection; `None` when the charged sum vanishes
    /// identically (trivial twist subgroup or β = 0). Stays finite for
    /// chain lengths where c_r^L underflows.
    pub fn log_wall_projection(&self) -> Result<Option<R>> {
        let mut terms: Vec<(R, bool)> = Vec::new();
        for e in &self.coeffs.entries {
            let frac = self.invariant_fraction(&e.irrep);
            if frac == R::one() || e.c == R::zero() {
                continue;
            }
            let d = R::from_u32(e.irrep.dim).unwrap();
            let log_mag = R::two() * d.ln()
                + (R::one() - frac).ln()
                + R::from_u32(self.l).unwrap() * e.c.abs().ln();
            let positive = e.c > R::zero() || self.l % 2 == 0;
            terms.push((log_mag, positive));
        }
        if terms.is_empty() {
            return Ok(None);
        }
        let log_num = crate::numeric::log_sum_exp_signed(&terms)
            .ok_or_else(|| Error::InternalConsistency("charged chain sum not positive".into()))?;
        let log_den = self.reduced_sum().ln();
        Ok(Some(log_num - log_den))
    }

    /// Thermodynamic-limit normalized correlator ⟨Γ(n)⟩/⟨Γ(0)⟩ = (c_R)^n.
    pub fn correlation(&self, rep: &Irrep, n: u32) -> Result<R> {
        self.reject_trivial(rep)?;
        if n > self.l {
            return Err(Error::InvalidSpec(format!(
                "separation {n} exceeds chain length {}",
                self.l
            )));
        }
        let c = self
            .coeffs
            .c_of(rep.label)
            .ok_or_else(|| Error::InvalidSpec(format!("irrep {:?} not in expansion", rep.label)))?;
        Ok(c.powi(n as i32))
    }

    /// Exact finite-L correlator for abelian G: inserting charge q along
    /// n bonds gives Σ_m c_m^{L-n} c_{m+q}^n / Σ_m c_m^L.
    pub fn correlation_finite(&self, rep: &Irrep, n: u32) -> Result<R> {
        self.reject_trivial(rep)?;
        if n > self.l {
            return Err(Error::InvalidSpec(format!(
                "separation {n} exceeds chain length {}",
                self.l
            )));
        }
        let IrrepLabel::Charge(q) = rep.label else {
            return Err(Error::InvalidSpec(
                "finite-L correlator implemented for abelian groups only".into(),
            ));
        };
        let mut num = R::zero();
        let mut den = R::zero();
        for e in &self.coeffs.entries {
            let IrrepLabel::Charge(m) = e.irrep.label else {
                unreachable!()
            };
            den += self.pow_l(e.c);
            let shifted = match self.group {
                Group::Cyclic(nn) => {
                    let target = (m + q).rem_euclid(nn as i64);
                    self.coeffs
                        .entries
                        .iter()
                        .find_map(|x| match x.irrep.label {
                            IrrepLabel::Charge(mm) if mm.rem_euclid(nn as i64) == target => {
                                Some(x.c)
                            }
                            _ => None,
                        })
                }
                _ => self.coeffs.c_of(IrrepLabel::Charge(m + q)),
            };
            // charges pushed past the cutoff carry negligible weight;
            // treat their coefficient as zero
            let cs = shifted.unwrap_or(R::zero());
            num += e.c.powi((self.l - n) as i32) * cs.powi(n as i32);
        }
        Ok(num / den)
    }

    fn reject_trivial(&self, rep: &Irrep) -> Result<()> {
        // the correlator observable must average to zero over G
        if rep.is_trivial() {
            return Err(Error::TrivialIrrep(
                "correlator requires an irrep nontrivial w.r.t. G".into(),
            ));
        }
        Ok(())
    }

    /// Spin-system mass-gap bound at separations `ns`:
    /// lhs = |⟨Γ(n)⟩|/⟨Γ(0)⟩, rhs = 2·prefactor^{n/L}·(wall projection)^{n/L}.
    ///
    /// The lhs uses the exact finite-L correlator where available
    /// (abelian G) and the thermodynamic form otherwise.
    pub fn check_spin_ty_bound(&self, rep: &Irrep, ns: &[u32]) -> Result<Vec<SpinBoundRow<R>>> {
        if !self.nontrivial_wrt_subgroup(rep) {
            return Err(Error::TrivialIrrep(
                "bound requires an irrep nontrivial w.r.t. the twist subgroup".into(),
            ));
        }
        // log domain: the projection is ~c^L and underflows long before
        // its n/L-th power does
        let log_projection = self.log_wall_projection()?.unwrap_or(R::neg_infinity());
        // Γ(0) = χ_R(1) = d_R has zero variance: ⟨Γ(0)²⟩/⟨Γ(0)⟩² = d²/d².
        let d = R::from_u32(rep.dim).unwrap();
        let prefactor = (d * d) / (d * d);
        let linv = R::one() / R::from_u32(self.l).unwrap();
        let mut rows = Vec::with_capacity(ns.len());
        for &n in ns {
            let lhs = match self.correlation_finite(rep, n) {
                Ok(v) => v.abs(),
                Err(Error::InvalidSpec(_)) => self.correlation(rep, n)?.abs(),
                Err(e) => return Err(e),
            };
            let x = R::from_u32(n).unwrap() * linv;
            let rhs = R::two() * prefactor.powf(x) * (x * log_projection).exp();
            // at n = L/2 the bound saturates up to a 1 + O(c^L) factor,
            // far below f64 resolution; allow rounding-level slack
            let ok = lhs <= rhs * (R::one() + R::lit(1e-14));
            rows.push(SpinBoundRow {
                n,
                lhs,
                rhs,
                prefactor,
                ok,
                regime: n > 0 && self.l % n == 0 && (self.l / n).is_power_of_two(),
            });
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_chain(beta: f64, l: u32) -> ChainSpec<f64> {
        ChainSpec::new(Group::Cyclic(2), TwistSubgroup::Full, beta, l).unwrap()
    }

    #[test]
    fn beta_zero_chain_is_free() {
        let spec = ChainSpec::<f64>::new(Group::Su2, TwistSubgroup::Cyclic(2), 0.0, 8).unwrap();
        assert!(spec.partition_function().unwrap().abs() < 1e-14);
        assert!(spec.wall_projection().unwrap().abs() < 1e-14);
    }

    #[test]
    fn z2_chain_matches_transfer_matrix_closed_form() {
        // 1D Ising: Z = (cosh β)^L + (sinh β)^L  (with the ½Σ measure)
        for &(beta, l) in &[(0.3f64, 8u32), (1.0, 8), (0.1, 64)] {
            let spec = z2_chain(beta, l);
            let expect = (beta.cosh().powi(l as i32) + beta.sinh().powi(l as i32)).ln();
            let got = spec.partition_function().unwrap();
            assert!((got - expect).abs() < 1e-12, "beta={beta} l={l}");

            // twist by -1 flips the sinh term
            let twisted = spec
                .twisted_partition_function(std::f64::consts::PI)
                .unwrap();
            let expect_tw = (beta.cosh().powi(l as i32) - beta.sinh().powi(l as i32)).ln();
            assert!((twisted - expect_tw).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_twist_reduces_to_partition_function() {
        let spec = ChainSpec::<f64>::new(Group::Su2, TwistSubgroup::Cyclic(2), 1.0, 6).unwrap();
        let z = spec.partition_function().unwrap();
        let zg = spec.twisted_partition_function(0.0).unwrap();
        assert!((z - zg).abs() < 1e-12);
    }

    #[test]
    fn wall_projection_z2_closed_form() {
        for &(beta, l) in &[(0.3f64, 8u32), (0.5, 16)] {
            let spec = z2_chain(beta, l);
            let t = beta.tanh().powi(l as i32);
            let expect = t / (1.0 + t);
            assert!((spec.wall_projection().unwrap() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn wall_expectation_symmetric_in_inverse() {
        // ⟨O(g)⟩ = ⟨O(g^{-1})⟩: for U(1) that is θ ↔ -θ
        let spec = ChainSpec::<f64>::new(Group::Circle, TwistSubgroup::Full, 1.0, 8).unwrap();
        for &theta in &[0.3f64, 1.1, 2.7] {
            let a = spec.wall_expectation(theta).unwrap();
            let b = spec.wall_expectation(-theta).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&a));
        }
    }

    #[test]
    fn correlator_z2_finite_length() {
        let beta = 0.4f64;
        let l = 10u32;
        let spec = z2_chain(beta, l);
        let sign = Irrep::charge(Group::Cyclic(2), 1);
        let t = beta.tanh();
        for n in [0u32, 1, 3, 5] {
            let expect = (t.powi(n as i32) + t.powi((l - n) as i32)) / (1.0 + t.powi(l as i32));
            let got = spec.correlation_finite(&sign, n).unwrap();
            assert!((got - expect).abs() < 1e-14, "n={n}");
        }
        assert_eq!(spec.correlation_finite(&sign, 0).unwrap(), 1.0);
    }

    #[test]
    fn trivial_rep_rejected() {
        let spec = z2_chain(0.4, 8);
        let trivial = Irrep::charge(Group::Cyclic(2), 0);
        assert!(matches!(
            spec.correlation(&trivial, 2),
            Err(Error::TrivialIrrep(_))
        ));
    }

    #[test]
    fn correlation_decay_dominated_by_leading_subgroup_coefficient() {
        // c_R ≤ c_{r'} for every R nontrivial w.r.t. G′, so the bound is
        // exact in the thermodynamic limit
        let spec = ChainSpec::<f64>::new(Group::Su2, TwistSubgroup::Cyclic(2), 1.0, 16).unwrap();
        let c_leading = spec
            .coeffs
            .entries
            .iter()
            .filter(|e| spec.nontrivial_wrt_subgroup(&e.irrep))
            .map(|e| e.c.abs())
            .fold(0.0f64, f64::max);
        for e in &spec.coeffs.entries {
            if spec.nontrivial_wrt_subgroup(&e.irrep) {
                assert!(e.c.abs() <= c_leading + 1e-15);
            }
        }
        let half = Irrep::spin(1);
        let c = spec.coeffs.c_of(half.label).unwrap();
        assert!((c - c_leading).abs() < 1e-15);
    }

    #[test]
    fn bound_rows_hold_for_z2() {
        let spec = z2_chain(0.3, 64);
        let sign = Irrep::charge(Group::Cyclic(2), 1);
        let rows = spec
            .check_spin_ty_bound(&sign, &[1, 2, 4, 8, 16, 32])
            .unwrap();
        for row in &rows {
            assert!(
                row.ok,
                "violation at n={}: {} > {}",
                row.n, row.lhs, row.rhs
            );
            assert_eq!(row.prefactor, 1.0);
            assert!(row.regime);
        }
    }

    #[test]
    fn bound_rejects_subgroup_trivial_rep() {
        // integer spin is blind to the center twist
        let spec = ChainSpec::<f64>::new(Group::Su2, TwistSubgroup::Cyclic(2), 1.0, 8).unwrap();
        let adj = Irrep::spin(2);
        assert!(matches!(
            spec.check_spin_ty_bound(&adj, &[2]),
            Err(Error::TrivialIrrep(_))
        ));
    }

    #[test]
    fn invalid_subgroup_rejected() {
        assert!(ChainSpec::<f64>::new(Group::Su2, TwistSubgroup::Cyclic(3), 1.0, 8).is_err());
        assert!(ChainSpec::<f64>::new(Group::Cyclic(4), TwistSubgroup::Cyclic(3), 1.0, 8).is_err());
    }
}
