//! Ground-truth engines: exhaustive configuration sums and strip
//! transfer matrices for square and triangular Ising lattices with
//! arbitrary wall twists, plus the inequality and structural checks
//! every closed form in this crate is validated against.

mod enumerate;
mod transfer;

pub mod checks;

pub use enumerate::{correlator, enumerate_partition, ENUMERATION_SITE_CAP};
pub use transfer::{strip_transfer, transfer_correlator, TRANSFER_WIDTH_CAP};

use crate::error::{Error, Result};
use crate::numeric::Real;

/// Which lattice graph a [`SpinLattice`] carries.
///
/// Both triangular kinds are the anisotropic triangular lattice
/// (vertical bonds J₁, horizontal and up-diagonal bonds J = J₂ = J₃)
/// on an N×M torus; they differ in the periodic identification:
///
/// * `TriangularFig1` — the zigzag-column (Houtappel) lattice, which is
///   mirror-symmetric about vertical site columns and therefore
///   reflection positive: in unsheared coordinates the horizontal wrap
///   carries a vertical shift of N/2, `(x+N, y) ≡ (x, y + N/2)`.
///   Needs an even column count N. The wall bound is a theorem on this
///   lattice.
/// * `TriangularFig2` — the straight torus (square lattice plus one
///   diagonal), `(x+N, y) ≡ (x, y)`. This is the lattice whose
///   partition function the Wu–Hu product form reproduces exactly.
///
/// The two coincide exactly when N ≡ 0 (mod 2M) — the shift is then a
/// whole number of vertical periods.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    Square,
    TriangularFig1,
    TriangularFig2,
}

/// One undirected bond with its coupling (J/k_BT, sign included).
///
/// `src_x` and `dx` record the bond's horizontal walk in unwrapped
/// column coordinates; they determine how often the bond crosses any
/// vertical cut, which is what wall construction needs.
#[derive(Clone, Copy, Debug)]
pub struct Bond<R> {
    pub i: usize,
    pub j: usize,
    pub coupling: R,
    pub src_x: u32,
    pub dx: u32,
}

impl<R> Bond<R> {
    /// How many times the walk src_x → src_x + dx passes the boundary
    /// between columns c and c+1 (mod L₁).
    pub fn cut_crossings(&self, c: u32, l1: u32) -> u32 {
        if self.dx == 0 {
            return 0;
        }
        let mut first = (c as i64 + 1 - self.src_x as i64).rem_euclid(l1 as i64) as u32;
        if first == 0 {
            first = l1;
        }
        if self.dx >= first {
            1 + (self.dx - first) / l1
        } else {
            0
        }
    }
}

/// How a partition pair was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Enumeration,
    TransferMatrix,
    ClosedForm,
    MonteCarlo,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Enumeration => write!(f, "enumeration"),
            Method::TransferMatrix => write!(f, "transfer-matrix"),
            Method::ClosedForm => write!(f, "closed-form"),
            Method::MonteCarlo => write!(f, "monte-carlo"),
        }
    }
}

/// Log-domain untwisted/twisted partition pair.
#[derive(Clone, Copy, Debug)]
pub struct PartitionPair<R> {
    pub log_z: R,
    pub log_z_twisted: R,
    pub method: Method,
}

impl<R: Real> PartitionPair<R> {
    /// 1 − Z_twisted/Z. Lies in [0, 1] for walls in reflection-positive
    /// systems; values outside are reported, not rejected.
    pub fn one_minus_ratio(&self) -> R {
        -(self.log_z_twisted - self.log_z).exp_m1()
    }

    pub fn ratio(&self) -> R {
        (self.log_z_twisted - self.log_z).exp()
    }

    /// Walls in reflection-positive systems keep 1 − Z_tw/Z inside
    /// [0, 1]; a value outside is worth surfacing but not an error
    /// (exotic masks and couplings can produce it legitimately).
    pub fn ratio_outside_unit_range(&self) -> bool {
        let r = self.one_minus_ratio();
        !(R::zero()..=R::one()).contains(&r)
    }
}

/// A finite spin lattice with an explicit bond list and a twist mask,
/// in the `∫dσ = ½Σ` per-site measure.
#[derive(Clone, Debug)]
pub struct SpinLattice<R: Real> {
    pub kind: LatticeKind,
    pub l1: u32,
    pub l2: u32,
    pub bonds: Vec<Bond<R>>,
    /// Per-bond flag: coupling sign flipped in the twisted ensemble.
    pub twist_mask: Vec<bool>,
}

impl<R: Real> SpinLattice<R> {
    /// Square torus: coupling `a` along direction 1 (extent l1, the
    /// twist direction), `b` along direction 2.
    pub fn square(l1: u32, l2: u32, a: R, b: R) -> Result<Self> {
        if l1 == 0 || l2 == 0 {
            return Err(Error::InvalidSpec("lattice sides must be positive".into()));
        }
        let site = |x: u32, y: u32| (x % l1) as usize * l2 as usize + (y % l2) as usize;
        let mut bonds = Vec::with_capacity(2 * (l1 * l2) as usize);
        for x in 0..l1 {
            for y in 0..l2 {
                bonds.push(Bond {
                    i: site(x, y),
                    j: site(x + 1, y),
                    coupling: a,
                    src_x: x,
                    dx: 1,
                });
                bonds.push(Bond {
                    i: site(x, y),
                    j: site(x, y + 1),
                    coupling: b,
                    src_x: x,
                    dx: 0,
                });
            }
        }
        let mut lat = SpinLattice {
            kind: LatticeKind::Square,
            l1,
            l2,
            twist_mask: vec![false; bonds.len()],
            bonds,
        };
        lat.set_seam_wall();
        Ok(lat)
    }

    /// Houtappel (zigzag-column) triangular lattice; see [`LatticeKind`].
    pub fn triangular_fig1(n: u32, m: u32, k1: R, k: R) -> Result<Self> {
        Self::triangular(LatticeKind::TriangularFig1, n, m, k1, k)
    }

    /// Straight-torus triangular lattice (N = l1 columns, M = l2 rows).
    pub fn triangular_fig2(n: u32, m: u32, k1: R, k: R) -> Result<Self> {
        Self::triangular(LatticeKind::TriangularFig2, n, m, k1, k)
    }

    pub fn triangular_fig1_tanh(n: u32, m: u32, t1: R, t: R) -> Result<Self> {
        Self::triangular_fig1(n, m, t1.atanh(), t.atanh())
    }

    pub fn triangular_fig2_tanh(n: u32, m: u32, t1: R, t: R) -> Result<Self> {
        Self::triangular_fig2(n, m, t1.atanh(), t.atanh())
    }

    fn triangular(kind: LatticeKind, n: u32, m: u32, k1: R, k: R) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidSpec("lattice sides must be positive".into()));
        }
        let x_wrap_shift = match kind {
            LatticeKind::TriangularFig1 => {
                if n % 2 != 0 {
                    return Err(Error::InvalidSpec(
                        "the zigzag identification needs an even column count".into(),
                    ));
                }
                (n / 2) % m
            }
            _ => 0,
        };
        // resolve an (x, y) one step past the boundaries; the x-wrap of
        // the Houtappel lattice carries a vertical shift
        let site = |x: u32, y: u32| -> usize {
            let (mut x, mut y) = (x, y % m);
            if x >= n {
                x -= n;
                y = (y + x_wrap_shift) % m;
            }
            (x % n) as usize * m as usize + y as usize
        };
        let mut bonds = Vec::with_capacity(3 * (n * m) as usize);
        for x in 0..n {
            for y in 0..m {
                let src = site(x, y);
                bonds.push(Bond {
                    i: src,
                    j: site(x, y + 1),
                    coupling: k1,
                    src_x: x,
                    dx: 0,
                });
                bonds.push(Bond {
                    i: src,
                    j: site(x + 1, y),
                    coupling: k,
                    src_x: x,
                    dx: 1,
                });
                bonds.push(Bond {
                    i: src,
                    j: site(x + 1, y + 1),
                    coupling: k,
                    src_x: x,
                    dx: 1,
                });
            }
        }
        let mut lat = SpinLattice {
            kind,
            l1: n,
            l2: m,
            twist_mask: vec![false; bonds.len()],
            bonds,
        };
        lat.set_seam_wall();
        Ok(lat)
    }

    pub fn sites(&self) -> usize {
        self.l1 as usize * self.l2 as usize
    }

    pub fn site_index(&self, x: u32, y: u32) -> usize {
        (x % self.l1) as usize * self.l2 as usize + (y % self.l2) as usize
    }

    /// Wall on the seam between columns L₁−1 and 0 (antiperiodic x).
    pub fn set_seam_wall(&mut self) {
        self.clear_twist();
        self.xor_wall_at_cut(self.l1 - 1);
    }

    pub fn clear_twist(&mut self) {
        self.twist_mask.iter_mut().for_each(|m| *m = false);
    }

    /// XOR a wall at the vertical cut between columns c and c+1 into
    /// the mask; an even stack of homologous walls cancels out.
    pub fn xor_wall_at_cut(&mut self, c: u32) {
        let c = c % self.l1;
        let l1 = self.l1;
        for (mask, bond) in self.twist_mask.iter_mut().zip(&self.bonds) {
            if bond.cut_crossings(c, l1) % 2 == 1 {
                *mask ^= true;
            }
        }
    }

    /// Gauge deformation: flipping σ → −σ on `region` re-routes the
    /// wall across the region boundary without changing any physics.
    pub fn deform_twist_by_flipping(&mut self, region: &[usize]) {
        let in_region = {
            let mut v = vec![false; self.sites()];
            for &s in region {
                v[s] = true;
            }
            v
        };
        for (mask, bond) in self.twist_mask.iter_mut().zip(&self.bonds) {
            if in_region[bond.i] != in_region[bond.j] {
                *mask ^= true;
            }
        }
    }

    /// Human-readable bond dump for manual geometry audits: one line
    /// per bond with endpoint coordinates, family coupling and wall
    /// membership.
    pub fn bond_dump(&self) -> String {
        let coords = |site: usize| {
            let x = site / self.l2 as usize;
            let y = site % self.l2 as usize;
            format!("({x},{y})")
        };
        let mut out = format!(
            "{:?} {}x{} — {} sites, {} bonds\n",
            self.kind,
            self.l1,
            self.l2,
            self.sites(),
            self.bonds.len()
        );
        for (idx, b) in self.bonds.iter().enumerate() {
            out.push_str(&format!(
                "{idx:4}: {} -- {}  K={}  [col {} dx {}]{}\n",
                coords(b.i),
                coords(b.j),
                b.coupling,
                b.src_x,
                b.dx,
                if self.twist_mask[idx] { "  WALL" } else { "" }
            ));
        }
        out
    }

    pub(crate) fn twisted_coupling(&self, b: usize) -> R {
        if self.twist_mask[b] {
            -self.bonds[b].coupling
        } else {
            self.bonds[b].coupling
        }
    }

    /// Parity audit: a valid wall is a closed loop on the dual lattice,
    /// so it crosses the boundary of every face an even number of times
    /// and frustrates no face.
    pub fn wall_parity_audit(&self) -> Result<()> {
        for face in self.faces() {
            let crossings: usize = face.iter().filter(|&&idx| self.twist_mask[idx]).count();
            if crossings % 2 != 0 {
                return Err(Error::InternalConsistency(
                    "twist mask is not a closed dual loop (odd face crossing)".into(),
                ));
            }
        }
        Ok(())
    }

    /// Faces of the lattice as lists of bond indices; uses the fixed
    /// construction order of the bond list (per site: a/b for square,
    /// vertical/horizontal/diagonal for triangular), so parallel bonds
    /// on small tori stay distinct.
    fn faces(&self) -> Vec<Vec<usize>> {
        let l1 = self.l1;
        let l2 = self.l2;
        let cell = |x: u32, y: u32| ((x % l1) * l2 + (y % l2)) as usize;
        let mut faces = Vec::new();
        match self.kind {
            LatticeKind::Square => {
                let a_bond = |x: u32, y: u32| 2 * cell(x, y);
                let b_bond = |x: u32, y: u32| 2 * cell(x, y) + 1;
                for x in 0..l1 {
                    for y in 0..l2 {
                        faces.push(vec![
                            a_bond(x, y),
                            a_bond(x, y + 1),
                            b_bond(x, y),
                            b_bond(x + 1, y),
                        ]);
                    }
                }
            }
            _ => {
                // crossing the right edge follows the zigzag identification
                let shift = if self.kind == LatticeKind::TriangularFig1 {
                    (l1 / 2) % l2
                } else {
                    0
                };
                let cell_wrapped = move |x: u32, y: u32| -> usize {
                    let (mut x, mut y) = (x, y % l2);
                    if x >= l1 {
                        x -= l1;
                        y = (y + shift) % l2;
                    }
                    (x * l2 + y) as usize
                };
                let h_bond = |x: u32, y: u32| 3 * cell(x, y) + 1;
                let d_bond = |x: u32, y: u32| 3 * cell(x, y) + 2;
                for x in 0..l1 {
                    for y in 0..l2 {
                        // up triangle {(x,y),(x+1,y),(x+1,y+1)}: third edge
                        // is the vertical bond at the resolved column x+1
                        faces.push(vec![h_bond(x, y), d_bond(x, y), 3 * cell_wrapped(x + 1, y)]);
                        // down triangle {(x,y),(x,y+1),(x+1,y+1)}
                        faces.push(vec![3 * cell(x, y), d_bond(x, y), h_bond(x, y + 1)]);
                    }
                }
            }
        }
        faces
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_bond_count_and_seam() {
        let lat = SpinLattice::square(4u32, 3, 0.3f64, 0.2).unwrap();
        assert_eq!(lat.bonds.len(), 2 * 12);
        let seam: usize = lat.twist_mask.iter().filter(|&&m| m).count();
        assert_eq!(seam, 3); // one a-bond per row crosses the seam
        lat.wall_parity_audit().unwrap();
    }

    #[test]
    fn triangular_bond_count_and_seam() {
        let lat = SpinLattice::triangular_fig1(4u32, 2, 0.3f64, 0.2).unwrap();
        assert_eq!(lat.bonds.len(), 3 * 8);
        let seam: usize = lat.twist_mask.iter().filter(|&&m| m).count();
        assert_eq!(seam, 2 * 2); // horizontal + diagonal per row
        lat.wall_parity_audit().unwrap();
    }

    #[test]
    fn zigzag_audit_passes() {
        // sizes where the zigzag identification genuinely differs
        let lat = SpinLattice::triangular_fig1(4u32, 4, 0.25f64, 0.15).unwrap();
        lat.wall_parity_audit().unwrap();
        let lat = SpinLattice::triangular_fig1(6u32, 4, 0.25f64, 0.15).unwrap();
        lat.wall_parity_audit().unwrap();
    }

    #[test]
    fn zigzag_needs_even_columns() {
        assert!(SpinLattice::triangular_fig1(5u32, 2, 0.2f64, 0.2).is_err());
        assert!(SpinLattice::triangular_fig2(5u32, 2, 0.2f64, 0.2).is_ok());
    }

    #[test]
    fn double_wall_cancels() {
        let mut lat = SpinLattice::square(4u32, 2, 0.3f64, 0.3).unwrap();
        lat.clear_twist();
        lat.xor_wall_at_cut(0);
        lat.xor_wall_at_cut(0);
        assert!(lat.twist_mask.iter().all(|&m| !m));
    }

    #[test]
    fn interior_wall_is_closed() {
        let mut lat = SpinLattice::square(4u32, 3, 0.3f64, 0.3).unwrap();
        lat.clear_twist();
        lat.xor_wall_at_cut(1);
        lat.wall_parity_audit().unwrap();
        let mut tri = SpinLattice::triangular_fig1(4u32, 2, 0.3f64, 0.2).unwrap();
        tri.clear_twist();
        tri.xor_wall_at_cut(2);
        tri.wall_parity_audit().unwrap();
        let mut tri2 = SpinLattice::triangular_fig1(6u32, 4, 0.3f64, 0.2).unwrap();
        tri2.clear_twist();
        tri2.xor_wall_at_cut(1);
        tri2.wall_parity_audit().unwrap();
    }

    #[test]
    fn broken_mask_fails_audit() {
        let mut lat = SpinLattice::square(4u32, 3, 0.3f64, 0.3).unwrap();
        lat.clear_twist();
        lat.twist_mask[0] = true; // a single flipped bond frustrates its faces
        assert!(lat.wall_parity_audit().is_err());
    }

    #[test]
    fn cut_crossing_arithmetic() {
        let b = Bond {
            i: 0,
            j: 0,
            coupling: 1.0f64,
            src_x: 2,
            dx: 4,
        };
        // walk 2 → 6 on a 4-torus passes boundaries 2→3, 3→0, 0→1, 1→2
        assert_eq!(b.cut_crossings(2, 4), 1);
        assert_eq!(b.cut_crossings(3, 4), 1);
        assert_eq!(b.cut_crossings(0, 4), 1);
        assert_eq!(b.cut_crossings(1, 4), 1);
    }
}
