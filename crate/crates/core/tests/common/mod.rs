//! Independent oracles shared by the integration suites. Everything in
//! here deliberately avoids the library's own computational paths:
//! Bessel values come from the power series, the SU(2) chain from
//! geometric convolution quadrature, and small transfer matrices are
//! written out by hand.

#![allow(dead_code)]

/// Modified Bessel function I_n(x) by its power series
/// Σ_k (x/2)^{n+2k} / (k! (n+k)!), summed to machine precision.
pub fn bessel_i(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // leading term (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= half * half / (k * (k + n as f64));
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
        k += 1.0;
    }
}

/// Partition function of the G×G principal chiral chain for G = SU(2)
/// at even length L, via geometric convolution quadrature.
///
/// The bond kernel k(U) = e^{βRe Tr U} = e^{2β cos θ} is a class
/// function, and the chain partition function is the L-fold group
/// convolution of k evaluated at the identity. For SU(2) the class of
/// a product V⁻¹W with independently Haar-distributed axes satisfies
/// cos ψ = cos φ cos θ + sin φ sin θ·u with u uniform on [−1, 1], so a
/// convolution against k reduces to a single class integral with the
/// u-average of e^{2β cos ψ} available in closed form. No characters
/// anywhere.
pub fn su2_chain_z(beta: f64, l: u32) -> f64 {
    assert!(l >= 4 && l % 4 == 0, "oracle implemented for L = 4, 8, ...");
    let n = 512usize;
    let grid: Vec<f64> = (0..n)
        .map(|i| std::f64::consts::PI * (i as f64 + 0.5) / n as f64)
        .collect();
    let weight: Vec<f64> = grid
        .iter()
        .map(|&t| 2.0 / (n as f64) * t.sin() * t.sin())
        .collect();

    // u-averaged kernel: ∫ du/2 e^{2β cos ψ} with cos ψ = cosφcosθ + sinφsinθ u
    let kern_avg = |phi: f64, theta: f64| -> f64 {
        let s = phi.sin() * theta.sin();
        if s.abs() < 1e-14 || beta == 0.0 {
            return (2.0 * beta * (phi.cos() * theta.cos())).exp();
        }
        let hi = 2.0 * beta * (phi - theta).cos();
        let lo = 2.0 * beta * (phi + theta).cos();
        (hi.exp() - lo.exp()) / (4.0 * beta * s)
    };

    // c2(θ) = (k * k)(θ)
    let c2: Vec<f64> = grid
        .iter()
        .map(|&theta| {
            grid.iter()
                .zip(&weight)
                .map(|(&phi, &w)| w * (2.0 * beta * phi.cos()).exp() * kern_avg(phi, theta))
                .sum()
        })
        .collect();

    let mut f = c2;
    let mut halves = 1u32; // f = k^{*2^halves}; stop at l/2 so the final
                           // pairing f*f evaluated at the identity gives k^{*l}
    let gl = gauss_legendre(40);
    while 1 << (halves + 1) <= l / 2 {
        // f ← f * f on the grid; the u-average of f(ψ) is analytic in
        // u, so Gauss–Legendre converges spectrally
        let next: Vec<f64> = grid
            .iter()
            .map(|&theta| {
                grid.iter()
                    .zip(&weight)
                    .zip(&f)
                    .map(|((&phi, &w), &fv)| {
                        let mut acc = 0.0;
                        for &(u, uw) in &gl {
                            let c = (phi.cos() * theta.cos() + phi.sin() * theta.sin() * u)
                                .clamp(-1.0, 1.0);
                            acc += 0.5 * uw * interp(&grid, &f, c.acos());
                        }
                        w * fv * acc
                    })
                    .sum()
            })
            .collect();
        f = next;
        halves += 1;
    }
    assert_eq!(
        1 << halves,
        l / 2,
        "L must be a power of two for this oracle"
    );
    // Z = (f * f)(identity) = ∫ class f(θ)²
    grid.iter()
        .zip(&weight)
        .zip(&f)
        .map(|((_, &w), &fv)| w * fv * fv)
        .sum()
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on
/// the Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // P_n(x) and P'_n(x) via the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Cubic (Catmull-Rom) interpolation on a uniform midpoint grid over
/// [0, π]. Class functions are even about both endpoints, so the
/// stencil is continued by reflection rather than clamping.
fn interp(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len() as isize;
    let step = std::f64::consts::PI / n as f64;
    let pos = x / step - 0.5;
    let i = pos.floor() as isize;
    let t = pos - i as f64;
    let mirrored = |k: isize| -> f64 {
        let k = if k < 0 {
            -1 - k
        } else if k >= n {
            2 * n - 1 - k
        } else {
            k
        };
        values[k as usize]
    };
    let (p0, p1, p2, p3) = (
        mirrored(i - 1),
        mirrored(i),
        mirrored(i + 1),
        mirrored(i + 2),
    );
    let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
    let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
    let c = -0.5 * p0 + 0.5 * p2;
    ((a * t + b) * t + c) * t + p1
}

/// 2×2 transfer matrix for the periodic Ising chain in the ½Σ measure;
/// returns (Z, Z_twisted) for a chain of length l with one flipped bond
/// in the twisted case.
pub fn ising_chain_transfer(beta: f64, l: u32) -> (f64, f64) {
    // T = ½ [[e^β, e^{-β}], [e^{-β}, e^β]]; twisted bond flips β
    let t = mat2(
        0.5 * beta.exp(),
        0.5 * (-beta).exp(),
        0.5 * (-beta).exp(),
        0.5 * beta.exp(),
    );
    let t_flip = mat2(
        0.5 * (-beta).exp(),
        0.5 * beta.exp(),
        0.5 * beta.exp(),
        0.5 * (-beta).exp(),
    );
    let mut p = ident();
    for _ in 0..l - 1 {
        p = mul2(p, t);
    }
    let z = trace2(mul2(p, t));
    let zt = trace2(mul2(p, t_flip));
    (z, zt)
}

type Mat2 = [[f64; 2]; 2];

fn mat2(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
    [[a, b], [c, d]]
}

fn ident() -> Mat2 {
    mat2(1.0, 0.0, 0.0, 1.0)
}

fn mul2(x: Mat2, y: Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

fn trace2(m: Mat2) -> f64 {
    m[0][0] + m[1][1]
}

/// Exact Z₂ lattice gauge theory on an L₁×L₂ torus by enumerating all
/// link configurations; `twist` multiplies one plaquette argument by
/// the nontrivial center element (−1).
pub fn z2_gauge_z(l1: u32, l2: u32, beta: f64, twist: bool) -> f64 {
    let links = 2 * (l1 * l2) as usize;
    assert!(links <= 24);
    let link =
        |x: u32, y: u32, dir: usize| -> usize { 2 * ((x % l1) * l2 + (y % l2)) as usize + dir };
    let mut z = 0.0;
    for cfg in 0u64..(1 << links) {
        let u = |idx: usize| -> f64 {
            if (cfg >> idx) & 1 == 1 {
                1.0
            } else {
                -1.0
            }
        };
        let mut action = 0.0;
        for x in 0..l1 {
            for y in 0..l2 {
                let plaq = u(link(x, y, 0))
                    * u(link(x + 1, y, 1))
                    * u(link(x, y + 1, 0))
                    * u(link(x, y, 1));
                let sign = if twist && x == 0 && y == 0 { -1.0 } else { 1.0 };
                action += beta * sign * plaq;
            }
        }
        z += action.exp();
    }
    z / (1u64 << links) as f64
}
