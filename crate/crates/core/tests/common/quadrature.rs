//! Brute-force quadrature for the s-type Gaussian integrals.
//!
//! Overlap and kinetic integrals are separable into 1D integrals done on a grid.
//! Coulomb integrals use 1/r = (2/√π) ∫₀^∞ exp(−u² r²) du, which makes the spatial
//! part separable; the u integral is done numerically.

use std::f64::consts::PI;

use cse_core::integrals::{build_integral_set, sto6g_hydrogen, ContractedShell, Geometry};

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

const GRID: (f64, f64, usize) = (-20.0, 30.0, 20_000);

fn overlap_1d(a: f64, ax: f64, b: f64, bx: f64) -> f64 {
    simpson(|x| (-a * (x - ax).powi(2) - b * (x - bx).powi(2)).exp(), GRID.0, GRID.1, GRID.2)
}

/// ∫ g_a ∂²g_b dx
fn laplacian_1d(a: f64, ax: f64, b: f64, bx: f64) -> f64 {
    simpson(
        |x| {
            let d = x - bx;
            (4.0 * b * b * d * d - 2.0 * b) * (-a * (x - ax).powi(2) - b * d * d).exp()
        },
        GRID.0,
        GRID.1,
        GRID.2,
    )
}

/// ∫ exp(−a(x−A)² − b(x−B)² − c(x−C)²) dx by completing the square.
fn gaussian3(a: f64, ax: f64, b: f64, bx: f64, c: f64, cx: f64) -> f64 {
    let p = a + b + c;
    let m = (a * ax + b * bx + c * cx) / p;
    let rest = a * ax * ax + b * bx * bx + c * cx * cx - p * m * m;
    (PI / p).sqrt() * (-rest).exp()
}

/// ∫∫ exp(−p(x−P)² − q(y−Q)² − w(x−y)²) dx dy
fn gaussian_pair(p: f64, px: f64, q: f64, qx: f64, w: f64) -> f64 {
    let det = p * q + w * (p + q);
    PI / det.sqrt() * (-(p * q * w / det) * (px - qx).powi(2)).exp()
}

/// Maps u ∈ [0, ∞) to t ∈ [0, 1).
fn u_integral(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    2.0 / PI.sqrt()
        * simpson(
            |t| {
                if t >= 1.0 {
                    return 0.0;
                }
                let u = t / (1.0 - t);
                f(u) / (1.0 - t).powi(2)
            },
            0.0,
            1.0,
            n,
        )
}

struct Prim {
    a: f64,
    w: f64,
    r: [f64; 3],
}

fn prims(shell: &ContractedShell, g: &Geometry) -> Vec<Prim> {
    let r = g.centers()[shell.center()];
    shell.primitives().map(|(a, w)| Prim { a, w, r }).collect()
}

fn overlap(x: &[Prim], y: &[Prim]) -> f64 {
    let mut s = 0.0;
    for p in x {
        for q in y {
            s += p.w * q.w * (0..3).map(|d| overlap_1d(p.a, p.r[d], q.a, q.r[d])).product::<f64>();
        }
    }
    s
}

fn kinetic(x: &[Prim], y: &[Prim]) -> f64 {
    let mut t = 0.0;
    for p in x {
        for q in y {
            let s: Vec<f64> = (0..3).map(|d| overlap_1d(p.a, p.r[d], q.a, q.r[d])).collect();
            let l: Vec<f64> = (0..3).map(|d| laplacian_1d(p.a, p.r[d], q.a, q.r[d])).collect();
            let lap = l[0] * s[1] * s[2] + s[0] * l[1] * s[2] + s[0] * s[1] * l[2];
            t += -0.5 * p.w * q.w * lap;
        }
    }
    t
}

fn nuclear(x: &[Prim], y: &[Prim], g: &Geometry) -> f64 {
    let mut v = 0.0;
    for (c, &z) in g.centers().iter().zip(g.charges()) {
        for p in x {
            for q in y {
                let k = u_integral(|u| (0..3).map(|d| gaussian3(p.a, p.r[d], q.a, q.r[d], u * u, c[d])).product(), 20_000);
                v -= z * p.w * q.w * k;
            }
        }
    }
    v
}

/// (ab|cd) in chemists' notation.
fn repulsion(a: &[Prim], b: &[Prim], c: &[Prim], d: &[Prim]) -> f64 {
    let mut total = 0.0;
    for pa in a {
        for pb in b {
            let p = pa.a + pb.a;
            let pc: Vec<f64> = (0..3).map(|k| (pa.a * pa.r[k] + pb.a * pb.r[k]) / p).collect();
            let kab = (-(pa.a * pb.a / p) * (0..3).map(|k| (pa.r[k] - pb.r[k]).powi(2)).sum::<f64>()).exp();
            for pc_ in c {
                for pd in d {
                    let q = pc_.a + pd.a;
                    let qc: Vec<f64> = (0..3).map(|k| (pc_.a * pc_.r[k] + pd.a * pd.r[k]) / q).collect();
                    let kcd = (-(pc_.a * pd.a / q) * (0..3).map(|k| (pc_.r[k] - pd.r[k]).powi(2)).sum::<f64>()).exp();
                    let w = pa.w * pb.w * pc_.w * pd.w * kab * kcd;
                    total += w * u_integral(|u| (0..3).map(|k| gaussian_pair(p, pc[k], q, qc[k], u * u)).product(), 4_000);
                }
            }
        }
    }
    total
}

/// Largest |engine − quadrature| over the one-electron matrices and over a set
/// of repulsion integrals covering every center pattern.
pub struct Deviation {
    pub one_electron: f64,
    pub repulsion: f64,
}

pub fn deviation(g: &Geometry) -> Deviation {
    let template = sto6g_hydrogen();
    let shells: Vec<_> = (0..g.len()).map(|i| template.place(i).unwrap()).collect();
    let ints = build_integral_set(g, &shells).unwrap();
    let p: Vec<Vec<Prim>> = shells.iter().map(|s| prims(s, g)).collect();
    let n = shells.len();
    let mut one_electron: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            one_electron = one_electron
                .max((ints.overlap[(i, j)] - overlap(&p[i], &p[j])).abs())
                .max((ints.kinetic[(i, j)] - kinetic(&p[i], &p[j])).abs())
                .max((ints.nuclear[(i, j)] - nuclear(&p[i], &p[j], g)).abs());
        }
    }
    let quartets: &[(usize, usize, usize, usize)] = &[(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1), (0, 0, 0, 1), (1, 0, n - 1, 0), (0, 1, n - 1, n - 1)];
    let mut repulsion_dev: f64 = 0.0;
    for &(a, b, c, d) in quartets {
        repulsion_dev = repulsion_dev.max((ints.eri.get(a, b, c, d) - repulsion(&p[a], &p[b], &p[c], &p[d])).abs());
    }
    Deviation {
        one_electron,
        repulsion: repulsion_dev,
    }
}

/// F₀(x) = ∫₀¹ exp(−x t²) dt
pub fn boys_f0(x: f64) -> f64 {
    simpson(|t| (-x * t * t).exp(), 0.0, 1.0, 2000)
}
