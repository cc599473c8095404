//! Independent numerical oracles for the integration suites: Stirling-series
//! special functions, adaptive Gauss–Kronrod quadrature of the kernel pair
//! integrals, and a dense cyclic-Jacobi eigensolver.  Nothing here shares
//! code with the library paths under test.

#![allow(dead_code)] // each integration binary uses a subset

/// Euler–Mascheroni constant to f64 precision.
pub const GAMMA_ORACLE: f64 = 0.577_215_664_901_532_9;

const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// ln Γ(x) by recurrence lift to x ≥ 30 followed by the Stirling series;
/// relative error far below 1e−15 there.
pub fn ln_gamma_oracle(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    let mut y = x;
    while y < 30.0 {
        shift += y.ln();
        y += 1.0;
    }
    let mut series = 0.0;
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

pub fn gamma_oracle(x: f64) -> f64 {
    ln_gamma_oracle(x).exp()
}

const DIGAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// ψ(x) by recurrence lift to x ≥ 30 followed by the asymptotic series.
pub fn digamma_oracle(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut acc = 0.0;
    let mut y = x;
    while y < 30.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_SERIES {
        series += c * pow;
        pow *= inv2;
    }
    acc + y.ln() - 0.5 / y - series
}

// 15-point Kronrod extension of 7-point Gauss, nodes and weights on [−1, 1].
const K15_NODES: [f64; 8] = [
    0.0,
    0.207_784_955_007_898_5,
    0.405_845_151_377_397_2,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_5,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_812_6,
];
const K15_WEIGHTS: [f64; 8] = [
    0.209_482_141_084_727_8,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_9,
    0.104_790_010_322_250_2,
    0.063_092_092_629_978_55,
    0.022_935_322_010_529_22,
];
// Gauss weights attached to the even-index Kronrod nodes (0, 2, 4, 6).
const G7_WEIGHTS: [f64; 4] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let f0 = f(c);
    let mut k = K15_WEIGHTS[0] * f0;
    let mut g = G7_WEIGHTS[0] * f0;
    for i in 1..8 {
        let fp = f(c + r * K15_NODES[i]);
        let fm = f(c - r * K15_NODES[i]);
        k += K15_WEIGHTS[i] * (fp + fm);
        if i % 2 == 0 {
            g += G7_WEIGHTS[i / 2] * (fp + fm);
        }
    }
    (r * k, (r * (k - g)).abs())
}

/// Globally adaptive integral of `f` over consecutive panels between sorted
/// breakpoints: the panel with the largest Gauss–Kronrod error estimate is
/// bisected until the summed error meets the absolute target.  Singular or
/// kinked points must be breakpoints (the Kronrod nodes never touch panel
/// endpoints, so endpoint singularities are safe).
pub fn integrate(f: &dyn Fn(f64) -> f64, breakpoints: &[f64], tol: f64) -> f64 {
    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
    }
    let mut panels: Vec<Panel> = Vec::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(f, w[0], w[1]);
            panels.push(Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    for _ in 0..4000 {
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        if total_error <= tol {
            break;
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, value, .. } = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // Cannot bisect further in f64; keep the value, drop the error.
            panels.push(Panel {
                a,
                b,
                value,
                error: 0.0,
            });
            continue;
        }
        for (lo, hi) in [(a, m), (m, b)] {
            let (value, error) = gk15(f, lo, hi);
            panels.push(Panel {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
    panels.iter().map(|p| p.value).sum()
}

/// Raw radial kernels of the three nontrivial forms.
#[derive(Debug, Clone, Copy)]
pub enum KernelKind {
    /// 1/|z| inside the unit ball, 0 outside.
    Log,
    /// 1/|z| outside the unit ball, 0 inside.
    Far,
    /// |z|^{−1−2s}.
    Frac(f64),
}

impl KernelKind {
    fn eval(self, z: f64) -> f64 {
        match self {
            KernelKind::Log => {
                if z <= 1.0 {
                    1.0 / z
                } else {
                    0.0
                }
            }
            KernelKind::Far => {
                if z > 1.0 {
                    1.0 / z
                } else {
                    0.0
                }
            }
            KernelKind::Frac(s) => z.powf(-1.0 - 2.0 * s),
        }
    }

    /// −K₁(z) where K₁ is the kernel antiderivative vanishing at infinity;
    /// the integrand of the exterior contribution.
    fn tail(self, z: f64) -> f64 {
        match self {
            KernelKind::Log => {
                if z < 1.0 {
                    -z.ln()
                } else {
                    0.0
                }
            }
            KernelKind::Far => panic!("the far-field form has no exterior term"),
            KernelKind::Frac(s) => z.powf(-2.0 * s) / (2.0 * s),
        }
    }
}

fn sorted_breakpoints(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for &p in interior {
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts
}

/// ∬_{cᵢ×cⱼ} k(|x−y|) dx dy for cells at lag d = |i−j| on a uniform grid of
/// width h, reduced to the 1-D integral of k against the tent of half-width
/// h centered at d·h.
pub fn pair_integral_oracle(kind: KernelKind, d: usize, h: f64) -> f64 {
    let tol = 1e-13;
    if d == 0 {
        // Even part: 2∫₀ʰ (h−z) k(z) dz, only finite kernels call this.
        let f = move |z: f64| (h - z) * kind.eval(z);
        return 2.0 * integrate(&f, &sorted_breakpoints(0.0, h, &[1.0]), tol);
    }
    let center = d as f64 * h;
    let f = move |z: f64| (h - (z - center).abs()) * kind.eval(z);
    let pts = sorted_breakpoints(center - h, center + h, &[center, 1.0]);
    integrate(&f, &pts, tol)
}

/// ∬_{cᵢ×(ℝ∖Ω)} k(|x−y|) dy dx for one side at edge distance `delta`.
pub fn exterior_oracle(kind: KernelKind, delta: f64, h: f64) -> f64 {
    let f = move |z: f64| kind.tail(z);
    let pts = sorted_breakpoints(delta, delta + h, &[1.0]);
    integrate(&f, &pts, 1e-13)
}

/// Dense difference-form matrix (diagonal collects the pair sums and the
/// exterior term) with kernel normalizer `c`, built entirely from the
/// quadrature oracle.
pub fn difference_form_oracle(kind: KernelKind, a: f64, b: f64, n: usize, c: f64) -> Vec<f64> {
    let h = (b - a) / n as f64;
    // The zero-lag entry is never read (differences vanish on the diagonal
    // cell) and its integral diverges for the singular kernels.
    let pair: Vec<f64> = (0..n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                pair_integral_oracle(kind, d, h)
            }
        })
        .collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[i * n + j] = -c * pair[i.abs_diff(j)];
            }
        }
        let mut diag: f64 = (0..n).filter(|&j| j != i).map(|j| pair[i.abs_diff(j)]).sum();
        diag += exterior_oracle(kind, i as f64 * h, h);
        diag += exterior_oracle(kind, (n - 1 - i) as f64 * h, h);
        m[i * n + i] = c * diag;
    }
    m
}

/// Dense product-form (far-field) matrix from the quadrature oracle.
pub fn product_form_oracle(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    let pair: Vec<f64> = (0..n)
        .map(|d| pair_integral_oracle(KernelKind::Far, d, h))
        .collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = pair[i.abs_diff(j)];
        }
    }
    m
}

/// All eigenvalues (ascending) and matching eigenvector columns of a dense
/// symmetric matrix, by cyclic Jacobi rotations.
pub fn jacobi_eigen(a_in: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a_in.len(), n * n);
    let mut a = a_in.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-13 * fro.max(1e-300);
    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let values: Vec<f64> = idx.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in idx.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new_col] = v[k * n + old_col];
        }
    }
    (values, vectors)
}
