//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

/// Clebsch–Gordan coefficients for fixed `(j1, j2)`, obtained by building the
/// coupled basis explicitly: each highest-weight state `|J J⟩` is the unit
/// vector of the `M = J` sector orthogonal to all states of larger `J`
/// (phase fixed by a positive `m1 = j1` component), and the rest of the
/// multiplet follows by repeated application of `J₋ = J₋⁽¹⁾ + J₋⁽²⁾`.
///
/// All labels are doubled integers.
pub struct CouplingTable {
    j1: i32,
    j2: i32,
    states: HashMap<(i32, i32), Vec<f64>>,
}

impl CouplingTable {
    pub fn new(j1: i32, j2: i32) -> Self {
        let mut table = CouplingTable {
            j1,
            j2,
            states: HashMap::new(),
        };
        let mut big_j = j1 + j2;
        while big_j >= (j1 - j2).abs() {
            // highest state
            let mut v = vec![0.0; table.size()];
            v[table.index(j1, big_j - j1)] = 1.0;
            let mut higher = big_j + 2;
            while higher <= j1 + j2 {
                let u = &table.states[&(higher, big_j)];
                let overlap: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= overlap * y;
                }
                higher += 2;
            }
            normalize(&mut v);
            if v[table.index(j1, big_j - j1)] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            table.states.insert((big_j, big_j), v.clone());
            let mut m = big_j;
            while m > -big_j {
                v = table.lower(&v);
                normalize(&mut v);
                m -= 2;
                table.states.insert((big_j, m), v.clone());
            }
            big_j -= 2;
        }
        table
    }

    fn size(&self) -> usize {
        ((self.j1 + 1) * (self.j2 + 1)) as usize
    }

    fn index(&self, m1: i32, m2: i32) -> usize {
        (((m1 + self.j1) / 2) * (self.j2 + 1) + (m2 + self.j2) / 2) as usize
    }

    fn lower(&self, v: &[f64]) -> Vec<f64> {
        let ladder = |j: i32, m: i32| (((j + m) as f64) * ((j - m + 2) as f64)).sqrt() / 2.0;
        let mut out = vec![0.0; self.size()];
        let mut m1 = -self.j1;
        while m1 <= self.j1 {
            let mut m2 = -self.j2;
            while m2 <= self.j2 {
                let c = v[self.index(m1, m2)];
                if c != 0.0 {
                    if m1 > -self.j1 {
                        out[self.index(m1 - 2, m2)] += c * ladder(self.j1, m1);
                    }
                    if m2 > -self.j2 {
                        out[self.index(m1, m2 - 2)] += c * ladder(self.j2, m2);
                    }
                }
                m2 += 2;
            }
            m1 += 2;
        }
        out
    }

    /// `⟨j1 m1; j2 m2 | J M⟩`.
    pub fn coefficient(&self, m1: i32, m2: i32, big_j: i32, big_m: i32) -> f64 {
        if m1 + m2 != big_m {
            return 0.0;
        }
        match self.states.get(&(big_j, big_m)) {
            Some(v) => v[self.index(m1, m2)],
            None => 0.0,
        }
    }

    /// `(j1 j2 j3; m1 m2 m3) = (-1)^{j1-j2-m3} / √(2j3+1) · ⟨j1 m1; j2 m2 | j3, -m3⟩`.
    pub fn three_j(&self, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
        let phase_twice = self.j1 - self.j2 - m3;
        assert_eq!(phase_twice.rem_euclid(2), 0);
        let phase = if (phase_twice / 2).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        phase / ((j3 + 1) as f64).sqrt() * self.coefficient(m1, m2, j3, -m3)
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Product quadrature on the unit sphere: Gauss–Legendre in `θ ∈ [0, π]`
/// (with the `sin θ` Jacobian folded into the weights) times the uniform
/// rule in `φ`.
pub struct SphereGrid {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = 0.5 * PI * (xi + 1.0);
            let wt = 0.5 * PI * wi * theta.sin() * 2.0 * PI / n_phi as f64;
            for k in 0..n_phi {
                points.push((theta, 2.0 * PI * k as f64 / n_phi as f64));
                weights.push(wt);
            }
        }
        SphereGrid { points, weights }
    }

    pub fn integrate(&self, values: impl Iterator<Item = Complex64>) -> Complex64 {
        values.zip(&self.weights).map(|(v, w)| v * *w).sum()
    }
}

/// Central finite-difference derivative.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central finite-difference gradient of `f` with respect to the real and
/// imaginary parts of `v`, packed as a complex vector.
pub fn fd_gradient(
    f: impl Fn(&nalgebra::DVector<Complex64>) -> f64,
    v: &nalgebra::DVector<Complex64>,
    h: f64,
) -> nalgebra::DVector<Complex64> {
    let mut g = nalgebra::DVector::<Complex64>::zeros(v.len());
    for k in 0..v.len() {
        for (unit, slot) in [(Complex64::new(h, 0.0), 0), (Complex64::new(0.0, h), 1)] {
            let mut plus = v.clone();
            plus[k] += unit;
            let mut minus = v.clone();
            minus[k] -= unit;
            let d = (f(&plus) - f(&minus)) / (2.0 * h);
            if slot == 0 {
                g[k].re = d;
            } else {
                g[k].im = d;
            }
        }
    }
    g
}

/// Largest singular value of `Σ c_i [D, a_i]` assembled densely from the
/// triple, without going through the solver's generator basis.
pub fn dense_constraint_norm(t: &pointforge_core::TruncatedTriple, c: &[f64]) -> f64 {
    let n = t.dim();
    let mut k = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for (a, &ci) in t.algebra_basis.iter().zip(c) {
        let a = a.matrix();
        for r in 0..n {
            for s in 0..n {
                k[(r, s)] += a[(r, s)] * (t.dirac_eigenvalues[r] - t.dirac_eigenvalues[s]) * ci;
            }
        }
    }
    k.singular_values().max()
}

/// `n` nearly equidistributed unit vectors (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Unweighted raw stress `Σ_{i<j} (d_ij − ‖x_i − x_j‖)²` and its gradient.
pub fn raw_stress(d: &[Vec<f64>], x: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    let k = x.len();
    let mut s = 0.0;
    let mut g = vec![vec![0.0; x[0].len()]; k];
    for i in 0..k {
        for j in i + 1..k {
            let diff: Vec<f64> = x[i].iter().zip(&x[j]).map(|(a, b)| a - b).collect();
            let dist = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = dist - d[i][j];
            s += r * r;
            if dist > 0.0 {
                for (a, dv) in diff.iter().enumerate() {
                    g[i][a] += 2.0 * r * dv / dist;
                    g[j][a] -= 2.0 * r * dv / dist;
                }
            }
        }
    }
    (s, g)
}

/// Plain gradient descent with backtracking on the unweighted stress.
pub fn descend_stress(d: &[Vec<f64>], mut x: Vec<Vec<f64>>, iterations: usize) -> (f64, Vec<Vec<f64>>) {
    let mut step = 0.1;
    let (mut s, mut g) = raw_stress(d, &x);
    for _ in 0..iterations {
        let gn: f64 = g.iter().flatten().map(|v| v * v).sum();
        if gn < 1e-26 {
            break;
        }
        loop {
            let trial: Vec<Vec<f64>> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| xi.iter().zip(gi).map(|(a, b)| a - step * b).collect())
                .collect();
            let (ts, tg) = raw_stress(d, &trial);
            if ts <= s - 0.25 * step * gn {
                x = trial;
                s = ts;
                g = tg;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                return (s, x);
            }
        }
    }
    (s, x)
}
