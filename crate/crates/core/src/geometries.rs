//! Builders for concrete truncated triples (circle, round sphere, perturbed
//! sphere) and Weyl-law estimates of dimension and volume.
//!
//! Circle: `H_Λ = span{e_n : |n| ≤ ⌊Λ⌋}` with `D e_n = n e_n`, and
//! `e^{iθ}` acting as the shift `e_n ↦ e_{n+1}`.
//!
//! Sphere: the Dirac eigenbasis is built from doublets of spin-weighted
//! harmonics. For half-integer `j` and `σ = ±1`,
//!
//! ```text
//! e^σ_{jm} = ( ₋½Y_{jm}, -iσ ₊½Y_{jm} ) / √2,    D e^σ_{jm} = σ (j + ½) e^σ_{jm},
//! ```
//!
//! which diagonalizes `D = [[0, i ð̄], [i ð, 0]]` with the eth convention of
//! [`crate::wigner`]. Matrix elements of multiplication operators are
//! assembled from [`triple_integral`]; no numerical quadrature is involved.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I};
use crate::registry::{Named, Registry};
use crate::triple_model::{BasisLabel, HermitianMatrix, Manifold, TruncatedTriple};
use crate::wigner::{spin_weighted_y, triangle_allowed, triple_integral, HalfInteger};

/// Which Dirac eigenvalues survive the truncation of the sphere.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffConvention {
    /// Keep `|λ| ≤ Λ`.
    StrictAbs,
    /// Keep the shells `|λ| ≤ ⌊Λ⌋ + 1`; reproduces `dim H_Λ = 84` at `Λ = 5`.
    #[default]
    PaperS2,
}

impl CutoffConvention {
    /// Largest kept eigenvalue magnitude on the sphere.
    pub fn max_shell(self, cutoff: f64) -> i32 {
        let base = cutoff.floor() as i32;
        match self {
            CutoffConvention::StrictAbs => base,
            CutoffConvention::PaperS2 => base + 1,
        }
    }
}

impl FromStr for CutoffConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" | "strict-abs" => Ok(CutoffConvention::StrictAbs),
            "paper" | "paper-s2" => Ok(CutoffConvention::PaperS2),
            other => Err(Error::InvalidArgument(format!(
                "unknown cutoff convention `{other}` (expected `strict` or `paper`)"
            ))),
        }
    }
}

/// How much of the truncated function algebra to materialize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraSpan {
    /// Harmonics up to `l = 2⌊Λ⌋`.
    Full,
    /// Harmonics up to the given `l`.
    UpTo(i32),
    /// No algebra basis; only the embedding components are built.
    EmbeddingOnly,
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if !(cutoff >= 1.0) || !cutoff.is_finite() {
        return Err(Error::InvalidArgument(format!("cutoff must be >= 1, got {cutoff}")));
    }
    Ok(())
}

/// Truncated shift power `P e^{ikθ} P`, indices `n + N` for `|n| ≤ N`.
fn circle_exponential(n_max: i32, k: i32) -> CMatrix {
    let dim = (2 * n_max + 1) as usize;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim as i32 {
        let row = col + k;
        if (0..dim as i32).contains(&row) {
            m[(row as usize, col as usize)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

fn hermitian(m: CMatrix, what: &str) -> Result<HermitianMatrix> {
    HermitianMatrix::new(m, what)
}

pub fn build_circle(cutoff: f64) -> Result<TruncatedTriple> {
    check_cutoff(cutoff)?;
    let n_max = cutoff.floor() as i32;
    let half = Complex64::new(0.5, 0.0);
    let cos_k = |k: i32| (circle_exponential(n_max, k) + circle_exponential(n_max, -k)) * half;
    let sin_k = |k: i32| (circle_exponential(n_max, k) - circle_exponential(n_max, -k)) * (half / I);

    let dim = (2 * n_max + 1) as usize;
    let mut algebra = vec![HermitianMatrix::identity(dim)];
    for k in 1..=2 * n_max {
        algebra.push(hermitian(cos_k(k), &format!("cos {k}θ"))?);
        algebra.push(hermitian(sin_k(k), &format!("sin {k}θ"))?);
    }
    let identity = CMatrix::identity(dim, dim);
    let cos2 = cos_k(2);
    let phi = vec![hermitian(cos_k(1), "cos θ")?, hermitian(sin_k(1), "sin θ")?];
    let phi_sq = vec![
        hermitian((&identity + &cos2) * half, "cos² θ")?,
        hermitian((&identity - &cos2) * half, "sin² θ")?,
    ];
    let triple = TruncatedTriple {
        name: format!("circle(cutoff={cutoff})"),
        cutoff,
        spectral_bound: cutoff,
        dirac_eigenvalues: (-n_max..=n_max).map(f64::from).collect(),
        algebra_basis: algebra,
        phi,
        phi_sq,
        spectral_dim_hint: Some(1),
        manifold: Some(Manifold::Circle),
        basis_labels: Some((-n_max..=n_max).map(|n| BasisLabel::Circle { n }).collect()),
    };
    triple.validate()?;
    Ok(triple)
}

#[derive(Clone, Copy, Debug)]
struct SpinorLabel {
    j: HalfInteger,
    m: HalfInteger,
    sign: i8,
}

/// Dirac eigenbasis labels on the sphere up to the given shell.
fn sphere_labels(max_shell: i32) -> Vec<SpinorLabel> {
    let mut out = Vec::new();
    for k in 1..=max_shell {
        let j = HalfInteger::from_twice(2 * k - 1);
        for sign in [-1i8, 1] {
            let mut m2 = -j.twice();
            while m2 <= j.twice() {
                out.push(SpinorLabel {
                    j,
                    m: HalfInteger::from_twice(m2),
                    sign,
                });
                m2 += 2;
            }
        }
    }
    out
}

struct SphereAssembler {
    labels: Vec<SpinorLabel>,
}

impl SphereAssembler {
    fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Truncation `P Y_{lm} P` of an ordinary harmonic (not Hermitian for `m ≠ 0`).
    fn harmonic(&self, l: i32, m: i32) -> Result<CMatrix> {
        let (l2, m2) = (HalfInteger::integer(l), HalfInteger::integer(m));
        let up = HalfInteger::HALF;
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for (r, a) in self.labels.iter().enumerate() {
            for (c, b) in self.labels.iter().enumerate() {
                if a.m != m2 + b.m || !triangle_allowed(a.j, l2, b.j) {
                    continue;
                }
                let plus = triple_integral(up, a.j, a.m, l2, m2, up, b.j, b.m)?;
                let minus = triple_integral(-up, a.j, a.m, l2, m2, -up, b.j, b.m)?;
                let value = 0.5 * (minus + f64::from(a.sign * b.sign) * plus);
                out[(r, c)] = Complex64::new(value, 0.0);
            }
        }
        Ok(out)
    }

    /// Truncation of `Σ coeff · Y_{lm}`.
    fn expansion(&self, terms: &[(i32, i32, Complex64)]) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for &(l, m, coeff) in terms {
            out += self.harmonic(l, m)? * coeff;
        }
        Ok(out)
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Harmonic expansions of `x, y, z` on the unit sphere.
fn coordinate_expansions() -> [Vec<(i32, i32, Complex64)>; 3] {
    let a = (2.0 * PI / 3.0).sqrt();
    let b = (4.0 * PI / 3.0).sqrt();
    [
        vec![(1, -1, real(a)), (1, 1, real(-a))],
        vec![(1, -1, I * a), (1, 1, I * a)],
        vec![(1, 0, real(b))],
    ]
}

/// Harmonic expansions of `x², y², z²` (constants plus `l = 2` terms).
fn squared_coordinate_expansions() -> [Vec<(i32, i32, Complex64)>; 3] {
    let one = (4.0 * PI).sqrt();
    let p2 = (4.0 * PI / 5.0).sqrt();
    let c22 = (8.0 * PI / 15.0).sqrt();
    // z² = (1 + 2 P₂)/3,  x² - y² = √(8π/15)(Y₂₂ + Y₂,₋₂),  x² + y² = 1 - z².
    let z2 = [(0, 0, one / 3.0), (2, 0, 2.0 * p2 / 3.0)];
    let x2 = vec![
        (0, 0, real(0.5 * (one - z2[0].2))),
        (2, 0, real(-0.5 * z2[1].2)),
        (2, 2, real(0.5 * c22)),
        (2, -2, real(0.5 * c22)),
    ];
    let y2 = vec![
        (0, 0, real(0.5 * (one - z2[0].2))),
        (2, 0, real(-0.5 * z2[1].2)),
        (2, 2, real(-0.5 * c22)),
        (2, -2, real(-0.5 * c22)),
    ];
    [x2, y2, z2.iter().map(|&(l, m, c)| (l, m, real(c))).collect()]
}

pub fn build_sphere(cutoff: f64, convention: CutoffConvention) -> Result<TruncatedTriple> {
    build_sphere_with(cutoff, convention, AlgebraSpan::Full)
}

pub fn build_sphere_with(cutoff: f64, convention: CutoffConvention, span: AlgebraSpan) -> Result<TruncatedTriple> {
    check_cutoff(cutoff)?;
    let max_shell = convention.max_shell(cutoff);
    let asm = SphereAssembler {
        labels: sphere_labels(max_shell),
    };
    let max_l = match span {
        AlgebraSpan::Full => 2 * cutoff.floor() as i32,
        AlgebraSpan::UpTo(l) => l,
        AlgebraSpan::EmbeddingOnly => -1,
    };

    let sqrt2 = real(std::f64::consts::SQRT_2);
    let mut algebra = Vec::new();
    for l in 0..=max_l {
        algebra.push(hermitian(asm.harmonic(l, 0)?, &format!("Y({l},0)"))?);
        for m in 1..=l {
            let a = asm.harmonic(l, m)?;
            let adj = a.adjoint();
            algebra.push(hermitian((&a + &adj) / sqrt2, &format!("ReY({l},{m})"))?);
            algebra.push(hermitian((&a - &adj) / (sqrt2 * I), &format!("ImY({l},{m})"))?);
        }
    }

    let names = ["x", "y", "z"];
    let mut phi = Vec::with_capacity(3);
    for (terms, name) in coordinate_expansions().iter().zip(names) {
        phi.push(hermitian(asm.expansion(terms)?, name)?);
    }
    let mut phi_sq = Vec::with_capacity(3);
    for (terms, name) in squared_coordinate_expansions().iter().zip(names) {
        phi_sq.push(hermitian(asm.expansion(terms)?, &format!("{name}²"))?);
    }

    let triple = TruncatedTriple {
        name: format!("sphere(cutoff={cutoff}, convention={convention:?})"),
        cutoff,
        spectral_bound: f64::from(max_shell),
        dirac_eigenvalues: asm
            .labels
            .iter()
            .map(|s| f64::from(s.sign) * (s.j.value() + 0.5))
            .collect(),
        algebra_basis: algebra,
        phi,
        phi_sq,
        spectral_dim_hint: Some(2),
        manifold: Some(Manifold::Sphere),
        basis_labels: Some(
            asm.labels
                .iter()
                .map(|s| BasisLabel::Sphere {
                    j: s.j,
                    m: s.m,
                    sign: s.sign,
                })
                .collect(),
        ),
    };
    triple.validate()?;
    Ok(triple)
}

/// Replaces each eigenvalue `λ` by `λ + c · sign(λ) · cos(πλ)`.
pub fn build_dc_perturbation(t: &TruncatedTriple, c: f64) -> Result<TruncatedTriple> {
    if t.dirac_eigenvalues.iter().any(|&l| l == 0.0) {
        return Err(Error::InvalidArgument(
            "sign(D) is undefined on a zero eigenvalue".into(),
        ));
    }
    if t.dirac_eigenvalues.iter().any(|&l| l.fract() != 0.0) {
        return Err(Error::InvalidArgument(
            "the perturbation expects an integer Dirac spectrum".into(),
        ));
    }
    if c == 0.0 {
        return Ok(t.clone());
    }
    let mut out = t.clone();
    for lambda in &mut out.dirac_eigenvalues {
        let parity = if (*lambda as i64) % 2 == 0 { 1.0 } else { -1.0 };
        *lambda += c * lambda.signum() * parity;
    }
    out.spectral_bound = t.spectral_bound + c.abs();
    out.name = format!("{} + {c}·sign(D)cos(πD)", t.name);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylEstimate {
    pub dim_estimate: f64,
    pub vol_estimate: f64,
    /// `round(dim_estimate)`, the dimension used in the volume formula.
    pub dim: u32,
}

/// Fits the eigenvalue counting function `N(λ) = #{|λ_i| ≤ λ}` on a log-log
/// scale and inverts Weyl's law for the volume.
pub fn weyl_estimate(dirac_eigenvalues: &[f64], rank_s: u32) -> Result<WeylEstimate> {
    if rank_s == 0 {
        return Err(Error::InvalidArgument("spinor rank must be positive".into()));
    }
    let mut mags: Vec<f64> = dirac_eigenvalues.iter().map(|l| l.abs()).filter(|&l| l > 0.0).collect();
    mags.sort_by(f64::total_cmp);
    mags.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    if mags.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 distinct eigenvalue magnitudes, got {}",
            mags.len()
        )));
    }
    let count = |mu: f64| {
        dirac_eigenvalues
            .iter()
            .filter(|l| l.abs() <= mu + 1e-9 * mu.max(1.0))
            .count() as f64
    };
    let xs: Vec<f64> = mags.iter().map(|m| m.ln()).collect();
    let ys: Vec<f64> = mags.iter().map(|&m| count(m).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let dim = slope.round().max(1.0) as u32;
    let d = f64::from(dim);
    let top = *mags.last().unwrap();
    let vol = count(top) * (4.0 * PI).powf(d / 2.0) * gamma(d / 2.0 + 1.0) / (f64::from(rank_s) * top.powf(d));
    Ok(WeylEstimate {
        dim_estimate: slope,
        vol_estimate: vol,
        dim,
    })
}

/// A point of the model manifold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Point {
    Circle { theta: f64 },
    Sphere { theta: f64, phi: f64 },
}

impl Point {
    /// Image under the standard isometric embedding (unit circle / sphere).
    pub fn embed(&self) -> Vec<f64> {
        match *self {
            Point::Circle { theta } => vec![theta.cos(), theta.sin()],
            Point::Sphere { theta, phi } => vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()],
        }
    }

    /// Nearest point to `x` on the model manifold; `None` when `x` is (numerically) zero.
    pub fn project(manifold: Manifold, x: &[f64]) -> Option<Point> {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return None;
        }
        Some(match manifold {
            Manifold::Circle => Point::Circle {
                theta: x[1].atan2(x[0]),
            },
            Manifold::Sphere => Point::Sphere {
                theta: (x[2] / norm).clamp(-1.0, 1.0).acos(),
                phi: x[1].atan2(x[0]),
            },
        })
    }

    pub fn geodesic(&self, other: &Point) -> f64 {
        let (a, b) = (self.embed(), other.embed());
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        dot.clamp(-1.0, 1.0).acos()
    }
}

/// Values of every Dirac eigenvector at `p`, one entry per spinor component.
pub fn eigenvector_values(t: &TruncatedTriple, p: &Point) -> Result<Vec<Vec<Complex64>>> {
    let labels = t
        .basis_labels
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("triple `{}` carries no eigenbasis labels", t.name)))?;
    labels
        .iter()
        .map(|label| match (label, p) {
            (BasisLabel::Circle { n }, Point::Circle { theta }) => Ok(vec![Complex64::from_polar(
                1.0 / (2.0 * PI).sqrt(),
                f64::from(*n) * theta,
            )]),
            (BasisLabel::Sphere { j, m, sign }, Point::Sphere { theta, phi }) => {
                let half = HalfInteger::HALF;
                let lower = spin_weighted_y(-half, *j, *m, *theta, *phi)?;
                let upper = spin_weighted_y(half, *j, *m, *theta, *phi)?;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Ok(vec![lower * s, -I * f64::from(*sign) * upper * s])
            }
            _ => Err(Error::InvalidArgument(format!(
                "point {p:?} does not belong to the manifold of `{}`",
                t.name
            ))),
        })
        .collect()
}

/// Parameters accepted by every registered geometry.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BuildParams {
    pub cutoff: f64,
    pub convention: CutoffConvention,
    /// Coupling of the `sign(D)cos(πD)` perturbation (ignored by unperturbed geometries).
    pub coupling: f64,
}

pub trait GeometryBuilder: Named + Send + Sync {
    fn build(&self, params: &BuildParams) -> Result<TruncatedTriple>;
}

pub struct CircleGeometry;
pub struct SphereGeometry;
pub struct PerturbedSphereGeometry;

impl Named for CircleGeometry {
    fn name(&self) -> &'static str {
        "circle"
    }
    fn describe(&self) -> &'static str {
        "unit circle, D e_n = n e_n"
    }
}

impl GeometryBuilder for CircleGeometry {
    fn build(&self, params: &BuildParams) -> Result<TruncatedTriple> {
        build_circle(params.cutoff)
    }
}

impl Named for SphereGeometry {
    fn name(&self) -> &'static str {
        "sphere"
    }
    fn describe(&self) -> &'static str {
        "round unit sphere with its spin Dirac operator"
    }
}

impl GeometryBuilder for SphereGeometry {
    fn build(&self, params: &BuildParams) -> Result<TruncatedTriple> {
        build_sphere(params.cutoff, params.convention)
    }
}

impl Named for PerturbedSphereGeometry {
    fn name(&self) -> &'static str {
        "sphere-dc"
    }
    fn describe(&self) -> &'static str {
        "sphere with D replaced by D + c sign(D) cos(πD)"
    }
}

impl GeometryBuilder for PerturbedSphereGeometry {
    fn build(&self, params: &BuildParams) -> Result<TruncatedTriple> {
        build_dc_perturbation(&build_sphere(params.cutoff, params.convention)?, params.coupling)
    }
}

pub fn geometry_registry() -> Registry<dyn GeometryBuilder> {
    let mut r: Registry<dyn GeometryBuilder> = Registry::new("geometry");
    r.register(Arc::new(CircleGeometry))
        .register(Arc::new(SphereGeometry))
        .register(Arc::new(PerturbedSphereGeometry));
    r
}
