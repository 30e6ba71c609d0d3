//! Data model for truncated spectral triples, vector states and metric graphs,
//! together with their JSON/CSV file formats.
//!
//! The eigenbasis of the Dirac operator is the canonical basis of the
//! truncated Hilbert space, so `D_Λ` is stored as its diagonal only.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, quadratic_form, CMatrix, CVector};
use crate::wigner::HalfInteger;

pub const FORMAT_VERSION: u32 = 1;

/// Absolute Hermiticity tolerance, scaled by the largest entry when above 1.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Unit-norm tolerance for [`VectorState`].
pub const NORM_TOL: f64 = 1e-10;

type RawMatrix = Vec<Vec<[f64; 2]>>;
type RawVector = Vec<[f64; 2]>;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates squareness and Hermiticity; entries are kept bit-for-bit.
    pub fn new(m: CMatrix, what: &str) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Inconsistent(format!(
                "{what} is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        let (defect, row, col) = hermiticity_defect(&m);
        if defect > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian {
                what: what.to_owned(),
                row,
                col,
                defect,
            });
        }
        Ok(HermitianMatrix(m))
    }

    /// Builds from an arbitrary square matrix by taking `(A + A^*)/2`.
    pub fn symmetrized(m: &CMatrix) -> Self {
        HermitianMatrix((m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    fn to_raw(&self) -> RawMatrix {
        (0..self.dim())
            .map(|r| {
                (0..self.dim())
                    .map(|c| [self.0[(r, c)].re, self.0[(r, c)].im])
                    .collect()
            })
            .collect()
    }

    fn from_raw(raw: &RawMatrix, what: &str) -> Result<Self> {
        let dim = raw.len();
        if let Some(bad) = raw.iter().find(|row| row.len() != dim) {
            return Err(Error::Inconsistent(format!(
                "{what}: ragged row of length {} in a {dim}-row matrix",
                bad.len()
            )));
        }
        let m = CMatrix::from_fn(dim, dim, |r, c| Complex64::new(raw[r][c][0], raw[r][c][1]));
        Self::new(m, what)
    }
}

/// Geometry a triple was built from, needed to evaluate eigenvectors as
/// functions and to project barycenters back onto the model manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Manifold {
    Circle,
    Sphere,
}

/// Quantum numbers of a Dirac eigenvector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BasisLabel {
    /// `e_n(θ) = e^{inθ}/√(2π)`.
    Circle { n: i32 },
    /// Spinor doublet with total angular momentum `j`, projection `m` and
    /// eigenvalue sign `sign`.
    Sphere { j: HalfInteger, m: HalfInteger, sign: i8 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedTriple {
    pub name: String,
    pub cutoff: f64,
    /// Largest admissible `|λ|` under the cutoff convention the triple was built with.
    pub spectral_bound: f64,
    pub dirac_eigenvalues: Vec<f64>,
    pub algebra_basis: Vec<HermitianMatrix>,
    pub phi: Vec<HermitianMatrix>,
    pub phi_sq: Vec<HermitianMatrix>,
    pub spectral_dim_hint: Option<u32>,
    pub manifold: Option<Manifold>,
    pub basis_labels: Option<Vec<BasisLabel>>,
}

impl TruncatedTriple {
    pub fn dim(&self) -> usize {
        self.dirac_eigenvalues.len()
    }

    pub fn embedding_dim(&self) -> usize {
        self.phi.len()
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::Inconsistent("empty Dirac spectrum".into()));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::Inconsistent(format!("cutoff {} is not positive", self.cutoff)));
        }
        if let Some(lambda) = self
            .dirac_eigenvalues
            .iter()
            .find(|l| !l.is_finite() || l.abs() > self.spectral_bound + 1e-12)
        {
            return Err(Error::Inconsistent(format!(
                "eigenvalue {lambda} exceeds the spectral bound {}",
                self.spectral_bound
            )));
        }
        if self.phi.len() != self.phi_sq.len() {
            return Err(Error::Inconsistent(format!(
                "phi has {} components but phi_sq has {}",
                self.phi.len(),
                self.phi_sq.len()
            )));
        }
        for m in self.algebra_basis.iter().chain(&self.phi).chain(&self.phi_sq) {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
        }
        if let Some(labels) = &self.basis_labels {
            if labels.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: labels.len(),
                });
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = TripleFile::from(self);
        let text = serde_json::to_string(&file)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TripleFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TripleFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TripleFile {
    format_version: u32,
    name: String,
    cutoff: f64,
    dirac_eigenvalues: Vec<f64>,
    algebra_basis: Vec<RawMatrix>,
    phi: Vec<RawMatrix>,
    phi_sq: Vec<RawMatrix>,
    embedding_dim: usize,
    spectral_dim_hint: Option<u32>,
    #[serde(default)]
    spectral_bound: Option<f64>,
    #[serde(default)]
    manifold: Option<Manifold>,
    #[serde(default)]
    basis_labels: Option<Vec<BasisLabel>>,
}

impl From<&TruncatedTriple> for TripleFile {
    fn from(t: &TruncatedTriple) -> Self {
        let raw = |ms: &[HermitianMatrix]| ms.iter().map(HermitianMatrix::to_raw).collect();
        TripleFile {
            format_version: FORMAT_VERSION,
            name: t.name.clone(),
            cutoff: t.cutoff,
            dirac_eigenvalues: t.dirac_eigenvalues.clone(),
            algebra_basis: raw(&t.algebra_basis),
            phi: raw(&t.phi),
            phi_sq: raw(&t.phi_sq),
            embedding_dim: t.embedding_dim(),
            spectral_dim_hint: t.spectral_dim_hint,
            spectral_bound: Some(t.spectral_bound),
            manifold: t.manifold,
            basis_labels: t.basis_labels.clone(),
        }
    }
}

impl TryFrom<TripleFile> for TruncatedTriple {
    type Error = Error;

    fn try_from(f: TripleFile) -> Result<Self> {
        if f.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion(f.format_version));
        }
        let cook = |ms: &[RawMatrix], what: &str| -> Result<Vec<HermitianMatrix>> {
            ms.iter()
                .enumerate()
                .map(|(i, m)| HermitianMatrix::from_raw(m, &format!("{what}[{i}]")))
                .collect()
        };
        let triple = TruncatedTriple {
            name: f.name,
            cutoff: f.cutoff,
            spectral_bound: f.spectral_bound.unwrap_or(f.cutoff),
            dirac_eigenvalues: f.dirac_eigenvalues,
            algebra_basis: cook(&f.algebra_basis, "algebra_basis")?,
            phi: cook(&f.phi, "phi")?,
            phi_sq: cook(&f.phi_sq, "phi_sq")?,
            spectral_dim_hint: f.spectral_dim_hint,
            manifold: f.manifold,
            basis_labels: f.basis_labels,
        };
        if f.embedding_dim != triple.phi.len() {
            return Err(Error::Inconsistent(format!(
                "embedding_dim {} disagrees with {} phi components",
                f.embedding_dim,
                triple.phi.len()
            )));
        }
        triple.validate()?;
        Ok(triple)
    }
}

/// A unit vector of the truncated Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorState {
    coefficients: CVector,
}

impl VectorState {
    /// Normalizes `coefficients`; fails on the zero vector.
    pub fn new(mut coefficients: CVector) -> Result<Self> {
        let norm = coefficients.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cannot normalize a vector of norm {norm}"
            )));
        }
        coefficients /= Complex64::new(norm, 0.0);
        Ok(VectorState { coefficients })
    }

    /// Wraps an already normalized vector, checking the norm.
    pub fn from_normalized(coefficients: CVector) -> Result<Self> {
        let norm = coefficients.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Inconsistent(format!("state has norm {norm}, expected 1")));
        }
        Ok(VectorState { coefficients })
    }

    /// The `index`-th canonical basis vector.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut coefficients = CVector::zeros(dim);
        coefficients[index] = Complex64::new(1.0, 0.0);
        VectorState { coefficients }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &CVector {
        &self.coefficients
    }

    pub fn with_phase(&self, alpha: f64) -> Self {
        VectorState {
            coefficients: &self.coefficients * Complex64::from_polar(1.0, alpha),
        }
    }

    fn to_raw(&self) -> RawVector {
        self.coefficients.iter().map(|z| [z.re, z.im]).collect()
    }

    fn from_raw(raw: &RawVector) -> Result<Self> {
        Self::from_normalized(CVector::from_iterator(
            raw.len(),
            raw.iter().map(|p| Complex64::new(p[0], p[1])),
        ))
    }
}

impl Serialize for VectorState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawVector::deserialize(d)?;
        VectorState::from_raw(&raw).map_err(serde::de::Error::custom)
    }
}

/// `<v, a v>` for a unit vector `v`.
pub fn state_expectation(t: &TruncatedTriple, v: &VectorState, a: &HermitianMatrix) -> Result<f64> {
    if v.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: v.dim(),
        });
    }
    if a.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: a.dim(),
        });
    }
    Ok(quadratic_form(a.matrix(), v.coefficients()))
}

/// Symmetric matrix with zero diagonal, stored as its strict upper triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    size: usize,
    upper: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(size: usize) -> Self {
        DistanceMatrix {
            size,
            upper: vec![0.0; size * size.saturating_sub(1) / 2],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.size);
        i * (2 * self.size - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.upper[self.offset(i, j)],
            std::cmp::Ordering::Greater => self.upper[self.offset(j, i)],
        }
    }

    /// Sets `d(i, j) = d(j, i)`; the diagonal is fixed at zero.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "the diagonal of a distance matrix is fixed at zero");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let k = self.offset(a, b);
        self.upper[k] = value;
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size).flat_map(move |i| (i + 1..self.size).map(move |j| (i, j)))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        let mut out = DistanceMatrix::zeros(size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: row.len(),
                });
            }
            if row[i] != 0.0 {
                return Err(Error::Inconsistent(format!("nonzero diagonal entry at {i}")));
            }
        }
        for (i, j) in out.pairs().collect::<Vec<_>>() {
            if rows[i][j] != rows[j][i] {
                return Err(Error::Inconsistent(format!("asymmetric entry at ({i}, {j})")));
            }
            if rows[i][j] < 0.0 {
                return Err(Error::Inconsistent(format!("negative distance at ({i}, {j})")));
            }
            out.set(i, j, rows[i][j]);
        }
        Ok(out)
    }

    /// Largest violation `d(i,k) - d(i,j) - d(j,k)` over all triples.
    pub fn max_triangle_violation(&self) -> f64 {
        let n = self.size;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && j != k && i != k {
                        worst = worst.max(self.get(i, k) - self.get(i, j) - self.get(j, k));
                    }
                }
            }
        }
        worst
    }

    /// Row-major CSV with a header row of state indices.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.size).map(|i| i.to_string()).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|j| format!("{:?}", self.get(i, j))).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Localized states with their barycenters, dispersions and pairwise distances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricGraph {
    pub format_version: u32,
    pub states: Vec<VectorState>,
    pub barycenter_coords: Vec<Vec<f64>>,
    pub dispersions: Vec<f64>,
    pub distances: DistanceMatrix,
    /// Configuration and provenance of the run that produced the graph.
    #[serde(default)]
    pub metadata: serde_json::Value,
}

impl MetricGraph {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.states.len();
        for (what, n) in [
            ("barycenter_coords", self.barycenter_coords.len()),
            ("dispersions", self.dispersions.len()),
            ("distances", self.distances.size()),
        ] {
            if n != k {
                return Err(Error::Inconsistent(format!("{what} has {n} entries for {k} states")));
            }
        }
        if self.dispersions.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::Inconsistent("negative dispersion".into()));
        }
        if self.distances.upper.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::Inconsistent("negative or NaN distance".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let graph: MetricGraph = serde_json::from_str(&text)?;
        if graph.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion(graph.format_version));
        }
        graph.validate()?;
        Ok(graph)
    }
}
