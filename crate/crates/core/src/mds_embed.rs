//! Weighted stress majorization (SMACOF) of a distance matrix into `ℝⁿ`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::{Named, Registry};
use crate::triple_model::DistanceMatrix;

/// Relative eigenvalue threshold for the Laplacian pseudo-inverse.
const PINV_THRESHOLD: f64 = 1e-10;
/// Slack for the in-loop monotonicity check, relative to the stress.
const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct StressProblem {
    distances: DMatrix<f64>,
    weights: DMatrix<f64>,
    target_dim: usize,
}

impl StressProblem {
    pub fn new(distances: &DistanceMatrix, weights: DMatrix<f64>, target_dim: usize) -> Result<Self> {
        let k = distances.size();
        if weights.nrows() != k || weights.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: weights.nrows(),
            });
        }
        if target_dim == 0 {
            return Err(Error::InvalidArgument("target dimension must be positive".into()));
        }
        let mut total = 0.0;
        for i in 0..k {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!("weight diagonal entry {i} is nonzero")));
            }
            for j in 0..k {
                let w = weights[(i, j)];
                if !(w.is_finite() && w >= 0.0) || w != weights[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "weights must be finite, nonnegative and symmetric; entry ({i},{j}) = {w}"
                    )));
                }
                total += w;
            }
        }
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("all weights are zero".into()));
        }
        let d = DMatrix::from_fn(k, k, |i, j| distances.get(i, j));
        if d.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "distances must be finite and nonnegative".into(),
            ));
        }
        Ok(StressProblem {
            distances: d,
            weights,
            target_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.distances.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    /// `Σ_{i<j} w_ij (d_ij − ‖x_i − x_j‖)² / Σ_{i<j} w_ij`.
    pub fn stress(&self, coords: &DMatrix<f64>) -> f64 {
        let k = self.len();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..k {
            for j in i + 1..k {
                let w = self.weights[(i, j)];
                let r = self.distances[(i, j)] - (coords.row(i) - coords.row(j)).norm();
                num += w * r * r;
                den += w;
            }
        }
        num / den
    }

    /// Weighted Laplacian `V`.
    fn laplacian(&self) -> DMatrix<f64> {
        let mut v = -&self.weights;
        for i in 0..self.len() {
            v[(i, i)] = self.weights.row(i).sum();
        }
        v
    }

    /// Connected components of the graph with edges where `w > 0`.
    fn components(&self) -> Vec<Vec<usize>> {
        let k = self.len();
        let mut label = vec![usize::MAX; k];
        let mut blocks = Vec::new();
        for start in 0..k {
            if label[start] != usize::MAX {
                continue;
            }
            let id = blocks.len();
            let mut block = vec![start];
            label[start] = id;
            let mut next = 0;
            while next < block.len() {
                let i = block[next];
                next += 1;
                for j in 0..k {
                    if label[j] == usize::MAX && self.weights[(i, j)] > 0.0 {
                        label[j] = id;
                        block.push(j);
                    }
                }
            }
            block.sort_unstable();
            blocks.push(block);
        }
        blocks
    }

    fn guttman_b(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let k = self.len();
        let mut b = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i + 1..k {
                let dist = (x.row(i) - x.row(j)).norm();
                if dist > 0.0 {
                    let v = -self.weights[(i, j)] * self.distances[(i, j)] / dist;
                    b[(i, j)] = v;
                    b[(j, i)] = v;
                }
            }
        }
        for i in 0..k {
            b[(i, i)] = -b.row(i).sum();
        }
        b
    }
}

pub trait WeightScheme: Named + Send + Sync {
    fn weights(&self, distances: &DistanceMatrix) -> Result<DMatrix<f64>>;
}

/// `w_ij = exp(−√k d_ij)`.
pub struct LocalityWeights;
/// `w_ij = 1`.
pub struct UniformWeights;

impl Named for LocalityWeights {
    fn name(&self) -> &'static str {
        "locality"
    }
    fn describe(&self) -> &'static str {
        "exp(-sqrt(k) d), emphasizing short distances"
    }
}

impl WeightScheme for LocalityWeights {
    fn weights(&self, distances: &DistanceMatrix) -> Result<DMatrix<f64>> {
        locality_weights(distances, distances.size())
    }
}

impl Named for UniformWeights {
    fn name(&self) -> &'static str {
        "uniform"
    }
    fn describe(&self) -> &'static str {
        "all pairs weighted equally"
    }
}

impl WeightScheme for UniformWeights {
    fn weights(&self, distances: &DistanceMatrix) -> Result<DMatrix<f64>> {
        check_nonnegative(distances)?;
        let k = distances.size();
        Ok(DMatrix::from_fn(k, k, |i, j| if i == j { 0.0 } else { 1.0 }))
    }
}

pub fn weight_registry() -> Registry<dyn WeightScheme> {
    let mut r: Registry<dyn WeightScheme> = Registry::new("weight scheme");
    r.register(Arc::new(LocalityWeights)).register(Arc::new(UniformWeights));
    r
}

fn check_nonnegative(distances: &DistanceMatrix) -> Result<()> {
    for (i, j) in distances.pairs() {
        let d = distances.get(i, j);
        if !(d >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative distance {d} at ({i},{j})")));
        }
    }
    Ok(())
}

pub fn locality_weights(distances: &DistanceMatrix, k: usize) -> Result<DMatrix<f64>> {
    check_nonnegative(distances)?;
    let n = distances.size();
    let scale = (k as f64).sqrt();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (-scale * distances.get(i, j)).exp()
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmacofOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Start from seeded random coordinates instead of classical scaling.
    pub random_start: bool,
}

impl Default for SmacofOptions {
    fn default() -> Self {
        SmacofOptions {
            tol: 1e-9,
            max_iter: 10_000,
            seed: 0,
            random_start: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub coords: Vec<Vec<f64>>,
    pub stress: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stress before the first and after every Guttman step.
    pub stress_trace: Vec<f64>,
}

impl EmbeddingResult {
    pub fn centroid(&self) -> Vec<f64> {
        let n = self.coords.first().map_or(0, Vec::len);
        let k = self.coords.len() as f64;
        (0..n)
            .map(|a| self.coords.iter().map(|x| x[a]).sum::<f64>() / k)
            .collect()
    }

    /// Distances of the points from their centroid.
    pub fn radii(&self) -> Vec<f64> {
        let c = self.centroid();
        self.coords
            .iter()
            .map(|x| x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        for x in &self.coords {
            let row: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

fn to_rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn random_coords(k: usize, n: usize, scale: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(k, n, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z * scale
    })
}

/// Classical scaling from the double-centered squared distances, or `None`
/// when fewer than `n` eigenvalues are positive.
pub fn classical_scaling(distances: &DMatrix<f64>, n: usize) -> Option<DMatrix<f64>> {
    let k = distances.nrows();
    let d2 = distances.map(|d| d * d);
    let row_means: Vec<f64> = (0..k).map(|i| d2.row(i).mean()).collect();
    let all_mean = d2.mean();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        -0.5 * (d2[(i, j)] - row_means[i] - row_means[j] + all_mean)
    });
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    if order.len() < n
        || order[..n]
            .iter()
            .any(|&i| eig.eigenvalues[i] <= 1e-12 * top || top == 0.0)
    {
        return None;
    }
    Some(DMatrix::from_fn(k, n, |i, a| {
        let idx = order[a];
        eig.eigenvectors[(i, idx)] * eig.eigenvalues[idx].sqrt()
    }))
}

fn pseudo_inverse(v: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(v.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let inv = eig
        .eigenvalues
        .map(|l| if l.abs() > PINV_THRESHOLD * top { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

pub fn smacof(p: &StressProblem, init: Option<&[Vec<f64>]>, opts: &SmacofOptions) -> Result<EmbeddingResult> {
    let k = p.len();
    let n = p.target_dim;
    let blocks = p.components();
    if blocks.len() > 1 {
        return Err(Error::Disconnected { blocks });
    }
    let mut x = match init {
        Some(rows) => {
            if rows.len() != k || rows.iter().any(|r| r.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: k * n,
                    found: rows.iter().map(Vec::len).sum(),
                });
            }
            DMatrix::from_fn(k, n, |i, a| rows[i][a])
        }
        None => {
            let scale = p.distances.mean().max(f64::MIN_POSITIVE);
            let classical = (!opts.random_start)
                .then(|| classical_scaling(&p.distances, n))
                .flatten();
            classical.unwrap_or_else(|| random_coords(k, n, scale, opts.seed))
        }
    };
    let v_pinv = pseudo_inverse(&p.laplacian());

    // stress values below this are rounding noise
    let floor = f64::EPSILON * p.distances.max().powi(2);
    let mut stress = p.stress(&x);
    let mut trace = vec![stress];
    let mut converged = stress <= floor;
    let mut iterations = 0;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let next = &v_pinv * (p.guttman_b(&x) * &x);
        let next_stress = p.stress(&next);
        if next_stress > stress * (1.0 + MONOTONE_SLACK) + floor {
            return Err(Error::StressIncreased {
                iteration: iterations,
                before: stress,
                after: next_stress,
            });
        }
        let decrease = stress - next_stress;
        x = next;
        trace.push(next_stress);
        converged = next_stress <= floor || decrease <= opts.tol * stress;
        stress = next_stress.min(stress);
    }
    Ok(EmbeddingResult {
        coords: to_rows(&x),
        stress: trace.last().copied().unwrap_or(stress),
        iterations,
        converged,
        stress_trace: trace,
    })
}

/// Relative amount `(l − 2 sin(l/2)) / l` by which a chord falls short of the arc.
pub fn sphere_chord_defect(l: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&l) {
        return Err(Error::InvalidArgument(format!("arc length {l} outside [0, π]")));
    }
    if l < 1e-4 {
        // series of 1 − sinc(l/2) avoids cancellation
        return Ok(l * l / 24.0 - l.powi(4) / 1920.0);
    }
    Ok((l - 2.0 * (l / 2.0).sin()) / l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chord_defect_endpoints() {
        assert_eq!(sphere_chord_defect(0.0).unwrap(), 0.0);
        let pi = std::f64::consts::PI;
        assert!((sphere_chord_defect(pi).unwrap() - (pi - 2.0) / pi).abs() < 1e-15);
        assert!(sphere_chord_defect(-0.1).is_err());
        assert!(sphere_chord_defect(3.2).is_err());
        let near = 1e-4 * (1.0 + 1e-9);
        let a = sphere_chord_defect(near).unwrap();
        let b = sphere_chord_defect(1e-4 * (1.0 - 1e-9)).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn disconnected_support_names_blocks() {
        let d = DistanceMatrix::from_dense(&[
            vec![0.0, 1.0, 2.0, 2.0],
            vec![1.0, 0.0, 2.0, 2.0],
            vec![2.0, 2.0, 0.0, 1.0],
            vec![2.0, 2.0, 1.0, 0.0],
        ])
        .unwrap();
        let w = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0,
            ],
        );
        let p = StressProblem::new(&d, w, 2).unwrap();
        match smacof(&p, None, &SmacofOptions::default()) {
            Err(Error::Disconnected { blocks }) => assert_eq!(blocks, vec![vec![0, 1], vec![2, 3]]),
            other => panic!("expected a disconnected error, got {other:?}"),
        }
    }
}
