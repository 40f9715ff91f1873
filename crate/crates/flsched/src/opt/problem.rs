//! The regularized ERM problem, its dual, and the per-UE subproblem value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opt::loss::LossKind;

/// Dense column-major matrix: columns are data points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for (i, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::InvalidParameter(format!(
                    "column {i} has {} rows, expected {rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Ok(Matrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// X·a (cols-weighted sum of columns).
    pub fn matvec(&self, a: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &w) in a.iter().enumerate() {
            if w != 0.0 {
                for (o, &x) in out.iter_mut().zip(self.col(j)) {
                    *o += w * x;
                }
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L2 regularizer ξ·r(w) with r(w) = (ζ/2)‖w‖².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularizer {
    /// Strong convexity ζ > 0.
    pub zeta: f64,
    /// Weight ξ > 0 multiplying r in the objective.
    pub xi: f64,
}

impl Regularizer {
    pub fn r(&self, w: &[f64]) -> f64 {
        0.5 * self.zeta * dot(w, w)
    }

    /// r*(v) = ‖v‖²/(2ζ).
    pub fn conjugate(&self, v: &[f64]) -> f64 {
        dot(v, v) / (2.0 * self.zeta)
    }

    /// ∇r*(v) = v/ζ.
    pub fn grad_conjugate(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| x / self.zeta).collect()
    }
}

/// An ERM instance partitioned across K UEs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Problem {
    /// d×n feature matrix; column i is data point x_i.
    pub x: Matrix,
    /// Targets, length n.
    pub y: Vec<f64>,
    pub loss: LossKind,
    pub reg: Regularizer,
    /// Disjoint index sets covering {0..n−1}; entry k is UE k's shard.
    pub partition: Vec<Vec<usize>>,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        if self.x.cols != self.y.len() {
            return Err(Error::InvalidParameter("X/y size mismatch".into()));
        }
        if !(self.reg.zeta > 0.0 && self.reg.xi > 0.0) {
            return Err(Error::InvalidParameter("need ζ > 0 and ξ > 0".into()));
        }
        let mut seen = vec![false; self.x.cols];
        for cell in &self.partition {
            for &i in cell {
                if i >= self.x.cols || seen[i] {
                    return Err(Error::InvalidParameter(
                        "partition must be disjoint and in range".into(),
                    ));
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidParameter("partition must cover all points".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.cols
    }

    pub fn dim(&self) -> usize {
        self.x.rows
    }

    pub fn k_users(&self) -> usize {
        self.partition.len()
    }

    /// Difficulty constant of the local quadratic penalty: κ = K/ζ.
    pub fn kappa(&self) -> f64 {
        self.k_users() as f64 / self.reg.zeta
    }

    /// P(w) = (1/n)Σℓ(x_iᵀw, y_i) + ξ·r(w).
    pub fn primal_objective(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim() {
            return Err(Error::InvalidParameter("w dimension mismatch".into()));
        }
        let n = self.n() as f64;
        let mut risk = 0.0;
        for i in 0..self.n() {
            risk += self.loss.evaluate(dot(self.x.col(i), w), self.y[i]);
        }
        Ok(risk / n + self.reg.xi * self.reg.r(w))
    }

    /// v(a) = X·a/(ξn).
    pub fn v_of(&self, a: &[f64]) -> Vec<f64> {
        let scale = 1.0 / (self.reg.xi * self.n() as f64);
        self.x.matvec(a).into_iter().map(|x| x * scale).collect()
    }

    /// D(a) = −(1/n)Σℓ*(−a_i) − ξ·r*(Xa/(ξn)).
    pub fn dual_objective(&self, a: &[f64]) -> Result<f64> {
        let v = self.v_of(a);
        self.dual_objective_with_v(a, &v)
    }

    /// D evaluated with an externally tracked v (lossy-channel bookkeeping).
    pub fn dual_objective_with_v(&self, a: &[f64], v: &[f64]) -> Result<f64> {
        if a.len() != self.n() {
            return Err(Error::InvalidParameter("a dimension mismatch".into()));
        }
        let n = self.n() as f64;
        let mut conj = 0.0;
        for i in 0..self.n() {
            conj += self.loss.conjugate_neg(a[i], self.y[i])?;
        }
        Ok(-conj / n - self.reg.xi * self.reg.conjugate(v))
    }

    /// w(v) = ∇r*(v).
    pub fn primal_from_dual(&self, v: &[f64]) -> Vec<f64> {
        self.reg.grad_conjugate(v)
    }

    /// P(w(a)) − D(a); non-negative by weak duality.
    pub fn duality_gap(&self, a: &[f64]) -> Result<f64> {
        let v = self.v_of(a);
        let w = self.primal_from_dual(&v);
        Ok(self.primal_objective(&w)? - self.dual_objective_with_v(a, &v)?)
    }

    /// R_k term of the local subproblem: (1/n)Σ_{i∈D_k}ℓ*(−a_i).
    pub fn local_risk(&self, k: usize, a: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for &i in &self.partition[k] {
            s += self.loss.conjugate_neg(a[i], self.y[i])?;
        }
        Ok(s / self.n() as f64)
    }

    /// ΔD_k(Δa_k; v, a_k): the value UE k's subproblem assigns to a candidate
    /// block update supported on D_k.
    pub fn local_subproblem_value(
        &self,
        k: usize,
        delta: &[f64],
        v: &[f64],
        a: &[f64],
    ) -> Result<f64> {
        let cell = &self.partition[k];
        if delta.len() != cell.len() {
            return Err(Error::InvalidParameter(
                "delta must match the UE's shard size".into(),
            ));
        }
        let n = self.n() as f64;
        let wbar = self.reg.grad_conjugate(v);
        let mut shifted = 0.0; // R_k(a_k + Δa)
        let mut linear = 0.0; // ⟨(1/n)X_kᵀ∇r*(v), Δa⟩
        let mut xdelta = vec![0.0; self.dim()];
        for (&i, &d) in cell.iter().zip(delta) {
            shifted += self.loss.conjugate_neg(a[i] + d, self.y[i])?;
            let col = self.x.col(i);
            linear += d * dot(col, &wbar) / n;
            for (acc, &x) in xdelta.iter_mut().zip(col) {
                *acc += d * x;
            }
        }
        let quad = (self.kappa() / self.reg.xi) / (2.0 * n * n) * dot(&xdelta, &xdelta);
        Ok(-shifted / n - self.reg.xi / self.k_users() as f64 * self.reg.conjugate(v)
            - linear
            - quad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    pub(crate) fn small_problem(loss: LossKind, n: usize, d: usize, k: usize, seed: u64) -> Problem {
        let mut rng = crate::rng::substream(seed, 0);
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| match loss {
                LossKind::LeastSquares => rng.gen_range(-1.0..1.0),
                _ => {
                    if rng.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
            })
            .collect();
        let partition: Vec<Vec<usize>> = (0..k).map(|j| (j * n / k..(j + 1) * n / k).collect()).collect();
        let p = Problem {
            x: Matrix::from_columns(d, &cols).unwrap(),
            y,
            loss,
            reg: Regularizer { zeta: 1.0, xi: 0.1 },
            partition,
        };
        p.validate().unwrap();
        p
    }

    #[test]
    fn primal_baseline_values() {
        let p = small_problem(LossKind::Logistic, 20, 3, 4, 1);
        let w = vec![0.0; 3];
        assert_relative_eq!(p.primal_objective(&w).unwrap(), 2f64.ln(), max_relative = 1e-12);
        let p2 = small_problem(LossKind::SquaredSmoothHinge, 20, 3, 4, 1);
        assert_relative_eq!(p2.primal_objective(&w).unwrap(), 0.5, max_relative = 1e-12);

        // Single point exact fit with ξ→0 equivalent: use tiny ξ and w = y/x.
        let p3 = Problem {
            x: Matrix::from_columns(1, &[vec![1.0]]).unwrap(),
            y: vec![1.0],
            loss: LossKind::LeastSquares,
            reg: Regularizer { zeta: 1.0, xi: 1e-300 },
            partition: vec![vec![0]],
        };
        assert!(p3.primal_objective(&[1.0]).unwrap() < 1e-200);
    }

    #[test]
    fn dual_baseline_and_gap_at_zero() {
        let p = small_problem(LossKind::Logistic, 20, 3, 4, 2);
        let a = vec![0.0; 20];
        assert_relative_eq!(p.dual_objective(&a).unwrap(), 0.0);
        assert_relative_eq!(p.duality_gap(&a).unwrap(), 2f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn primal_from_dual_maps() {
        let p = small_problem(LossKind::LeastSquares, 10, 2, 2, 3);
        assert_eq!(p.primal_from_dual(&[0.0, 0.0]), vec![0.0, 0.0]);
        // ζ=1 ⇒ identity map.
        assert_eq!(p.primal_from_dual(&[1.5, -2.0]), vec![1.5, -2.0]);
    }

    #[test]
    fn subproblem_at_zero_sums_to_dual() {
        // Σ_k ΔD_k(0) = D(a).
        for loss in [LossKind::LeastSquares, LossKind::Logistic, LossKind::SquaredSmoothHinge] {
            let p = small_problem(loss, 24, 3, 4, 4);
            let mut rng = crate::rng::substream(4, 1);
            let a: Vec<f64> = p
                .y
                .iter()
                .map(|&y| p.loss.clamp_dual(rng.gen_range(-0.5..0.5), y))
                .collect();
            let v = p.v_of(&a);
            let total: f64 = (0..4)
                .map(|k| {
                    let zeros = vec![0.0; p.partition[k].len()];
                    p.local_subproblem_value(k, &zeros, &v, &a).unwrap()
                })
                .sum();
            assert_relative_eq!(total, p.dual_objective(&a).unwrap(), max_relative = 1e-10);
        }
    }

    #[test]
    fn subproblem_is_concave_along_segments() {
        let p = small_problem(LossKind::LeastSquares, 24, 3, 4, 5);
        let a = vec![0.1; 24];
        let v = p.v_of(&a);
        let k = 1;
        let delta: Vec<f64> = (0..p.partition[k].len()).map(|i| 0.2 * (i as f64 - 2.0)).collect();
        let f1 = p.local_subproblem_value(k, &delta, &v, &a).unwrap();
        let zeros = vec![0.0; delta.len()];
        let f0 = p.local_subproblem_value(k, &zeros, &v, &a).unwrap();
        for s in [0.25, 0.5, 0.75] {
            let mid: Vec<f64> = delta.iter().map(|d| d * s).collect();
            let fm = p.local_subproblem_value(k, &mid, &v, &a).unwrap();
            assert!(fm >= s * f1 + (1.0 - s) * f0 - 1e-12, "concavity probe failed at s={s}");
        }
    }

    #[test]
    fn weak_duality_on_random_feasible_points() {
        let p = small_problem(LossKind::Logistic, 30, 4, 5, 6);
        let mut rng = crate::rng::substream(6, 1);
        for _ in 0..50 {
            let a: Vec<f64> = p
                .y
                .iter()
                .map(|&y| p.loss.clamp_dual(rng.gen_range(-1.0..2.0), y))
                .collect();
            assert!(p.duality_gap(&a).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn validation_catches_bad_partitions() {
        let mut p = small_problem(LossKind::LeastSquares, 10, 2, 2, 7);
        p.partition[0].push(3); // duplicate
        assert!(p.validate().is_err());
    }
}
