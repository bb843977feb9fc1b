//! Tridiagonal operators on the interior nodes and their solvers.

use crate::error::{check_len, Error, Result};
use crate::grid::SpaceTimeGrid;

/// `n x n` tridiagonal matrix stored by diagonals.
///
/// Row `k` reads `sub[k-1] x[k-1] + diag[k] x[k] + sup[k] x[k+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::DegenerateGrid("empty tridiagonal matrix".into()));
        }
        check_len(n - 1, sub.len())?;
        check_len(n - 1, sup.len())?;
        Ok(Self { sub, diag, sup })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![1.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    /// First row violating `|diag_k| > |sub_{k-1}| + |sup_k|`, if any.
    pub fn dominance_violation(&self) -> Option<usize> {
        let n = self.n();
        (0..n).find(|&k| {
            let left = if k > 0 { self.sub[k - 1].abs() } else { 0.0 };
            let right = if k + 1 < n { self.sup[k].abs() } else { 0.0 };
            // NaN entries fail as well
            !(self.diag[k].abs() > left + right)
        })
    }

    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        self.dominance_violation().is_none()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len(n, x.len())?;
        Ok((0..n)
            .map(|k| {
                let mut acc = self.diag[k] * x[k];
                if k > 0 {
                    acc += self.sub[k - 1] * x[k - 1];
                }
                if k + 1 < n {
                    acc += self.sup[k] * x[k + 1];
                }
                acc
            })
            .collect())
    }

    /// Entrywise `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &TridiagonalMatrix, beta: f64) -> Result<Self> {
        check_len(self.n(), other.n())?;
        let mix =
            |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect();
        Ok(Self {
            sub: mix(&self.sub, &other.sub),
            diag: mix(&self.diag, &other.diag),
            sup: mix(&self.sup, &other.sup),
        })
    }

    /// Adds `shift[k]` to the diagonal.
    pub fn add_diagonal(&mut self, shift: &[f64]) -> Result<()> {
        check_len(self.n(), shift.len())?;
        self.diag.iter_mut().zip(shift).for_each(|(d, s)| *d += s);
        Ok(())
    }

    pub fn inf_norm(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|k| {
                let left = if k > 0 { self.sub[k - 1].abs() } else { 0.0 };
                let right = if k + 1 < n { self.sup[k].abs() } else { 0.0 };
                left + self.diag[k].abs() + right
            })
            .fold(0.0, f64::max)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut a = vec![vec![0.0; n]; n];
        for k in 0..n {
            a[k][k] = self.diag[k];
            if k > 0 {
                a[k][k - 1] = self.sub[k - 1];
            }
            if k + 1 < n {
                a[k][k + 1] = self.sup[k];
            }
        }
        a
    }
}

fn require_interior(grid: &SpaceTimeGrid) -> Result<usize> {
    if grid.x_count() < 2 {
        return Err(Error::DegenerateGrid(format!(
            "need at least 2 spatial intervals, got {}",
            grid.x_count()
        )));
    }
    Ok(grid.interior())
}

/// Second-order central difference Laplacian on the interior nodes.
pub fn assemble_laplacian(grid: &SpaceTimeGrid) -> Result<TridiagonalMatrix> {
    let n = require_interior(grid)?;
    let inv = 1.0 / (grid.dx() * grid.dx());
    Ok(TridiagonalMatrix {
        sub: vec![inv; n - 1],
        diag: vec![-2.0 * inv; n],
        sup: vec![inv; n - 1],
    })
}

/// `M = I - eta L`.
///
/// A zero `eta` gives the identity; negative values are rejected.
pub fn assemble_operator_m(grid: &SpaceTimeGrid, eta: f64) -> Result<TridiagonalMatrix> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::AssumptionViolation(format!(
            "eta must be nonnegative and finite, got {eta}"
        )));
    }
    let lap = assemble_laplacian(grid)?;
    Ok(TridiagonalMatrix {
        sub: lap.sub.iter().map(|l| -eta * l).collect(),
        diag: lap.diag.iter().map(|l| 1.0 - eta * l).collect(),
        sup: lap.sup.iter().map(|l| -eta * l).collect(),
    })
}

/// Conservative discretisation of `(c u')'` from samples `c(x_{j+1/2})`,
/// `j = 0..N_x`.
pub fn assemble_variable_flux(
    grid: &SpaceTimeGrid,
    coeff_at_half_nodes: &[f64],
) -> Result<TridiagonalMatrix> {
    let n = require_interior(grid)?;
    check_len(grid.x_count(), coeff_at_half_nodes.len())?;
    if let Some((j, c)) = coeff_at_half_nodes
        .iter()
        .enumerate()
        .find(|(_, c)| !(c.is_finite() && **c >= 0.0))
    {
        return Err(Error::AssumptionViolation(format!(
            "flux coefficient at x_{{{j}+1/2}} is {c}"
        )));
    }
    let inv = 1.0 / (grid.dx() * grid.dx());
    let c = coeff_at_half_nodes;
    // interior node k (0-based) is grid node j = k + 1, between halves k and k + 1
    let diag = (0..n).map(|k| -(c[k] + c[k + 1]) * inv).collect();
    let off: Vec<f64> = (1..n).map(|k| c[k] * inv).collect();
    Ok(TridiagonalMatrix {
        sub: off.clone(),
        diag,
        sup: off,
    })
}

/// Thomas elimination. The matrix must be strictly diagonally dominant.
pub fn thomas_solve(a: &TridiagonalMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    check_len(n, rhs.len())?;
    if let Some(row) = a.dominance_violation() {
        return Err(Error::IllConditioned { row });
    }
    let mut c_prime = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = a.diag[0];
    if n > 1 {
        c_prime[0] = a.sup[0] / denom;
    }
    x[0] = rhs[0] / denom;
    for k in 1..n {
        denom = a.diag[k] - a.sub[k - 1] * c_prime[k - 1];
        if k + 1 < n {
            c_prime[k] = a.sup[k] / denom;
        }
        x[k] = (rhs[k] - a.sub[k - 1] * x[k - 1]) / denom;
    }
    for k in (0..n - 1).rev() {
        x[k] -= c_prime[k] * x[k + 1];
    }
    Ok(x)
}

/// Solves `(a + u_col v_row^T) x = rhs` with two Thomas solves and the
/// Sherman-Morrison correction.
///
/// A correction denominator `1 + v^T a^{-1} u` that is zero relative to its
/// parts means the perturbed operator is (numerically) singular; that is
/// reported as an identifiability failure.
pub fn rank_one_solve(
    a: &TridiagonalMatrix,
    u_col: &[f64],
    v_row: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = a.n();
    check_len(n, u_col.len())?;
    check_len(n, v_row.len())?;
    let y = thomas_solve(a, rhs)?;
    if u_col.iter().all(|&u| u == 0.0) {
        return Ok(y);
    }
    let z = thomas_solve(a, u_col)?;
    let vz: f64 = v_row.iter().zip(&z).map(|(v, z)| v * z).sum();
    let vy: f64 = v_row.iter().zip(&y).map(|(v, y)| v * y).sum();
    let denom = 1.0 + vz;
    if !(denom.abs() > 1e-12 * (1.0 + vz.abs())) {
        return Err(Error::Identifiability(format!(
            "rank-one correction denominator {denom:e} is numerically zero"
        )));
    }
    let factor = vy / denom;
    Ok(y.iter().zip(&z).map(|(y, z)| y - factor * z).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> SpaceTimeGrid {
        SpaceTimeGrid::unit(n, 1, 1.0).unwrap()
    }

    #[test]
    fn laplacian_entries() {
        let l = assemble_laplacian(&grid(2)).unwrap();
        assert_eq!(l.diag(), &[-8.0]);
        let l = assemble_laplacian(&grid(4)).unwrap();
        assert_eq!(l.diag(), &[-32.0, -32.0, -32.0]);
        assert_eq!(l.sub(), &[16.0, 16.0]);
        assert_eq!(l.sup(), &[16.0, 16.0]);
        assert!(matches!(
            assemble_laplacian(&grid(1)),
            Err(Error::DegenerateGrid(_))
        ));
    }

    #[test]
    fn laplacian_of_sine_within_taylor_bound() {
        let g = grid(200);
        let l = assemble_laplacian(&g).unwrap();
        let u: Vec<f64> = (1..200).map(|j| (PI * g.x(j)).sin()).collect();
        let lu = l.mul_vec(&u).unwrap();
        let bound = PI.powi(4) * g.dx() * g.dx() / 12.0 * 1.1;
        let dev = lu
            .iter()
            .zip(&u)
            .map(|(a, s)| (a + PI * PI * s).abs())
            .fold(0.0, f64::max);
        assert!(dev <= bound, "{dev} > {bound}");
    }

    #[test]
    fn operator_m_entries() {
        let m = assemble_operator_m(&grid(4), 0.5).unwrap();
        assert_eq!(m.diag(), &[17.0, 17.0, 17.0]);
        assert_eq!(m.sub(), &[-8.0, -8.0]);
        assert_eq!(
            assemble_operator_m(&grid(7), 0.0).unwrap(),
            TridiagonalMatrix::identity(6)
        );
        assert!(assemble_operator_m(&grid(200), 1.0)
            .unwrap()
            .is_strictly_diagonally_dominant());
        assert!(matches!(
            assemble_operator_m(&grid(4), -0.1),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn flux_reduces_to_laplacian() {
        let g = grid(9);
        let l = assemble_laplacian(&g).unwrap();
        assert_eq!(assemble_variable_flux(&g, &[1.0; 9]).unwrap(), l);
        let two = assemble_variable_flux(&grid(4), &[2.0; 4]).unwrap();
        assert_eq!(two.diag(), &[-64.0, -64.0, -64.0]);
        assert_eq!(two.sup(), &[32.0, 32.0]);
        assert!(assemble_variable_flux(&g, &[1.0; 8]).is_err());
        let mut neg = vec![1.0; 9];
        neg[3] = -1.0;
        assert!(matches!(
            assemble_variable_flux(&g, &neg),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn flux_matches_symbolic_derivative() {
        // (c u')' with c = 1 + x, u = x(1 - x): -2(1 + x) + (1 - 2x)
        let g = grid(100);
        let c: Vec<f64> = (0..100).map(|j| 1.0 + g.x_half(j)).collect();
        let a = assemble_variable_flux(&g, &c).unwrap();
        let u: Vec<f64> = (1..100).map(|j| g.x(j) * (1.0 - g.x(j))).collect();
        let au = a.mul_vec(&u).unwrap();
        let err = (1..100)
            .map(|j| {
                let x = g.x(j);
                (au[j - 1] - (-2.0 * (1.0 + x) + (1.0 - 2.0 * x))).abs()
            })
            .fold(0.0, f64::max);
        assert!(err <= 5e-3, "{err}");
    }

    #[test]
    fn thomas_small_systems() {
        let id = TridiagonalMatrix::identity(3);
        assert_eq!(
            thomas_solve(&id, &[3.0, -1.0, 7.0]).unwrap(),
            vec![3.0, -1.0, 7.0]
        );
        let a = TridiagonalMatrix::new(vec![-1.0], vec![2.0, 2.0], vec![-1.0]).unwrap();
        let x = thomas_solve(&a, &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn thomas_rejects_non_dominant() {
        let a = TridiagonalMatrix::new(vec![-1.0], vec![1.0, 2.0], vec![-1.0]).unwrap();
        assert!(matches!(
            thomas_solve(&a, &[1.0, 1.0]),
            Err(Error::IllConditioned { row: 0 })
        ));
    }

    #[test]
    fn rank_one_examples() {
        let a = TridiagonalMatrix::new(vec![], vec![2.0], vec![]).unwrap();
        assert_eq!(
            rank_one_solve(&a, &[1.0], &[1.0], &[6.0]).unwrap(),
            vec![2.0]
        );
        let a =
            TridiagonalMatrix::new(vec![0.5, 0.5], vec![3.0, 3.0, 3.0], vec![-1.0, 1.0]).unwrap();
        let rhs = [1.0, -2.0, 0.25];
        assert_eq!(
            rank_one_solve(&a, &[0.0; 3], &[5.0, 1.0, 2.0], &rhs).unwrap(),
            thomas_solve(&a, &rhs).unwrap()
        );
    }

    #[test]
    fn rank_one_detects_singular_update() {
        // (1) + (1)(-1) = 0
        let a = TridiagonalMatrix::new(vec![], vec![1.0], vec![]).unwrap();
        assert!(matches!(
            rank_one_solve(&a, &[1.0], &[-1.0], &[1.0]),
            Err(Error::Identifiability(_))
        ));
    }

    fn dominant(n: usize) -> impl Strategy<Value = TridiagonalMatrix> {
        (
            prop::collection::vec(-1.0..1.0f64, n - 1),
            prop::collection::vec(-1.0..1.0f64, n - 1),
            prop::collection::vec(0.1..5.0f64, n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(sub, sup, extra, sign)| {
                let diag = (0..n)
                    .map(|k| {
                        let l = if k > 0 { sub[k - 1].abs() } else { 0.0 };
                        let r = if k + 1 < n { sup[k].abs() } else { 0.0 };
                        let d = l + r + extra[k];
                        if sign[k] {
                            d
                        } else {
                            -d
                        }
                    })
                    .collect();
                TridiagonalMatrix::new(sub, diag, sup).unwrap()
            })
    }

    proptest! {
        #[test]
        fn thomas_reconstructs_rhs(
            (a, rhs) in (2usize..300).prop_flat_map(|n| (dominant(n), prop::collection::vec(-10.0..10.0f64, n)))
        ) {
            let x = thomas_solve(&a, &rhs).unwrap();
            let back = a.mul_vec(&x).unwrap();
            let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let rn = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let res = back.iter().zip(&rhs).fold(0.0f64, |m, (b, r)| m.max((b - r).abs()));
            prop_assert!(res <= 1e-12 * (a.inf_norm() * xn + rn));
        }

        #[test]
        fn operator_m_is_identity_minus_eta_laplacian(
            n in 2usize..64, eta in 0.0..3.0f64, v in prop::collection::vec(-1.0..1.0f64, 64)
        ) {
            let g = grid(n + 1);
            let v = &v[..n];
            let m = assemble_operator_m(&g, eta).unwrap();
            let mv = m.mul_vec(v).unwrap();
            let lv = assemble_laplacian(&g).unwrap().mul_vec(v).unwrap();
            let scale = 1.0 + m.inf_norm() * v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for k in 0..n {
                let expect = v[k] - eta * lv[k];
                prop_assert!((mv[k] - expect).abs() <= 1e-14 * scale);
            }
        }

        #[test]
        fn cn_pair_sums_to_twice_m(n in 2usize..40, eta in 0.0..2.0f64, kappa in 0.0..3.0f64, tau in 1e-4..0.1f64) {
            let g = grid(n + 1);
            let m = assemble_operator_m(&g, eta).unwrap();
            let l = assemble_laplacian(&g).unwrap();
            let a = m.combine(1.0, &l, -0.5 * tau * kappa).unwrap();
            let b = m.combine(1.0, &l, 0.5 * tau * kappa).unwrap();
            let sum = a.combine(1.0, &b, 1.0).unwrap();
            let twice = m.combine(2.0, &m, 0.0).unwrap();
            // rounding is bounded by the magnitude of the two halves
            for ((s, t), (x, y)) in sum.diag().iter().zip(twice.diag()).zip(a.diag().iter().zip(b.diag())) {
                prop_assert!((s - t).abs() <= 4.0 * f64::EPSILON * (x.abs() + y.abs()));
            }
            for ((s, t), (x, y)) in sum.sub().iter().zip(twice.sub()).zip(a.sub().iter().zip(b.sub())) {
                prop_assert!((s - t).abs() <= 4.0 * f64::EPSILON * (x.abs() + y.abs()));
            }
        }
    }
}
