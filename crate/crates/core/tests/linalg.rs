use pseudoparabolic::{rank_one_solve, thomas_solve, TridiagonalMatrix};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian elimination with partial pivoting on a dense copy.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (e, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *e -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn random_dominant(rng: &mut ChaCha8Rng, n: usize) -> TridiagonalMatrix {
    let sub: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sup: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let diag = (0..n)
        .map(|k| {
            let off = if k > 0 { sub[k - 1].abs() } else { 0.0 }
                + if k + 1 < n { sup[k].abs() } else { 0.0 };
            let sign = if rng.random_range(0.0..1.0) < 0.5 {
                -1.0
            } else {
                1.0
            };
            sign * (off + rng.random_range(0.1..2.0))
        })
        .collect();
    TridiagonalMatrix::new(sub, diag, sup).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn thomas_and_rank_one_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_thomas: f64 = 0.0;
    let mut worst_rank_one: f64 = 0.0;
    let mut checked = 0;
    while checked < 200 {
        let n = rng.random_range(2..=64);
        let a = random_dominant(&mut rng, n);
        let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();

        let x = thomas_solve(&a, &rhs).unwrap();
        worst_thomas = worst_thomas.max(max_diff(&x, &dense_solve(a.to_dense(), rhs.clone())));

        let mut dense = a.to_dense();
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += u[i] * v[j];
            }
        }
        match rank_one_solve(&a, &u, &v, &rhs) {
            Ok(y) => {
                worst_rank_one = worst_rank_one.max(max_diff(&y, &dense_solve(dense, rhs)));
                checked += 1;
            }
            // nearly singular updates are rejected, not solved
            Err(e) => assert_eq!(e.kind(), pseudoparabolic::ErrorKind::Identifiability),
        }
    }
    assert!(worst_thomas <= 1e-11, "thomas {worst_thomas:e}");
    assert!(worst_rank_one <= 1e-11, "rank one {worst_rank_one:e}");
}

#[test]
fn thomas_reconstructs_large_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000;
    let a = random_dominant(&mut rng, n);
    let rhs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = thomas_solve(&a, &rhs).unwrap();
    let back = a.mul_vec(&x).unwrap();
    let rn = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_diff(&back, &rhs) <= 1e-12 * rn);
}

#[test]
fn rank_one_with_zero_column_is_thomas() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_dominant(&mut rng, 8);
    let rhs: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    assert_eq!(
        rank_one_solve(&a, &[0.0; 8], &v, &rhs).unwrap(),
        thomas_solve(&a, &rhs).unwrap()
    );
}
