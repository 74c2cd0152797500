#![allow(dead_code)]

use pondctl_core::{Discretization, ModelSpec, StateField};

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Classical RK4 on `f`, fixed step, independent of the crate's integrator.
pub fn rk4<F: Fn(&[f64]) -> Vec<f64>>(f: F, w0: &[f64], t: f64, h: f64) -> Vec<f64> {
    let steps = (t / h).round() as usize;
    let h = t / steps as f64;
    let mut w = w0.to_vec();
    let axpy = |w: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        w.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    for _ in 0..steps {
        let k1 = f(&w);
        let k2 = f(&axpy(&w, &k1, h / 2.0));
        let k3 = f(&axpy(&w, &k2, h / 2.0));
        let k4 = f(&axpy(&w, &k3, h));
        for i in 0..w.len() {
            w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    w
}

/// Logistic-competition rhs written out directly from the parameters.
pub fn lv_rhs(spec: &ModelSpec) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |w: &[f64]| {
        let b = spec.interaction();
        (0..w.len())
            .map(|j| {
                let c: f64 = (0..w.len()).map(|k| b[(j, k)] * w[k]).sum();
                w[j] * (spec.growth()[j] - c)
            })
            .collect()
    }
}

pub fn profile(disc: &Discretization, f: impl Fn(f64) -> f64) -> Vec<f64> {
    disc.nodes().map(f).collect()
}

pub fn field(rows: Vec<Vec<f64>>) -> StateField {
    StateField::new(rows, 0.0).unwrap()
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}
