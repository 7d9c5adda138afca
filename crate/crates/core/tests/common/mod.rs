#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;

use mpjc::HilbertDims;

pub fn dims(d: usize) -> HilbertDims {
    HilbertDims::new(d).unwrap()
}

/// `exp(A t)` by scaling and squaring around a truncated Taylor series.
pub fn dense_expm(a: &Array2<Complex64>, t: f64) -> Array2<Complex64> {
    let n = a.nrows();
    let norm = a
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|z| z * (t / 2f64.powi(squarings)));
    let mut result = Array2::<Complex64>::eye(n);
    let mut term = Array2::<Complex64>::eye(n);
    for k in 1..=24 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        result += &term;
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}
