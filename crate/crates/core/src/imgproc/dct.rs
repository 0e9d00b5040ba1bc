use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{ImageError, Result};

/// Number of values in an 8x8 block.
pub const BLOCK_LEN: usize = 64;

/// Orthonormal DCT-II basis: `basis[k][n] = c(k) cos((2n + 1) k pi / 16)`.
fn basis() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; 8]; 8];
        for (k, row) in m.iter_mut().enumerate() {
            let c = if k == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
            for (n, v) in row.iter_mut().enumerate() {
                *v = c * ((2 * n + 1) as f64 * k as f64 * PI / 16.0).cos();
            }
        }
        m
    })
}

/// Orthonormal 2-D DCT-II of a row-major 8x8 block.
pub fn dct8x8(block: &[f64]) -> Result<[f64; BLOCK_LEN]> {
    if block.len() != BLOCK_LEN {
        return Err(ImageError::WrongBlockSize(block.len()));
    }
    Ok(separable(block, false))
}

/// Inverse of [`dct8x8`].
pub fn idct8x8(coeffs: &[f64]) -> Result<[f64; BLOCK_LEN]> {
    if coeffs.len() != BLOCK_LEN {
        return Err(ImageError::WrongBlockSize(coeffs.len()));
    }
    Ok(separable(coeffs, true))
}

// C X C^T for the forward transform, C^T X C for the inverse.
fn separable(x: &[f64], inverse: bool) -> [f64; BLOCK_LEN] {
    let c = basis();
    let m = |a: usize, b: usize| if inverse { c[b][a] } else { c[a][b] };
    let mut tmp = [0.0; BLOCK_LEN];
    for u in 0..8 {
        for col in 0..8 {
            tmp[u * 8 + col] = (0..8).map(|row| m(u, row) * x[row * 8 + col]).sum();
        }
    }
    let mut out = [0.0; BLOCK_LEN];
    for u in 0..8 {
        for v in 0..8 {
            out[u * 8 + v] = (0..8).map(|col| tmp[u * 8 + col] * m(v, col)).sum();
        }
    }
    out
}
