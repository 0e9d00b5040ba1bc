use std::collections::VecDeque;

use super::{ImageError, Plane, Result};

/// Smoothing applied before gradient estimation in [`canny`].
pub const CANNY_GAUSSIAN_SIGMA: f64 = 1.4;
const CANNY_GAUSSIAN_RADIUS: usize = 2;

/// 3x3 Sobel responses with replicate borders.
///
/// `Sx` uses `[-1 0 1; -2 0 2; -1 0 1]` and `Sy` its transpose, applied as a
/// correlation, so a ramp increasing to the right gives a positive `Sx`.
pub fn sobel_xy(g: &Plane) -> (Plane, Plane) {
    let (w, h) = (g.width(), g.height());
    let mut sx = Vec::with_capacity(w * h);
    let mut sy = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| g.get_clamped(x + dx, y + dy);
            let (tl, t, tr) = (p(-1, -1), p(0, -1), p(1, -1));
            let (l, r) = (p(-1, 0), p(1, 0));
            let (bl, b, br) = (p(-1, 1), p(0, 1), p(1, 1));
            sx.push((tr - tl) + 2.0 * (r - l) + (br - bl));
            sy.push((bl - tl) + 2.0 * (b - t) + (br - tr));
        }
    }
    (Plane::new(w, h, sx).unwrap(), Plane::new(w, h, sy).unwrap())
}

/// 4-neighbour Laplacian `[0 1 0; 1 -4 1; 0 1 0]` with replicate borders.
pub fn laplacian(g: &Plane) -> Plane {
    let (w, h) = (g.width(), g.height());
    Plane::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let c = g.get_clamped(x, y);
        (g.get_clamped(x, y - 1) - c)
            + (g.get_clamped(x - 1, y) - c)
            + (g.get_clamped(x + 1, y) - c)
            + (g.get_clamped(x, y + 1) - c)
    })
}

/// Normalised `(2r+1) x (2r+1)` Gaussian kernel, row-major.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let size = 2 * radius + 1;
    let r = radius as f64;
    let mut k = Vec::with_capacity(size * size);
    for j in 0..size {
        for i in 0..size {
            let (dx, dy) = (i as f64 - r, j as f64 - r);
            k.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Direct 2-D Gaussian filtering with replicate borders.
pub fn gaussian_blur(g: &Plane, sigma: f64, radius: usize) -> Plane {
    let kernel = gaussian_kernel(sigma, radius);
    let size = 2 * radius + 1;
    let r = radius as isize;
    // accumulated as offsets from the centre so flat regions stay exactly flat
    Plane::from_fn(g.width(), g.height(), |x, y| {
        let c = g.get(x, y);
        let mut acc = 0.0;
        for j in 0..size {
            for i in 0..size {
                let v = g.get_clamped(x as isize + i as isize - r, y as isize + j as isize - r);
                acc += kernel[j * size + i] * (v - c);
            }
        }
        c + acc
    })
}

/// Hysteresis thresholds on the L2 gradient magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for CannyThresholds {
    fn default() -> Self {
        Self { low: 100.0, high: 200.0 }
    }
}

#[derive(Clone, Copy)]
enum Sector {
    Horizontal,
    Diagonal,
    Vertical,
    AntiDiagonal,
}

// tan(22.5°) and tan(67.5°)
const TAN_22_5: f64 = 0.414_213_562_373_095_03;
const TAN_67_5: f64 = 2.414_213_562_373_095;

fn sector(gx: f64, gy: f64) -> Sector {
    let (ax, ay) = (gx.abs(), gy.abs());
    if ay <= TAN_22_5 * ax {
        Sector::Horizontal
    } else if ay > TAN_67_5 * ax {
        Sector::Vertical
    } else if (gx > 0.0) == (gy > 0.0) {
        Sector::Diagonal
    } else {
        Sector::AntiDiagonal
    }
}

/// Canny edge map of a U8-scale plane: values are 0 or 255.
///
/// Pipeline: 5x5 Gaussian (sigma 1.4), Sobel, L2 magnitude, non-maximum
/// suppression along four quantised directions, then hysteresis where pixels
/// with magnitude `>= high` seed edges and pixels in `[low, high)` survive when
/// 8-connected to a seed.
pub fn canny(g: &Plane, thresholds: CannyThresholds) -> Result<Plane> {
    let CannyThresholds { low, high } = thresholds;
    if !(low < high) {
        return Err(ImageError::InvalidThresholds { low, high });
    }
    let (w, h) = (g.width(), g.height());
    let smooth = gaussian_blur(g, CANNY_GAUSSIAN_SIGMA, CANNY_GAUSSIAN_RADIUS);
    let (gx, gy) = sobel_xy(&smooth);
    let mag: Vec<f64> = gx.values().iter().zip(gy.values()).map(|(a, b)| a.hypot(*b)).collect();
    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // 0 = suppressed, 1 = weak, 2 = strong
    let mut state = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m < low {
                continue;
            }
            let (xi, yi) = (x as isize, y as isize);
            let (before, after) = match sector(gx.values()[i], gy.values()[i]) {
                Sector::Horizontal => (at(xi - 1, yi), at(xi + 1, yi)),
                Sector::Vertical => (at(xi, yi - 1), at(xi, yi + 1)),
                Sector::Diagonal => (at(xi - 1, yi - 1), at(xi + 1, yi + 1)),
                Sector::AntiDiagonal => (at(xi + 1, yi - 1), at(xi - 1, yi + 1)),
            };
            if m > before && m >= after {
                state[i] = if m >= high { 2 } else { 1 };
            }
        }
    }

    let mut out = vec![0.0; w * h];
    let mut queue: VecDeque<usize> = (0..w * h).filter(|&i| state[i] == 2).collect();
    for &i in &queue {
        out[i] = 255.0;
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if state[j] == 1 && out[j] == 0.0 {
                    out[j] = 255.0;
                    queue.push_back(j);
                }
            }
        }
    }
    Plane::new(w, h, out)
}
