use super::{ImageError, Plane, Result};

/// Non-local means parameters. `h` is on the scale of the input plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlmParams {
    pub h: f64,
    pub patch: usize,
    pub search: usize,
}

impl Default for NlmParams {
    fn default() -> Self {
        Self { h: 10.0, patch: 7, search: 21 }
    }
}

impl NlmParams {
    pub fn validate(&self) -> Result<()> {
        if self.patch.is_multiple_of(2) || self.search.is_multiple_of(2) {
            return Err(ImageError::InvalidWindow(format!(
                "patch ({}) and search ({}) must be odd",
                self.patch, self.search
            )));
        }
        if self.patch > self.search {
            return Err(ImageError::InvalidWindow(format!(
                "patch ({}) larger than search window ({})",
                self.patch, self.search
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(ImageError::InvalidWindow(format!("filter strength h = {} must be positive", self.h)));
        }
        Ok(())
    }
}

/// Classic pixelwise non-local means.
///
/// Each pixel becomes the weighted mean of the in-bounds pixels of its
/// `search x search` window. The weight of candidate `q` for pixel `p` is
/// `exp(-d2 / h^2)`, where `d2` is the mean squared difference between the
/// `patch x patch` neighbourhoods of `p` and `q` (replicate borders).
///
/// Patch distances are accumulated one displacement at a time with a summed-area
/// table, so the cost is `O(pixels * search^2)` rather than `O(pixels * search^2 * patch^2)`.
pub fn nlm_denoise(g: &Plane, params: NlmParams) -> Result<Plane> {
    params.validate()?;
    let (w, h) = (g.width(), g.height());
    let pr = (params.patch / 2) as isize;
    let sr = (params.search / 2) as isize;
    let inv_h2 = 1.0 / (params.h * params.h);
    let inv_area = 1.0 / (params.patch * params.patch) as f64;

    // extended grid covering every patch position: [-pr, w-1+pr] x [-pr, h-1+pr]
    let ew = w + 2 * pr as usize;
    let eh = h + 2 * pr as usize;
    let mut sat = vec![0.0f64; (ew + 1) * (eh + 1)];
    let mut acc_w = vec![0.0f64; w * h];
    let mut acc_v = vec![0.0f64; w * h];

    for dy in -sr..=sr {
        for dx in -sr..=sr {
            // summed-area table of squared differences between the grid and its (dx, dy) shift
            for ey in 0..eh {
                let uy = ey as isize - pr;
                let mut row = 0.0;
                for ex in 0..ew {
                    let ux = ex as isize - pr;
                    let diff = g.get_clamped(ux, uy) - g.get_clamped(ux + dx, uy + dy);
                    row += diff * diff;
                    sat[(ey + 1) * (ew + 1) + ex + 1] = sat[ey * (ew + 1) + ex + 1] + row;
                }
            }
            let span = params.patch;
            for y in 0..h {
                let qy = y as isize + dy;
                if qy < 0 || qy >= h as isize {
                    continue;
                }
                for x in 0..w {
                    let qx = x as isize + dx;
                    if qx < 0 || qx >= w as isize {
                        continue;
                    }
                    // patch around (x, y) occupies extended columns x..x+span, rows y..y+span
                    let (x0, y0, x1, y1) = (x, y, x + span, y + span);
                    let s = sat[y1 * (ew + 1) + x1] - sat[y0 * (ew + 1) + x1] - sat[y1 * (ew + 1) + x0]
                        + sat[y0 * (ew + 1) + x0];
                    let d2 = (s * inv_area).max(0.0);
                    let wt = (-d2 * inv_h2).exp();
                    let i = y * w + x;
                    acc_w[i] += wt;
                    acc_v[i] += wt * (g.get(qx as usize, qy as usize) - g.get(x, y));
                }
            }
        }
    }

    // weighted mean written as centre + mean offset, so flat regions come back exactly
    let data = g.values().iter().zip(acc_v.iter().zip(&acc_w)).map(|(c, (v, w))| c + v / w).collect();
    Plane::new(w, h, data)
}
