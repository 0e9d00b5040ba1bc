use super::{ImageError, Plane, Result};

/// Neighbour offsets, clockwise from the top-left; offset `k` sets bit `k`.
const NEIGHBOURS: [(isize, isize); 8] =
    [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

/// Radius-1, 8-neighbour local binary pattern codes.
///
/// Bit `k` is set when neighbour `k` is `>=` the centre. Border pixels have no
/// full neighbourhood and are skipped, so the result is `(W-2) x (H-2)`.
pub fn lbp_codes(g: &Plane) -> Result<Plane> {
    let (w, h) = (g.width(), g.height());
    if w < 3 || h < 3 {
        return Err(ImageError::TooSmall { width: w, height: h });
    }
    Ok(Plane::from_fn(w - 2, h - 2, |x, y| {
        let (cx, cy) = (x + 1, y + 1);
        let c = g.get(cx, cy);
        let mut code = 0u32;
        for (k, (dx, dy)) in NEIGHBOURS.iter().enumerate() {
            let v = g.get((cx as isize + dx) as usize, (cy as isize + dy) as usize);
            if v >= c {
                code |= 1 << k;
            }
        }
        f64::from(code)
    }))
}
