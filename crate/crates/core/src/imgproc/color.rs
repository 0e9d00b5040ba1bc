use super::{ColorSpace, Plane, Raster, ScaleTag};

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

fn assert_rgb(img: &Raster) {
    assert_eq!(img.space(), ColorSpace::Rgb, "expected an RGB raster");
}

/// BT.601 luma `0.299 R + 0.587 G + 0.114 B`, on the U8 or Unit scale.
///
/// The result is not rounded, so a U8-scale plane may hold fractional values.
pub fn to_grayscale(img: &Raster, scale: ScaleTag) -> Plane {
    assert_rgb(img);
    let div = match scale {
        ScaleTag::U8 => 1.0,
        ScaleTag::Unit => 255.0,
        ScaleTag::HueDeg => panic!("grayscale has no hue scale"),
    };
    let (r, g, b) = (img.channel(0).values(), img.channel(1).values(), img.channel(2).values());
    let data = r
        .iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| (LUMA_R * r + LUMA_G * g + LUMA_B * b) / div)
        .collect();
    Plane::new(img.width(), img.height(), data).expect("luma of finite values is finite")
}

/// Hexcone RGB to HSV: hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
/// Hue is 0 for achromatic pixels.
pub fn rgb_to_hsv(img: &Raster) -> Raster {
    assert_rgb(img);
    let n = img.width() * img.height();
    let (mut h, mut s, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (rp, gp, bp) = (img.channel(0).values(), img.channel(1).values(), img.channel(2).values());
    for i in 0..n {
        let (r, g, b) = (rp[i] / 255.0, gp[i] / 255.0, bp[i] / 255.0);
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let delta = max - min;
        let sat = if max > 0.0 { delta / max } else { 0.0 };
        let hue = if delta <= 0.0 || sat == 0.0 {
            0.0
        } else if max == r {
            60.0 * (g - b) / delta
        } else if max == g {
            60.0 * (b - r) / delta + 120.0
        } else {
            60.0 * (r - g) / delta + 240.0
        };
        let hue = if hue < 0.0 { hue + 360.0 } else { hue };
        h.push(if hue >= 360.0 { 0.0 } else { hue });
        s.push(sat);
        v.push(max);
    }
    let (w, ht) = (img.width(), img.height());
    Raster::from_parts(
        ColorSpace::Hsv,
        vec![
            Plane::new(w, ht, h).unwrap(),
            Plane::new(w, ht, s).unwrap(),
            Plane::new(w, ht, v).unwrap(),
        ],
        vec![ScaleTag::HueDeg, ScaleTag::Unit, ScaleTag::Unit],
    )
}

/// BT.601 full-range YCrCb, channels ordered `Y, Cr, Cb`, each clamped to `[0, 255]`.
pub fn rgb_to_ycrcb(img: &Raster) -> Raster {
    assert_rgb(img);
    let n = img.width() * img.height();
    let (mut yv, mut cr, mut cb) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (rp, gp, bp) = (img.channel(0).values(), img.channel(1).values(), img.channel(2).values());
    for i in 0..n {
        let y = LUMA_R * rp[i] + LUMA_G * gp[i] + LUMA_B * bp[i];
        yv.push(y.clamp(0.0, 255.0));
        cr.push(((rp[i] - y) * 0.713 + 128.0).clamp(0.0, 255.0));
        cb.push(((bp[i] - y) * 0.564 + 128.0).clamp(0.0, 255.0));
    }
    let (w, h) = (img.width(), img.height());
    Raster::from_parts(
        ColorSpace::YCrCb,
        vec![
            Plane::new(w, h, yv).unwrap(),
            Plane::new(w, h, cr).unwrap(),
            Plane::new(w, h, cb).unwrap(),
        ],
        vec![ScaleTag::U8; 3],
    )
}

/// Inverse hexcone conversion of a single pixel, returning U8-scale RGB.
#[cfg(test)]
pub(crate) fn hsv_pixel_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    ((r + m) * 255.0, (g + m) * 255.0, (b + m) * 255.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn solid(r: u8, g: u8, b: u8) -> Raster {
        let px: Vec<u8> = std::iter::repeat_n([r, g, b], 16 * 16).flatten().collect();
        Raster::from_rgb8(16, 16, &px).unwrap()
    }

    #[test]
    fn grayscale_scales() {
        let white = solid(255, 255, 255);
        assert!(to_grayscale(&white, ScaleTag::U8).values().iter().all(|&v| (v - 255.0).abs() < 1e-12));
        assert!(to_grayscale(&white, ScaleTag::Unit).values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        let green = to_grayscale(&solid(0, 255, 0), ScaleTag::U8);
        // 0.587 * 255
        assert!(green.values().iter().all(|&v| (v - 149.685).abs() < 1e-9));
    }

    #[test]
    fn hsv_anchors() {
        let px = |r, g, b| {
            let hsv = rgb_to_hsv(&solid(r, g, b));
            (hsv.channel(0).get(0, 0), hsv.channel(1).get(0, 0), hsv.channel(2).get(0, 0))
        };
        assert_eq!(px(255, 0, 0), (0.0, 1.0, 1.0));
        assert_eq!(px(0, 0, 0), (0.0, 0.0, 0.0));
        let (h, s, v) = px(128, 64, 32);
        assert!((h - 20.0).abs() < 1e-9);
        assert!((s - 0.75).abs() < 1e-12);
        assert!((v - 0.50196).abs() < 1e-5);
        assert_eq!(px(90, 90, 90).0, 0.0);
        assert!((px(0, 0, 255).0 - 240.0).abs() < 1e-9);
        assert!((px(255, 0, 128).0 - 329.882_352_941).abs() < 1e-6);
    }

    #[test]
    fn ycrcb_anchors() {
        let px = |r, g, b| {
            let y = rgb_to_ycrcb(&solid(r, g, b));
            (y.channel(0).get(0, 0), y.channel(1).get(0, 0), y.channel(2).get(0, 0))
        };
        for v in [0u8, 17, 128, 255] {
            let (_, cr, cb) = px(v, v, v);
            assert!((cr - 128.0).abs() < 1e-9 && (cb - 128.0).abs() < 1e-9);
        }
        let (_, cr, cb) = px(255, 0, 0);
        assert_eq!(cr, 255.0);
        assert!((cb - 85.0).abs() < 0.01, "cb = {cb}");
        assert_eq!(px(0, 0, 0), (0.0, 128.0, 128.0));
    }

    proptest! {
        #[test]
        fn hsv_round_trip_within_one_step(r in 0u8..=255, g in 0u8..=255, b in 0u8..=255) {
            let hsv = rgb_to_hsv(&solid(r, g, b));
            let (h, s, v) = (hsv.channel(0).get(0, 0), hsv.channel(1).get(0, 0), hsv.channel(2).get(0, 0));
            prop_assert!((0.0..360.0).contains(&h));
            prop_assert!((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&v));
            if s > 0.01 {
                let (rr, gg, bb) = hsv_pixel_to_rgb(h, s, v);
                prop_assert!((rr - f64::from(r)).abs() <= 1.0);
                prop_assert!((gg - f64::from(g)).abs() <= 1.0);
                prop_assert!((bb - f64::from(b)).abs() <= 1.0);
            }
        }
    }
}
