//! Naive reference implementations of the fifteen features.
//!
//! Everything here is evaluated straight from the definitions on interleaved
//! RGB bytes, without sharing code with the library: direct convolutions,
//! brute-force non-local means, the cosine-sum DCT, an angle-based Canny with
//! fixed-point hysteresis.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Params {
    pub nlm_h: f64,
    pub nlm_patch: usize,
    pub nlm_search: usize,
    pub canny_low: f64,
    pub canny_high: f64,
    pub dct_blocks: usize,
    pub dct_include_dc: bool,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            nlm_h: 10.0,
            nlm_patch: 7,
            nlm_search: 21,
            canny_low: 100.0,
            canny_high: 200.0,
            dct_blocks: 1000,
            dct_include_dc: true,
            seed: 42,
        }
    }
}

pub struct Output {
    pub values: [f64; 15],
    pub edges: Vec<bool>,
    pub lbp: Vec<u8>,
}

struct Img {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl Img {
    fn at(&self, x: isize, y: isize) -> f64 {
        let xc = x.max(0).min(self.w as isize - 1) as usize;
        let yc = y.max(0).min(self.h as isize - 1) as usize;
        self.data[yc * self.w + xc]
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

fn entropy(codes: impl Iterator<Item = usize>) -> f64 {
    let mut counts = [0u64; 256];
    let mut n = 0u64;
    for c in codes {
        counts[c] += 1;
        n += 1;
    }
    let mut e = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n as f64;
            e -= p * p.log2();
        }
    }
    e.max(0.0)
}

fn hexcone(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let (r, g, b) = (r / 255.0, g / 255.0, b / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let s = if max == 0.0 { 0.0 } else { d / max };
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        let t = 60.0 * ((g - b) / d);
        if t < 0.0 { t + 360.0 } else { t }
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    (if h >= 360.0 { h - 360.0 } else { h }, s, max)
}

fn correlate3(img: &Img, k: [[f64; 3]; 3]) -> Vec<f64> {
    let mut out = Vec::with_capacity(img.w * img.h);
    for y in 0..img.h as isize {
        for x in 0..img.w as isize {
            let mut acc = 0.0;
            for j in 0..3 {
                for i in 0..3 {
                    acc += k[j][i] * img.at(x + i as isize - 1, y + j as isize - 1);
                }
            }
            out.push(acc);
        }
    }
    out
}

const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
const LAPLACE: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]];

fn gaussian(img: &Img, sigma: f64, radius: isize) -> Img {
    let mut k = Vec::new();
    for j in -radius..=radius {
        for i in -radius..=radius {
            k.push((-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = k.iter().sum();
    let size = (2 * radius + 1) as usize;
    let mut data = Vec::with_capacity(img.w * img.h);
    for y in 0..img.h as isize {
        for x in 0..img.w as isize {
            let mut acc = 0.0;
            for j in -radius..=radius {
                for i in -radius..=radius {
                    let kv = k[(j + radius) as usize * size + (i + radius) as usize] / total;
                    acc += kv * img.at(x + i, y + j);
                }
            }
            data.push(acc);
        }
    }
    Img { w: img.w, h: img.h, data }
}

fn nlm(img: &Img, h: f64, patch: usize, search: usize) -> Vec<f64> {
    let (w, ht) = (img.w as isize, img.h as isize);
    let (pr, sr) = ((patch / 2) as isize, (search / 2) as isize);
    let mut out = Vec::with_capacity(img.data.len());
    for y in 0..ht {
        for x in 0..w {
            let (mut num, mut den) = (0.0, 0.0);
            for qy in (y - sr).max(0)..=(y + sr).min(ht - 1) {
                for qx in (x - sr).max(0)..=(x + sr).min(w - 1) {
                    let mut d2 = 0.0;
                    for ky in -pr..=pr {
                        for kx in -pr..=pr {
                            let diff = img.at(x + kx, y + ky) - img.at(qx + kx, qy + ky);
                            d2 += diff * diff;
                        }
                    }
                    let wt = (-(d2 / (patch * patch) as f64) / (h * h)).exp();
                    num += wt * img.at(qx, qy);
                    den += wt;
                }
            }
            out.push(num / den);
        }
    }
    out
}

fn dct_block(block: &[f64; 64]) -> [f64; 64] {
    let alpha = |u: usize| if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
    let mut out = [0.0; 64];
    for v in 0..8 {
        for u in 0..8 {
            let mut s = 0.0;
            for y in 0..8 {
                for x in 0..8 {
                    s += block[y * 8 + x]
                        * (((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI) / 16.0).cos()
                        * (((2 * y + 1) as f64 * v as f64 * std::f64::consts::PI) / 16.0).cos();
                }
            }
            out[v * 8 + u] = alpha(u) * alpha(v) * s;
        }
    }
    out
}

fn chosen_blocks(count: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..count).collect();
    if count > n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..n {
            let j = rng.random_range(i..count);
            idx.swap(i, j);
        }
        idx.truncate(n);
    }
    idx
}

fn canny(img: &Img, low: f64, high: f64) -> Vec<bool> {
    let smooth = gaussian(img, 1.4, 2);
    let gx = correlate3(&smooth, SOBEL_X);
    let gy = correlate3(&smooth, SOBEL_Y);
    let (w, h) = (img.w as isize, img.h as isize);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| (a * a + b * b).sqrt()).collect();
    let m_at = |x: isize, y: isize| if x < 0 || y < 0 || x >= w || y >= h { 0.0 } else { mag[(y * w + x) as usize] };
    // 0 = none, 1 = weak, 2 = strong
    let mut class = vec![0u8; mag.len()];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let m = mag[i];
            if m < low {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (a, b) = if !(22.5..157.5).contains(&angle) {
                (m_at(x - 1, y), m_at(x + 1, y))
            } else if angle < 67.5 {
                (m_at(x - 1, y - 1), m_at(x + 1, y + 1))
            } else if angle <= 112.5 {
                (m_at(x, y - 1), m_at(x, y + 1))
            } else {
                (m_at(x + 1, y - 1), m_at(x - 1, y + 1))
            };
            if m > a && m >= b {
                class[i] = if m >= high { 2 } else { 1 };
            }
        }
    }
    let mut edge: Vec<bool> = class.iter().map(|&c| c == 2).collect();
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                let i = (y * w + x) as usize;
                if edge[i] || class[i] != 1 {
                    continue;
                }
                let touches = (-1..=1).any(|dy| {
                    (-1..=1).any(|dx| {
                        let (nx, ny) = (x + dx, y + dy);
                        nx >= 0 && ny >= 0 && nx < w && ny < h && edge[(ny * w + nx) as usize]
                    })
                });
                if touches {
                    edge[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return edge;
        }
    }
}

pub fn features(rgb: &[u8], w: usize, h: usize, p: &Params) -> Output {
    let n = w * h;
    let chan = |c: usize| -> Vec<f64> { (0..n).map(|i| f64::from(rgb[3 * i + c])).collect() };
    let (r, g, b) = (chan(0), chan(1), chan(2));

    let mut hue = Vec::with_capacity(n);
    let mut sat = Vec::with_capacity(n);
    let mut val = Vec::with_capacity(n);
    for i in 0..n {
        let (hh, ss, vv) = hexcone(r[i], g[i], b[i]);
        hue.push(hh);
        sat.push(ss);
        val.push(vv);
    }
    let gray: Vec<f64> = (0..n).map(|i| 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]).collect();
    let g255 = Img { w, h, data: gray.clone() };
    let g1 = Img { w, h, data: gray.iter().map(|v| v / 255.0).collect() };

    let f3 = var(&correlate3(&g255, LAPLACE)).ln_1p();
    let sx = correlate3(&g1, SOBEL_X);
    let sy = correlate3(&g1, SOBEL_Y);
    let mag: Vec<f64> = sx.iter().zip(&sy).map(|(a, b)| (a * a + b * b).sqrt()).collect();
    let f4 = 10.0 * mean(&mag);
    let f5 = 10.0 * var(&mag).sqrt();

    let grid: Vec<(usize, usize)> =
        (0..h / 8).flat_map(|by| (0..w / 8).map(move |bx| (bx * 8, by * 8))).collect();
    let chosen = chosen_blocks(grid.len(), p.dct_blocks, p.seed);
    let mut total = 0.0;
    for &k in &chosen {
        let (x0, y0) = grid[k];
        let mut block = [0.0; 64];
        for y in 0..8 {
            for x in 0..8 {
                block[y * 8 + x] = gray[(y0 + y) * w + x0 + x];
            }
        }
        let c = dct_block(&block);
        total += if p.dct_include_dc { var(&c) } else { var(&c[1..]) };
    }
    let f6 = (total / chosen.len() as f64).ln_1p();

    let clean = nlm(&g255, p.nlm_h, p.nlm_patch, p.nlm_search);
    let resid: Vec<f64> = gray.iter().zip(&clean).map(|(a, b)| (a - b) / 255.0).collect();
    let f7 = (1000.0 * var(&resid)).ln_1p();

    let mut lbp = Vec::with_capacity((w - 2) * (h - 2));
    let ring = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];
    for y in 1..h as isize - 1 {
        for x in 1..w as isize - 1 {
            let c = g255.at(x, y);
            let mut code = 0u8;
            for (k, (dx, dy)) in ring.iter().enumerate() {
                if g255.at(x + dx, y + dy) >= c {
                    code |= 1 << k;
                }
            }
            lbp.push(code);
        }
    }
    let f8 = entropy(lbp.iter().map(|&c| c as usize));

    let corr = |a: &[f64], b: &[f64]| {
        let (va, vb) = (var(a), var(b));
        if va < 1e-12 || vb < 1e-12 {
            return 0.0;
        }
        let (ma, mb) = (mean(a), mean(b));
        let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64;
        (cov / (va * vb).sqrt()).clamp(-1.0, 1.0)
    };
    let f9 = corr(&r, &g);
    let f10 = corr(&r, &b);

    let bin = |v: f64| v.round().clamp(0.0, 255.0) as usize;
    let f11 = entropy((0..n).map(|i| bin(((r[i] - gray[i]) * 0.713 + 128.0).clamp(0.0, 255.0))));
    let f12 = entropy((0..n).map(|i| bin(((b[i] - gray[i]) * 0.564 + 128.0).clamp(0.0, 255.0))));
    let f13 = var(&hue).ln_1p();

    let edges = canny(&g255, p.canny_low, p.canny_high);
    let f14 = edges.iter().filter(|&&e| e).count() as f64 / n as f64;

    let vb = var(&b);
    let f15 = if vb < 1e-12 {
        0.0
    } else {
        let mb = mean(&b);
        let m4 = b.iter().map(|x| (x - mb).powi(4)).sum::<f64>() / n as f64;
        (m4 / (vb * vb) - 3.0).abs().ln_1p()
    };

    Output {
        values: [mean(&sat), mean(&val), f3, f4, f5, f6, f7, f8, f9, f10, f11, f12, f13, f14, f15],
        edges,
        lbp,
    }
}

/// Seeded 64x64-style test image: smooth colour blobs, a few hard edges and noise.
pub fn random_image(w: usize, h: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blobs: Vec<(f64, f64, f64, [f64; 3])> = (0..4)
        .map(|_| {
            (
                rng.random_range(0.0..w as f64),
                rng.random_range(0.0..h as f64),
                rng.random_range(4.0..20.0),
                [rng.random_range(-120.0..120.0), rng.random_range(-120.0..120.0), rng.random_range(-120.0..120.0)],
            )
        })
        .collect();
    let base = [rng.random_range(40.0..200.0), rng.random_range(40.0..200.0), rng.random_range(40.0..200.0)];
    let split = rng.random_range(0.2..0.8) * w as f64;
    let step = rng.random_range(100.0..220.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let noise = rng.random_range(0.0..25.0);
    let mut px = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut v = base[c] + if (x as f64) < split { 0.0 } else { step };
                for (bx, by, s, amp) in &blobs {
                    let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
                    v += amp[c] * (-d2 / (2.0 * s * s)).exp();
                }
                v += rng.random_range(-noise..=noise);
                px.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    px
}
