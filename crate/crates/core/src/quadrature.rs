//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// ∫ₐᵇ f with absolute/relative tolerance. Returns (estimate, error bound).
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let mut pending = vec![(a, b, kronrod(&f, a, b))];
    let mut total = 0.0;
    let mut error = 0.0;
    let mut done: Vec<(f64, f64)> = Vec::new();
    let max_intervals = 100_000;
    while let Some((lo, hi, (val, err))) = pending.pop() {
        let width = hi - lo;
        let local_tol = (abs_tol.max(rel_tol * val.abs())) * width / (b - a).abs().max(f64::MIN_POSITIVE);
        if err <= local_tol || done.len() + pending.len() > max_intervals || width < 1e-14 * (b - a).abs() {
            done.push((val, err));
            continue;
        }
        let mid = 0.5 * (lo + hi);
        pending.push((lo, mid, kronrod(&f, lo, mid)));
        pending.push((mid, hi, kronrod(&f, mid, hi)));
    }
    for (v, e) in done {
        total += v;
        error += e;
    }
    (total, error)
}

/// Adaptive integral split at the given interior breakpoints.
pub fn integrate_with_breaks(f: impl Fn(f64) -> f64, points: &[f64], abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    points.windows(2).fold((0.0, 0.0), |(s, e), w| {
        let (v, err) = integrate_adaptive(&f, w[0], w[1], abs_tol, rel_tol);
        (s + v, e + err)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_oscillations() {
        let (v, _) = integrate_adaptive(|x| x.powi(3), 0.0, 2.0, 1e-14, 1e-14);
        assert!((v - 4.0).abs() < 1e-12);
        let (v, _) = integrate_adaptive(|x| (50.0 * x).cos(), 0.0, 3.0, 1e-13, 1e-13);
        assert!((v - (150.0f64).sin() / 50.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_lorentzian() {
        let g = 1e-4;
        let f = |x: f64| g / std::f64::consts::PI / (x * x + g * g);
        let (v, _) = integrate_with_breaks(f, &[-1.0, 0.0, 1.0], 1e-13, 1e-12);
        let exact = 2.0 * (1.0 / g).atan() / std::f64::consts::PI;
        assert!((v - exact).abs() < 1e-10);
    }
}
