//! Adaptive Gauss–Kronrod (7/15) quadrature, plus a panel driver for
//! one-sided Fourier integrals `∫_0^Ω f(ω) cos(ωτ) dω`.

/// Gauss–Kronrod 15-point nodes on [0, 1] (symmetric about 0 on [-1, 1]).
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
    0.209_482_141_084_728_0,
];
/// Gauss 7-point weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    /// Sum of |panel values|; the magnitude against which relative
    /// tolerances are judged when panels cancel.
    pub scale: f64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-10,
            abs: 1e-14,
            max_depth: 30,
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_k = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * h;
    let raw = ((kronrod - gauss) * h).abs();
    let abs_scale = abs_k * h.abs();
    // QUADPACK's error heuristic
    let err = if abs_scale > 0.0 && raw > 0.0 {
        abs_scale * (200.0 * raw / abs_scale).powf(1.5).min(1.0)
    } else {
        raw
    };
    (value, err.max(50.0 * f64::EPSILON * abs_scale), abs_scale)
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: (f64, f64, f64),
    tol: &Tolerance,
    abs_budget: f64,
    depth: u32,
) -> QuadResult {
    let (value, err, scale) = whole;
    if err <= abs_budget.max(tol.rel * value.abs()) {
        return QuadResult {
            value,
            error: err,
            scale,
            converged: true,
        };
    }
    if depth >= tol.max_depth {
        return QuadResult {
            value,
            error: err,
            scale,
            converged: false,
        };
    }
    let m = 0.5 * (a + b);
    let left = adapt(f, a, m, gk15(f, a, m), tol, 0.5 * abs_budget, depth + 1);
    let right = adapt(f, m, b, gk15(f, m, b), tol, 0.5 * abs_budget, depth + 1);
    QuadResult {
        value: left.value + right.value,
        error: left.error + right.error,
        scale: left.scale + right.scale,
        converged: left.converged && right.converged,
    }
}

/// Adaptive bisection with the 7/15 Gauss–Kronrod pair on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            scale: 0.0,
            converged: true,
        };
    }
    adapt(&f, a, b, gk15(&f, a, b), tol, tol.abs, 0)
}

/// Integrates `f` over `[a, b]` split into panels no wider than
/// `panel_width`, running the adaptive rule on each panel.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panel_width: f64,
    tol: &Tolerance,
) -> QuadResult {
    let n = (((b - a) / panel_width).ceil() as usize).max(1);
    let w = (b - a) / n as f64;
    let per_panel = Tolerance {
        abs: tol.abs / n as f64,
        ..*tol
    };
    let mut out = QuadResult {
        value: 0.0,
        error: 0.0,
        scale: 0.0,
        converged: true,
    };
    // Kahan summation; oscillatory panels cancel heavily.
    let mut comp = 0.0;
    for k in 0..n {
        let lo = a + k as f64 * w;
        let hi = if k + 1 == n { b } else { lo + w };
        let r = integrate(&f, lo, hi, &per_panel);
        let y = r.value - comp;
        let t = out.value + y;
        comp = (t - out.value) - y;
        out.value = t;
        out.error += r.error;
        out.scale += r.value.abs();
        out.converged &= r.converged;
    }
    out
}

/// Smallest multiple of `step` beyond which `envelope` has decayed below
/// `floor` and keeps decreasing.
pub fn decay_cutoff<F: Fn(f64) -> f64>(envelope: F, step: f64, floor: f64) -> f64 {
    let mut w = step;
    for _ in 0..100_000 {
        let here = envelope(w).abs();
        if here * w.max(1.0) < floor && envelope(w + step).abs() <= here {
            return w;
        }
        w += step;
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// `∫_0^Ω f(ω) trig(ωτ) dω`, splitting at the oscillation scale so every
/// panel spans at most half a period.
pub fn fourier_integral<F: Fn(f64) -> f64>(
    f: F,
    tau: f64,
    trig: Trig,
    omega_max: f64,
    natural_width: f64,
    tol: &Tolerance,
) -> QuadResult {
    let width = if tau > 0.0 {
        (std::f64::consts::PI / tau).min(natural_width)
    } else {
        natural_width
    };
    match trig {
        Trig::Cos => integrate_panels(|w| f(w) * (w * tau).cos(), 0.0, omega_max, width, tol),
        Trig::Sin => integrate_panels(|w| f(w) * (w * tau).sin(), 0.0, omega_max, width, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x - x + 2.0, 0.0, 2.0, &Tolerance::default());
        assert!((r.value - (8.0 - 2.0 + 4.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate_panels(|x: f64| (-x * x).exp(), 0.0, 12.0, 1.0, &Tolerance::default());
        assert!((r.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn fourier_of_exponential() {
        // ∫_0^∞ e^{-ω} cos(3ω) dω = 1/(1+9)
        let tol = Tolerance::default();
        let r = fourier_integral(|w: f64| (-w).exp(), 3.0, Trig::Cos, 45.0, 1.0, &tol);
        assert!((r.value - 0.1).abs() < 1e-13, "{}", r.value);
        let s = fourier_integral(|w: f64| (-w).exp(), 3.0, Trig::Sin, 45.0, 1.0, &tol);
        assert!((s.value - 0.3).abs() < 1e-13, "{}", s.value);
    }

    #[test]
    fn cutoff_finds_decay() {
        let w = decay_cutoff(|w: f64| (-w).exp(), 1.0, 1e-18);
        assert!(w >= 41.0 && w <= 46.0, "{w}");
    }
}
