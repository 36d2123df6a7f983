//! Exponential integrals in exponentially scaled form.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^{x} E₁(x)` for `x > 0`.
pub fn scaled_e1(x: f64) -> f64 {
    assert!(x > 0.0, "scaled_e1 requires x > 0");
    if x <= 1.0 {
        // E₁(x) = −γ − ln x − Σ (−x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        return x.exp() * (-EULER_GAMMA - x.ln() - sum);
    }
    // Continued fraction, modified Lentz.
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `e^{−x} Ei(x)` for `x > 0`.
pub fn scaled_ei(x: f64) -> f64 {
    assert!(x > 0.0, "scaled_ei requires x > 0");
    if x < 40.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..400 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add < 1e-17 * sum {
                break;
            }
        }
        return (-x).exp() * (EULER_GAMMA + x.ln() + sum);
    }
    // Asymptotic series, truncated at its smallest term.
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..200 {
        let next = term * k as f64 / x;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 {
            break;
        }
    }
    sum / x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_reference_values() {
        // E₁(1) = 0.219383934395520, E₁(5) = 0.001148295591275
        assert!((scaled_e1(1.0) * (-1.0f64).exp() - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((scaled_e1(5.0) * (-5.0f64).exp() - 0.001_148_295_591_275_3).abs() < 1e-15);
        assert!((scaled_e1(0.5) * (-0.5f64).exp() - 0.559_773_594_776_160_8).abs() < 1e-14);
    }

    #[test]
    fn ei_reference_values() {
        // Ei(1) = 1.895117816355937, Ei(10) = 2492.228976241877
        assert!((scaled_ei(1.0) * 1.0f64.exp() - 1.895_117_816_355_937).abs() < 1e-13);
        assert!((scaled_ei(10.0) * 10.0f64.exp() / 2492.228_976_241_877 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn ei_branches_agree_at_switch() {
        let h = 1e-9;
        let below = scaled_ei(40.0 - h);
        let above = scaled_ei(40.0);
        // d/dx [e^{−x}Ei(x)] = 1/x − e^{−x}Ei(x)
        let slope = 1.0 / 40.0 - above;
        assert!((below + h * slope - above).abs() < 1e-14 * above, "{below} {above}");
    }
}
