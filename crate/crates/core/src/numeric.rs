//! Overflow-safe scalar helpers shared by the likelihood and fitting code.

/// `log(1 + exp(x))` without overflow for large `x`.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + exp(-x))`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Log-sum-exp with a running maximum, consuming an iterator once.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for v in values {
        if v == f64::NEG_INFINITY {
            continue;
        }
        if v <= max {
            acc += (v - max).exp();
        } else {
            acc = acc * (max - v).exp() + 1.0;
            max = v;
        }
    }
    if max == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        max + acc.ln()
    }
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
