//! Small numerical helpers shared across modules.

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(values);
    acc.value()
}

/// `[x]_+`
#[inline]
pub fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k < 64 {
        // Product form is exact enough and avoids lgamma cancellation for small k.
        let mut acc = CompensatedSum::new();
        for i in 0..k {
            acc.add(((n - i) as f64 / (i + 1) as f64).ln());
        }
        return acc.value();
    }
    libm::lgamma((n + 1) as f64) - libm::lgamma((k + 1) as f64) - libm::lgamma((n - k + 1) as f64)
}

/// Exact binomial coefficient for small arguments, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// Binomial probability mass `C(n, k) p^k (1 - p)^(n - k)` evaluated in log space.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
    ln.exp()
}


/// `ln(e^x − 1)` for `x > 0`, stable for large `x`.
pub fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// Decimal rendering with `digits` significant digits and trailing zeros trimmed.
///
/// Magnitudes below `1e-6` or from `1e21` up switch to `1.5e-9` style exponent
/// notation. Either form parses back with `str::parse::<f64>`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-6..=20).contains(&exp) {
        let mut m = mantissa.to_owned();
        if m.contains('.') {
            while m.ends_with('0') {
                m.pop();
            }
            if m.ends_with('.') {
                m.pop();
            }
        }
        return format!("{m}e{exp}");
    }
    let negative = mantissa.starts_with('-');
    let raw: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(&raw);
    } else {
        let int_len = exp as usize + 1;
        if raw.len() <= int_len {
            out.push_str(&raw);
            for _ in raw.len()..int_len {
                out.push('0');
            }
        } else {
            out.push_str(&raw[..int_len]);
            out.push('.');
            out.push_str(&raw[int_len..]);
        }
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_formatting() {
        assert_eq!(format_significant(0.0, 15), "0");
        assert_eq!(format_significant(1.0, 15), "1");
        assert_eq!(format_significant(-2.5, 15), "-2.5");
        assert_eq!(format_significant(1234.5, 15), "1234.5");
        assert_eq!(format_significant(1e-5, 15), "0.00001");
        assert_eq!(format_significant(1e20, 3), "100000000000000000000");
        assert_eq!(format_significant(1e21, 3), "1e21");
        assert_eq!(format_significant(-1.5e-9, 15), "-1.5e-9");
        assert_eq!(format_significant(1.25e-7, 15).parse::<f64>().unwrap(), 1.25e-7);
        assert_eq!(format_significant(0.000001, 15), "0.000001");
        let x = 0.382_924_922_548_026_1_f64;
        let s = format_significant(x, 15);
        assert_eq!(s, "0.382924922548026");
        for v in [std::f64::consts::PI, 1.0 / 3.0, 7.6e-24, 123456.789] {
            let back: f64 = format_significant(v, 15).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-14);
        }
    }

    #[test]
    fn ln_expm1_is_stable() {
        assert!((ln_expm1(1.0) - (1f64.exp() - 1.0).ln()).abs() < 1e-15);
        assert!((ln_expm1(800.0) - 800.0).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut values = vec![1.0];
        values.extend(std::iter::repeat_n(1e-16, 10_000));
        let naive: f64 = values.iter().sum();
        assert_eq!(naive, 1.0);
        assert!((compensated_sum(values) - (1.0 + 1e-12)).abs() < 1e-18);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(3, 5), 0);
        assert!((ln_binomial(50, 25) - (binomial(50, 25) as f64).ln()).abs() < 1e-12);
        assert!((ln_binomial(200, 100) - 135.753_236_081_278_5).abs() < 1e-9);
        let total: f64 = (0..=10).map(|k| binomial_pmf(10, k, 0.3)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
