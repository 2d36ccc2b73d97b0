//! Number formatting shared by reports.

/// Format with 9 significant digits, like C's `%.9g`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        return format!(
            "{}e{}{:02}",
            trim(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (8 - exp).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(16.0), "16");
        assert_eq!(sig9(0.25), "0.25");
        assert_eq!(sig9(-2.5), "-2.5");
        assert_eq!(sig9(21.816132285699), "21.8161323");
        assert_eq!(sig9(0.0366701113434), "0.0366701113");
        assert_eq!(sig9(5e-6), "5e-06");
        assert_eq!(sig9(1.0e-5), "1e-05");
        assert_eq!(sig9(123456789.0), "123456789");
        assert_eq!(sig9(1234567890.0), "1.23456789e+09");
        assert_eq!(sig9(9.9999999999), "10");
        assert_eq!(sig9(0.0001), "0.0001");
    }
}
