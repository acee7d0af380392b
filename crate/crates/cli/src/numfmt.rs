//! Significant-digit number formatting.

/// `x` with exactly `digits` significant digits, fixed notation for
/// exponents in `-5..digits`, scientific otherwise. Trailing zeros are kept.
pub fn significant(x: f64, digits: usize) -> String {
    render(x, digits, false)
}

/// Like [`significant`] but trailing zeros (and a bare decimal point) are
/// dropped, in the manner of C's `%g`.
pub fn general(x: f64, digits: usize) -> String {
    render(x, digits, true)
}

fn render(x: f64, digits: usize, trim: bool) -> String {
    assert!(digits >= 1);
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if trim || digits == 1 {
            "0".into()
        } else {
            format!("0.{}", "0".repeat(digits - 1))
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = if trim {
            trim_zeros(mantissa)
        } else {
            mantissa.to_string()
        };
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let fixed = format!("{:.*}", decimals, x);
    if trim {
        trim_zeros(&fixed)
    } else {
        fixed
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
