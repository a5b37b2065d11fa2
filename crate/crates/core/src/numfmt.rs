//! Number formatting shared by state rendering, the scheme text format and CLI output.

/// Formats `x` with `digits` significant digits, trimming trailing zeros.
///
/// Magnitudes in `[1e-6, 1e12)` are written positionally, everything else in
/// `1.5e-7` style. Negative zero prints as `0`.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-6..12).contains(&exp) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    // Round once via the scientific form, then lay the digits out positionally.
    let negative = mantissa.starts_with('-');
    let raw: String = mantissa.chars().filter(char::is_ascii_digit).collect();
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
    trim_zeros(&out)
}

/// Rounds `x` to `digits` significant digits (value of [`sig`] read back).
pub fn round_sig(x: f64, digits: usize) -> f64 {
    sig(x, digits).parse().unwrap_or(x)
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".to_string()
        } else {
            t.to_string()
        }
    } else {
        s.to_string()
    }
}
