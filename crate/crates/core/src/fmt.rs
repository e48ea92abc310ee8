//! Decimal rendering with a fixed number of significant digits.

/// Render `x` with `digits` significant digits in plain decimal notation,
/// trailing zeros trimmed (`0.5`, `-2.0`, `0.66666666666666663`). Very large
/// or very small magnitudes fall back to exponent notation (`1.5e-7`).
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.0".to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let body: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    if !(-6..(digits as i32).max(16)).contains(&exp) {
        let (lead, rest) = body.split_at(1);
        let rest = rest.trim_end_matches('0');
        return if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        };
    }

    let (int_part, frac_part) = if exp >= 0 {
        let split = exp as usize + 1;
        if body.len() > split {
            (body[..split].to_string(), body[split..].to_string())
        } else {
            (format!("{body:0<split$}"), String::new())
        }
    } else {
        (
            "0".to_string(),
            format!("{}{}", "0".repeat((-exp - 1) as usize), body),
        )
    };
    let frac = frac_part.trim_end_matches('0');
    let frac = if frac.is_empty() { "0" } else { frac };
    format!("{sign}{int_part}.{frac}")
}

#[cfg(test)]
mod tests {
    use super::format_significant as fs;

    #[test]
    fn plain_values() {
        assert_eq!(fs(0.5, 17), "0.5");
        assert_eq!(fs(-0.5, 17), "-0.5");
        assert_eq!(fs(1.0, 17), "1.0");
        assert_eq!(fs(0.0, 17), "0.0");
        assert_eq!(fs(2.0 / 3.0, 17), "0.66666666666666663");
        assert_eq!(fs(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(fs(1234.5, 17), "1234.5");
        assert_eq!(fs(100.0, 17), "100.0");
        assert_eq!(fs(0.001, 17), "0.001");
    }

    #[test]
    fn extreme_magnitudes() {
        assert_eq!(fs(1.5e-7, 17), "1.4999999999999999e-7");
        assert_eq!(fs(1.5e-7, 12), "1.5e-7");
        assert_eq!(fs(-2e20, 17), "-2e20");
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -7.25e-5, 123456.789, 9.99999999999999e15, 3e-300] {
            let s = fs(x, 17);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
