//! Decimal output with a fixed number of significant digits and a chosen
//! rounding direction.

use std::fmt::Write as _;

use super::{ConvergenceTable, EnclosureRow};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    Down,
    Up,
}

/// `x` to [`SIGNIFICANT_DIGITS`] significant digits. `Down` and `Up` round
/// toward −∞ and +∞ against the exact binary value, so the printed number
/// is still a bound in that direction.
pub fn format_sig(x: f64, mode: Rounding) -> String {
    format_sig_digits(x, SIGNIFICANT_DIGITS, mode)
}

pub fn format_sig_digits(x: f64, digits: usize, mode: Rounding) -> String {
    assert!(digits >= 1);
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let negative = x < 0.0;
    let (mut mantissa, mut exp) = match mode {
        Rounding::Nearest => split(&format!("{:.*e}", digits - 1, x.abs())),
        Rounding::Down | Rounding::Up => {
            // every finite double has an exact decimal expansion of at most
            // 767 significant digits
            let (all, exp) = split(&format!("{:.800e}", x.abs()));
            let (head, tail) = all.split_at(digits);
            let mut head = head.as_bytes().to_vec();
            let away = (mode == Rounding::Up) != negative;
            let mut exp = exp;
            if away && tail.bytes().any(|b| b != b'0') && increment(&mut head) {
                exp += 1;
            }
            (String::from_utf8(head).expect("ascii digits"), exp)
        }
    };
    // drop trailing zeros of the significand
    while mantissa.len() > 1 && mantissa.ends_with('0') {
        mantissa.pop();
    }
    if mantissa == "0" {
        exp = 0;
    }
    let body = positional(&mantissa, exp);
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Splits `d.ddde±x` into its digit string and exponent.
fn split(s: &str) -> (String, i32) {
    let (m, e) = s.split_once('e').expect("exponent form");
    (m.replace('.', ""), e.parse().expect("integer exponent"))
}

/// Adds one unit in the last place; returns true on overflow to `10…0`.
fn increment(digits: &mut [u8]) -> bool {
    for d in digits.iter_mut().rev() {
        if *d == b'9' {
            *d = b'0';
        } else {
            *d += 1;
            return false;
        }
    }
    digits[0] = b'1';
    true
}

fn positional(mantissa: &str, exp: i32) -> String {
    let n = mantissa.len() as i32;
    if !(-6..21).contains(&exp) {
        let (first, rest) = mantissa.split_at(1);
        return if rest.is_empty() { format!("{first}e{exp}") } else { format!("{first}.{rest}e{exp}") };
    }
    if exp < 0 {
        format!("0.{}{mantissa}", "0".repeat((-exp - 1) as usize))
    } else if exp + 1 >= n {
        format!("{mantissa}{}", "0".repeat((exp + 1 - n) as usize))
    } else {
        let (int, frac) = mantissa.split_at((exp + 1) as usize);
        format!("{int}.{frac}")
    }
}

pub const CSV_HEADER: &str = "level,h_max,k,lambda_cr,alpha,lower,upper,exact,width";

/// Printed fields of a row, in column order.
pub fn row_fields(r: &EnclosureRow) -> [String; 9] {
    [
        r.level.to_string(),
        format_sig(r.h_max, Rounding::Nearest),
        r.k.to_string(),
        format_sig(r.lambda_cr, Rounding::Nearest),
        format_sig(r.alpha, Rounding::Up),
        format_sig(r.lower, Rounding::Down),
        format_sig(r.upper, Rounding::Up),
        r.exact.map(|e| format_sig(e, Rounding::Nearest)).unwrap_or_default(),
        format_sig(r.width, Rounding::Up),
    ]
}

pub fn write_csv(rows: &[EnclosureRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(s, "{}", row_fields(r).join(","));
    }
    s
}

pub fn write_markdown(rows: &[EnclosureRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "| {} |", CSV_HEADER.replace(',', " | "));
    let _ = writeln!(s, "|{}", "---|".repeat(9));
    for r in rows {
        let _ = writeln!(s, "| {} |", row_fields(r).join(" | "));
    }
    s
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        write_csv(&self.rows)
    }

    pub fn to_markdown(&self) -> String {
        write_markdown(&self.rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest() {
        assert_eq!(format_sig(19.739208802178716, Rounding::Nearest), "19.7392088022");
        assert_eq!(format_sig(0.25, Rounding::Nearest), "0.25");
        assert_eq!(format_sig(-1234.5, Rounding::Nearest), "-1234.5");
        assert_eq!(format_sig(0.0, Rounding::Nearest), "0");
        assert_eq!(format_sig(3e-9, Rounding::Nearest), "3e-9");
    }

    #[test]
    fn directed() {
        let pi = std::f64::consts::PI;
        assert_eq!(format_sig(pi, Rounding::Down), "3.14159265358");
        assert_eq!(format_sig(pi, Rounding::Up), "3.14159265359");
        assert_eq!(format_sig(-pi, Rounding::Down), "-3.14159265359");
        assert_eq!(format_sig(-pi, Rounding::Up), "-3.14159265358");
        // 0.1 is slightly above 1/10 in binary
        assert_eq!(format_sig(0.1, Rounding::Down), "0.1");
        assert_eq!(format_sig(0.1, Rounding::Up), "0.100000000001");
        assert_eq!(format_sig(0.5, Rounding::Up), "0.5");
        assert_eq!(format_sig(999999999999.5, Rounding::Up), "1000000000000");
        assert_eq!(format_sig(999999999999.5, Rounding::Down), "999999999999");
    }

    #[test]
    fn directed_values_bracket() {
        let mut x = 1.0e-3f64;
        for _ in 0..200 {
            x *= 1.37;
            let lo: f64 = format_sig(x, Rounding::Down).parse().unwrap();
            let hi: f64 = format_sig(x, Rounding::Up).parse().unwrap();
            assert!(lo <= x && x <= hi, "{x} {lo} {hi}");
        }
    }

    #[test]
    fn tiny_and_huge() {
        assert_eq!(format_sig(f64::MIN_POSITIVE, Rounding::Up), "2.22507385851e-308");
        assert_eq!(format_sig(5e-324, Rounding::Down), "4.94065645841e-324");
        assert_eq!(format_sig(1e300, Rounding::Nearest), "1e300");
    }
}
