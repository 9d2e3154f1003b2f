//! JSON output with every float written to 17 significant digits.
//!
//! Values are rendered like C's `%.17g` (trailing zeros stripped) and always
//! carry a decimal point or exponent, so integral floats stay floats. Reading
//! them back with `serde_json` (float_roundtrip) recovers the exact bits.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Formats `x` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };

    if !(-5..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let tail = if tail.is_empty() { "0" } else { tail };
        return format!("{sign}{head}.{tail}e{exp}");
    }
    let n = digits.len() as i32;
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    } else if exp + 1 >= n {
        let zeros = "0".repeat((exp + 1 - n) as usize);
        format!("{sign}{digits}{zeros}.0")
    } else {
        let (int, frac) = digits.split_at((exp + 1) as usize);
        format!("{sign}{int}.{frac}")
    }
}

fn write_float<W: ?Sized + io::Write>(w: &mut W, x: f64) -> io::Result<()> {
    w.write_all(format_f64(x).as_bytes())
}

/// Compact formatter with 17-significant-digit floats.
#[derive(Default)]
pub struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write_float(w, value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write_float(w, value as f64)
    }
}

/// Pretty-printing variant of [`Fixed17`].
pub struct Pretty17<'a>(PrettyFormatter<'a>);

impl Default for Pretty17<'_> {
    fn default() -> Self {
        Pretty17(PrettyFormatter::new())
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Pretty17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write_float(w, value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write_float(w, value as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Serializes `value` as compact JSON.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Serializes `value` as indented JSON.
pub fn to_string_pretty<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Pretty17::default());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_values_keep_decimal_point() {
        assert_eq!(format_f64(1.0), "1.0");
        assert_eq!(format_f64(-250.0), "-250.0");
        assert_eq!(format_f64(0.0), "0.0");
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(std::f64::consts::PI), "3.1415926535897931");
        assert_eq!(format_f64(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_f64(1.5e300), "1.5000000000000001e300");
        assert_eq!(format_f64(1e300), "1.0000000000000001e300");
        assert_eq!(format_f64(2f64.powi(100)), "1.2676506002282294e30");
        assert_eq!(format_f64(1e17), "1.0e17");
        assert_eq!(format_f64(1e16), "10000000000000000.0");
    }

    #[test]
    fn roundtrip_bits() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-12, 6.02214076e23, f64::MIN_POSITIVE, 5e-324, f64::MAX] {
            let s = format_f64(x);
            let y: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{s}");
        }
    }

    #[test]
    fn struct_output() {
        #[derive(Serialize)]
        struct R {
            method: &'static str,
            value: f64,
        }
        let s = to_string(&R { method: "exact", value: 1.0 }).unwrap();
        assert_eq!(s, r#"{"method":"exact","value":1.0}"#);
    }
}
