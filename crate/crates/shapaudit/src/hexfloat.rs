//! C99-style hexadecimal float literals (`0x1.8p+1`), exact in both directions.

pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    let mut frac = format!("{mantissa:013x}");
    while frac.ends_with('0') {
        frac.pop();
    }
    let dot = if frac.is_empty() { String::new() } else { format!(".{frac}") };
    format!("{sign}0x{lead}{dot}p{exp:+}")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid hexadecimal float `{0}`")]
pub struct ParseHexFloatError(pub String);

/// Parses the output of [`format`]. Only normalised forms with at most 52
/// fraction bits are accepted, so every value maps to exactly one double.
pub fn parse(s: &str) -> Result<f64, ParseHexFloatError> {
    let err = || ParseHexFloatError(s.to_string());
    match s {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let (negative, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x").ok_or_else(err)?;
    let (mant, exp) = rest.split_once('p').ok_or_else(err)?;
    let exp: i32 = exp.parse().map_err(|_| err())?;
    let (lead, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if frac.len() > 13 || !frac.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(err());
    }
    let frac_bits = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(&format!("{frac:0<13}"), 16).map_err(|_| err())?
    };
    let sign = u64::from(negative) << 63;
    let bits = match lead {
        "0" if frac_bits == 0 && exp == 0 => sign,
        "0" if exp == -1022 => sign | frac_bits,
        "1" if (-1022..=1023).contains(&exp) => sign | (((exp + 1023) as u64) << 52) | frac_bits,
        _ => return Err(err()),
    };
    Ok(f64::from_bits(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(3.0), "0x1.8p+1");
        assert_eq!(format(-0.1), "-0x1.999999999999ap-4");
        assert_eq!(format(0.0), "0x0p+0");
        assert_eq!(format(-0.0), "-0x0p+0");
        assert_eq!(format(f64::MIN_POSITIVE / 2.0), "0x0.8p-1022");
        assert_eq!(parse("0x1.8p+1").unwrap(), 3.0);
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1.5", "0x", "0x2p+0", "0x1.fffffffffffff0p+0", "0x1pq"] {
            assert!(parse(s).is_err(), "{s}");
        }
    }

    proptest! {
        #[test]
        fn round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            let back = parse(&format(x)).unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), bits);
            }
        }
    }
}
