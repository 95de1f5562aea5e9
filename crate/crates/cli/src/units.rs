//! Physical quantities written as `"<number> <unit>"` strings.
//!
//! Values are stored in SI and emitted as `"<17 significant digits> <SI unit>"`
//! so that emitted configs reparse to identical values.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub trait Kind {
    const NAME: &'static str;
    const SI: &'static str;
    const EXAMPLE: &'static str;
    /// Accepted suffixes and their factor to SI.
    const UNITS: &'static [(&'static str, f64)];
}

macro_rules! kind {
    ($ty:ident, $name:literal, $si:literal, $example:literal, [$(($unit:literal, $factor:expr)),+ $(,)?]) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $ty;
        impl Kind for $ty {
            const NAME: &'static str = $name;
            const SI: &'static str = $si;
            const EXAMPLE: &'static str = $example;
            const UNITS: &'static [(&'static str, f64)] = &[$(($unit, $factor)),+];
        }
    };
}

kind!(Length, "length", "m", "100 nm", [("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("µm", 1e-6), ("μm", 1e-6), ("nm", 1e-9), ("pm", 1e-12)]);
kind!(Area, "area", "m^2", "1e4 nm^2", [("m^2", 1.0), ("mm^2", 1e-6), ("um^2", 1e-12), ("µm^2", 1e-12), ("nm^2", 1e-18)]);
kind!(Time, "time", "s", "0.1 ps", [
    ("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("µs", 1e-6), ("μs", 1e-6), ("ns", 1e-9), ("ps", 1e-12), ("fs", 1e-15),
    ("min", 60.0), ("h", 3600.0), ("d", 86_400.0), ("yr", rsn_core::constants::YEAR),
]);
kind!(Pressure, "stress", "Pa", "6.5 MPa", [("Pa", 1.0), ("kPa", 1e3), ("MPa", 1e6), ("GPa", 1e9)]);
kind!(Magnetization, "magnetization", "A/m", "1e6 A/m", [("A/m", 1.0), ("kA/m", 1e3), ("MA/m", 1e6)]);
// A quoted bare number is a plain fraction; it is also the exact emitted form.
kind!(Strain, "magnetostriction", "", "-35 ppm", [("ppm", 1e-6), ("", 1.0)]);
kind!(Temperature, "temperature", "K", "300 K", [("K", 1.0)]);
kind!(Piezo, "piezoelectric coefficient", "C/N", "2500 pC/N", [("C/N", 1.0), ("pC/N", 1e-12), ("m/V", 1.0), ("pm/V", 1e-12)]);

/// A value of kind `K`, held in SI units.
pub struct Quantity<K> {
    pub si: f64,
    kind: PhantomData<K>,
}

impl<K> Quantity<K> {
    pub fn new(si: f64) -> Self {
        Quantity { si, kind: PhantomData }
    }
}

impl<K> Clone for Quantity<K> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<K> Copy for Quantity<K> {}

impl<K> PartialEq for Quantity<K> {
    fn eq(&self, other: &Self) -> bool {
        self.si == other.si
    }
}

impl<K: Kind> fmt::Debug for Quantity<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl<K: Kind> Quantity<K> {
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let mut units: Vec<&(&str, f64)> = K::UNITS.iter().collect();
        units.sort_by_key(|(u, _)| std::cmp::Reverse(u.len()));
        for (unit, factor) in units {
            if let Some(number) = text.strip_suffix(unit) {
                let number = number.trim_end();
                if number.is_empty() {
                    continue;
                }
                return match scale(number, *factor) {
                    Some(v) if v.is_finite() => Ok(Quantity::new(v)),
                    _ => Err(format!("`{number}` is not a finite number in {} `{text}`", K::NAME)),
                };
            }
        }
        Err(format!(
            "{} `{text}` needs one of the units {} (e.g. \"{}\")",
            K::NAME,
            unit_list::<K>(),
            K::EXAMPLE
        ))
    }

    /// Value in the SI unit with 17 significant digits.
    pub fn to_text(&self) -> String {
        let (unit, factor) = K::UNITS.iter().find(|(u, _)| *u == K::SI).copied().unwrap_or((K::SI, 1.0));
        format!("{} {unit}", rsn_core::fmt_f64(self.si / factor)).trim_end().to_string()
    }
}

/// `number · factor`, shifting the decimal exponent for power-of-ten factors
/// so that "100 nm" reads exactly as `100e-9`.
fn scale(number: &str, factor: f64) -> Option<f64> {
    let value: f64 = number.parse().ok()?;
    let k = factor.log10().round() as i32;
    if format!("1e{k}").parse::<f64>().ok() != Some(factor) {
        return Some(value * factor);
    }
    let (mantissa, exponent) = match number.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (number, 0),
    };
    format!("{mantissa}e{}", exponent + k).parse().ok()
}

pub fn unit_list<K: Kind>() -> String {
    K::UNITS
        .iter()
        .map(|(u, _)| if u.is_empty() { "none (quoted plain fraction)" } else { u })
        .collect::<Vec<_>>()
        .join(", ")
}

impl<K: Kind> Serialize for Quantity<K> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

struct QuantityVisitor<K>(PhantomData<K>);

impl<K: Kind> QuantityVisitor<K> {
    fn unitless<E: de::Error>(&self, shown: String) -> E {
        E::custom(format!(
            "{} {shown} has no unit; write it as a string with one of {} (e.g. \"{}\")",
            K::NAME,
            unit_list::<K>(),
            K::EXAMPLE
        ))
    }
}

impl<K: Kind> Visitor<'_> for QuantityVisitor<K> {
    type Value = Quantity<K>;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a {} string such as \"{}\"", K::NAME, K::EXAMPLE)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        Quantity::parse(v).map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        Err(self.unitless(v.to_string()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        Err(self.unitless(v.to_string()))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
        Err(self.unitless(v.to_string()))
    }
}

impl<'de, K: Kind> Deserialize<'de> for Quantity<K> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(QuantityVisitor(PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_space() {
        assert_eq!(Quantity::<Length>::parse("100 nm").unwrap().si, 100e-9);
        assert_eq!(Quantity::<Length>::parse("100nm").unwrap().si, 100e-9);
        assert_eq!(Quantity::<Length>::parse("1.5e2 nm").unwrap().si, 150e-9);
        assert_eq!(Quantity::<Length>::parse(" 2 m ").unwrap().si, 2.0);
        assert_eq!(Quantity::<Time>::parse("0.1 ps").unwrap().si, 0.1e-12);
        assert_eq!(Quantity::<Time>::parse("10 yr").unwrap().si, 10.0 * rsn_core::constants::YEAR);
        assert_eq!(Quantity::<Strain>::parse("-35 ppm").unwrap().si, -35e-6);
        assert_eq!(Quantity::<Strain>::parse("-3.5e-5").unwrap().si, -3.5e-5);
        assert_eq!(Quantity::<Pressure>::parse("6.5 MPa").unwrap().si, 6.5e6);
        assert_eq!(Quantity::<Magnetization>::parse("1e6 A/m").unwrap().si, 1e6);
        assert_eq!(Quantity::<Area>::parse("1e4 nm^2").unwrap().si, 1e-14);
    }

    #[test]
    fn longest_suffix_wins() {
        assert_eq!(Quantity::<Time>::parse("3 ms").unwrap().si, 3e-3);
        assert_eq!(Quantity::<Time>::parse("3 s").unwrap().si, 3.0);
        assert_eq!(Quantity::<Length>::parse("5 mm").unwrap().si, 5e-3);
    }

    #[test]
    fn rejects_missing_or_wrong_units() {
        assert!(Quantity::<Length>::parse("100").is_err());
        assert!(Quantity::<Length>::parse("nm").is_err());
        assert!(Quantity::<Length>::parse("100 ns").is_err());
        assert!(Quantity::<Length>::parse("inf nm").is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        for text in ["99 nm", "0.1 ps", "209 GPa", "1 us", "10 yr", "2500 pC/N"] {
            let a = Quantity::<Length>::parse(text)
                .map(|q| q.si)
                .or_else(|_| Quantity::<Time>::parse(text).map(|q| q.si))
                .or_else(|_| Quantity::<Strain>::parse(text).map(|q| q.si))
                .or_else(|_| Quantity::<Pressure>::parse(text).map(|q| q.si))
                .or_else(|_| Quantity::<Piezo>::parse(text).map(|q| q.si))
                .unwrap();
            let len = Quantity::<Length>::new(a);
            assert_eq!(Quantity::<Length>::parse(&len.to_text()).unwrap().si, a);
        }
        let strain = Quantity::<Strain>::parse("-35 ppm").unwrap();
        assert_eq!(Quantity::<Strain>::parse(&strain.to_text()).unwrap(), strain);
    }
}
