//! Floating-point abstraction shared by every numeric routine in the crate.
//!
//! All trajectory, recognition, kinematics and optimizer code is written
//! against [`Scalar`] so it runs unchanged on `f32` and `f64`.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Scalar:
    'static
    + Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        // NaN and infinities survive the conversion for both f32 and f64.
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn to_radians_lit(self) -> Self {
        self * Self::lit(std::f64::consts::PI / 180.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `|a - b|` for any ordered numeric type, including unsigned integers.
#[inline]
pub fn abs_diff<T>(a: T, b: T) -> T
where
    T: Copy + PartialOrd + std::ops::Sub<Output = T>,
{
    if a >= b {
        a - b
    } else {
        b - a
    }
}

/// Serde adapters that keep non-finite values representable in JSON.
///
/// Finite values are written as numbers; `+inf`, `-inf` and NaN become the
/// strings `"inf"`, `"-inf"` and `"nan"`.
pub mod serde_float {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    use super::Scalar;

    pub fn serialize<T: Scalar, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        let v = value.as_f64();
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let v = d.deserialize_any(FloatVisitor)?;
        Ok(T::lit(v))
    }

    pub(crate) struct FloatVisitor;

    impl Visitor<'_> for FloatVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
            }
        }
    }

    /// Same encoding for `Vec<T>`.
    pub mod vec {
        use serde::de::{Deserializer, SeqAccess, Visitor};
        use serde::ser::{SerializeSeq, Serializer};

        use crate::scalar::Scalar;

        struct Wrapped<'a, T>(&'a T);

        impl<T: Scalar> serde::Serialize for Wrapped<'_, T> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                super::serialize(self.0, s)
            }
        }

        struct Unwrapped<T>(T);

        impl<'de, T: Scalar> serde::Deserialize<'de> for Unwrapped<T> {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                super::deserialize(d).map(Unwrapped)
            }
        }

        pub fn serialize<T: Scalar, S: Serializer>(values: &[T], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&Wrapped(v))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
            struct SeqVisitor<T>(std::marker::PhantomData<T>);

            impl<'de, T: Scalar> Visitor<'de> for SeqVisitor<T> {
                type Value = Vec<T>;

                fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                    f.write_str("a list of numbers")
                }

                fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<T>, A::Error> {
                    let mut out = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                    while let Some(Unwrapped(v)) = seq.next_element::<Unwrapped<T>>()? {
                        out.push(v);
                    }
                    Ok(out)
                }
            }

            d.deserialize_seq(SeqVisitor(std::marker::PhantomData))
        }
    }
}
