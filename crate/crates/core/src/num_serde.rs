//! JSON has no infinities; non-finite floats are written as the strings `"inf"`, `"-inf"`, `"nan"`.

use serde::{Deserialize, Deserializer, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

fn parse<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Num(x) => Ok(x),
        Repr::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!("expected a number, got `{other}`"))),
        },
    }
}

fn write<S: Serializer>(v: f64, s: S) -> Result<S::Ok, S::Error> {
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

pub mod lenient {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        write(*v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        parse(Repr::deserialize(d)?)
    }
}

pub mod lenient_option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => write(*x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(parse::<D::Error>).transpose()
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Probe {
        #[serde(with = "super::lenient")]
        a: f64,
        #[serde(with = "super::lenient_option")]
        b: Option<f64>,
    }

    #[test]
    fn non_finite_values_survive_json() {
        for (a, b) in [
            (f64::INFINITY, Some(f64::NEG_INFINITY)),
            (0.1 + 0.2, None),
            (-3.5e-300, Some(f64::INFINITY)),
        ] {
            let p = Probe { a, b };
            let s = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<Probe>(&s).unwrap(), p);
        }
        assert_eq!(
            serde_json::to_string(&Probe { a: f64::INFINITY, b: None }).unwrap(),
            r#"{"a":"inf","b":null}"#
        );
        assert!(serde_json::from_str::<Probe>(r#"{"a":"big","b":null}"#).is_err());
    }
}
