//! JSON encoding of exact values: rationals as {"num", "den"}, regions as
//! {"lo", "hi"} intervals, {"k", "a"} dyadic cubes, or {"box": [...]}.

use crate::error::{Error, Result};
use crate::geometry::{as_dyadic_cube, DyadicCube, RatBox};
use crate::scalar::{Rat, Scalar};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

fn int_to_json(n: &BigInt) -> Result<Value> {
    n.to_i64()
        .map(Value::from)
        .ok_or_else(|| Error::Serialization(format!("integer {n} exceeds i64")))
}

pub fn rat_to_json(x: &Rat) -> Result<Value> {
    Ok(json!({ "num": int_to_json(x.numer())?, "den": int_to_json(x.denom())? }))
}

pub fn rat_from_json(v: &Value) -> Result<Rat> {
    if let Some(n) = v.as_i64() {
        return Ok(Rat::from(BigInt::from(n)));
    }
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Serialization(format!("expected rational, got {v}")))?;
    let num = obj
        .get("num")
        .and_then(Value::as_i64)
        .ok_or_else(|| Error::Serialization("rational missing integer `num`".into()))?;
    let den = obj
        .get("den")
        .and_then(Value::as_i64)
        .ok_or_else(|| Error::Serialization("rational missing integer `den`".into()))?;
    if den == 0 {
        return Err(Error::Serialization("zero denominator".into()));
    }
    Ok(Rat::new(BigInt::from(num), BigInt::from(den)))
}

pub fn scalar_to_json(s: &Scalar) -> Result<Value> {
    if s.is_real() {
        rat_to_json(&s.re)
    } else {
        Ok(json!({ "re": rat_to_json(&s.re)?, "im": rat_to_json(&s.im)? }))
    }
}

pub fn scalar_from_json(v: &Value) -> Result<Scalar> {
    if let Some(obj) = v.as_object() {
        if obj.contains_key("re") || obj.contains_key("im") {
            let re = obj
                .get("re")
                .map(rat_from_json)
                .transpose()?
                .unwrap_or_else(Rat::zero);
            let im = obj
                .get("im")
                .map(rat_from_json)
                .transpose()?
                .unwrap_or_else(Rat::zero);
            return Ok(Scalar::new(re, im));
        }
    }
    Ok(Scalar::real(rat_from_json(v)?))
}

pub fn region_to_json(b: &RatBox) -> Result<Value> {
    if b.dim() == 1 {
        let (lo, hi) = &b.sides()[0];
        return Ok(json!({ "lo": rat_to_json(lo)?, "hi": rat_to_json(hi)? }));
    }
    if let Some(q) = as_dyadic_cube(b) {
        return Ok(json!({ "k": q.k, "a": q.corner }));
    }
    let sides = b
        .sides()
        .iter()
        .map(|(lo, hi)| Ok(json!({ "lo": rat_to_json(lo)?, "hi": rat_to_json(hi)? })))
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "box": sides }))
}

pub fn region_from_json(v: &Value) -> Result<RatBox> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Serialization(format!("expected region object, got {v}")))?;
    if obj.contains_key("k") {
        let k = obj
            .get("k")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Serialization("cube missing integer `k`".into()))?;
        let a = obj
            .get("a")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Serialization("cube missing corner array `a`".into()))?;
        let corner = a
            .iter()
            .map(|x| {
                x.as_i64()
                    .ok_or_else(|| Error::Serialization("corner entry not an integer".into()))
            })
            .collect::<Result<Vec<i64>>>()?;
        if corner.is_empty() {
            return Err(Error::Serialization("empty cube corner".into()));
        }
        return Ok(DyadicCube::new(k as i32, corner).to_box());
    }
    if obj.contains_key("box") {
        let arr = obj
            .get("box")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Serialization("`box` is not an array".into()))?;
        let sides = arr
            .iter()
            .map(|s| {
                let so = s
                    .as_object()
                    .ok_or_else(|| Error::Serialization("box side is not an object".into()))?;
                let lo = rat_from_json(
                    so.get("lo")
                        .ok_or_else(|| Error::Serialization("box side missing `lo`".into()))?,
                )?;
                let hi = rat_from_json(
                    so.get("hi")
                        .ok_or_else(|| Error::Serialization("box side missing `hi`".into()))?,
                )?;
                Ok((lo, hi))
            })
            .collect::<Result<Vec<_>>>()?;
        return RatBox::new(sides);
    }
    let lo = rat_from_json(
        obj.get("lo")
            .ok_or_else(|| Error::Serialization("region missing `lo`".into()))?,
    )?;
    let hi = rat_from_json(
        obj.get("hi")
            .ok_or_else(|| Error::Serialization("region missing `hi`".into()))?,
    )?;
    RatBox::interval(lo, hi)
}
