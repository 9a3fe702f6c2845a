//! Parameter tuples `A(l,rho,k1,k2)` and `B(l,rho,k1,k2)`.
//!
//! `A` is the projectivization `S^(2l+1) x_S1 P(C_rho^k1 + C^k2)`, `B` the sphere
//! bundle `S^(2l+1) x_S1 S(C_rho^k1 + R^(2k2+1))`, both over `CP^l`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::A => "A",
            Family::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptorError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid descriptor: {0}")]
    Constraint(&'static str),
}

/// A validated member of the family. Ordering is lexicographic in
/// `(family, l, rho, k1, k2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ManifoldDescriptor {
    family: Family,
    ell: u32,
    rho: i64,
    k1: u32,
    k2: u32,
}

impl ManifoldDescriptor {
    pub fn new(
        family: Family,
        ell: i64,
        rho: i64,
        k1: i64,
        k2: i64,
    ) -> Result<Self, DescriptorError> {
        if ell < 1 {
            return Err(DescriptorError::Constraint("l >= 1"));
        }
        if k1 < 1 {
            return Err(DescriptorError::Constraint("k1 >= 1"));
        }
        match family {
            Family::A if k2 < 1 => {
                return Err(DescriptorError::Constraint("family A requires k2 >= 1"))
            }
            Family::B if k2 < 0 => {
                return Err(DescriptorError::Constraint("family B requires k2 >= 0"))
            }
            _ => {}
        }
        let small = |v: i64| {
            u32::try_from(v).map_err(|_| DescriptorError::Constraint("parameter too large"))
        };
        Ok(ManifoldDescriptor {
            family,
            ell: small(ell)?,
            rho,
            k1: small(k1)?,
            k2: small(k2)?,
        })
    }

    pub fn a(ell: i64, rho: i64, k1: i64, k2: i64) -> Result<Self, DescriptorError> {
        Self::new(Family::A, ell, rho, k1, k2)
    }

    pub fn b(ell: i64, rho: i64, k1: i64, k2: i64) -> Result<Self, DescriptorError> {
        Self::new(Family::B, ell, rho, k1, k2)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn rho(&self) -> i64 {
        self.rho
    }

    pub fn k1(&self) -> u32 {
        self.k1
    }

    pub fn k2(&self) -> u32 {
        self.k2
    }

    /// `k1 + k2`.
    pub fn fiber_sum(&self) -> u32 {
        self.k1 + self.k2
    }

    /// Same descriptor with `rho` negated.
    pub fn with_rho(&self, rho: i64) -> Self {
        ManifoldDescriptor { rho, ..*self }
    }
}

impl fmt::Display for ManifoldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({},{},{},{})",
            self.family, self.ell, self.rho, self.k1, self.k2
        )
    }
}

impl FromStr for ManifoldDescriptor {
    type Err = DescriptorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_descriptor(s)
    }
}

impl Serialize for ManifoldDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ManifoldDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `('A'|'B') '(' int ',' int ',' int ',' int ')'`; spaces are allowed
/// between tokens. Columns in errors are 1-based.
pub fn parse_descriptor(text: &str) -> Result<ManifoldDescriptor, DescriptorError> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let syntax = |pos: usize, msg: &str| DescriptorError::Syntax {
        pos: pos + 1,
        msg: msg.to_string(),
    };
    let skip = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos] == b' ' {
            *pos += 1;
        }
    };

    skip(&mut pos);
    let family = match bytes.get(pos) {
        Some(b'A') => Family::A,
        Some(b'B') => Family::B,
        _ => return Err(syntax(pos, "expected family `A` or `B`")),
    };
    pos += 1;
    skip(&mut pos);
    if bytes.get(pos) != Some(&b'(') {
        return Err(syntax(pos, "expected `(`"));
    }
    pos += 1;

    let mut values = [0i64; 4];
    for (i, slot) in values.iter_mut().enumerate() {
        skip(&mut pos);
        let start = pos;
        if matches!(bytes.get(pos), Some(b'-') | Some(b'+')) {
            pos += 1;
        }
        let digits = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if digits == pos {
            return Err(syntax(pos, "expected an integer"));
        }
        *slot = text[start..pos]
            .parse()
            .map_err(|_| syntax(start, "integer out of range"))?;
        skip(&mut pos);
        let sep = if i == 3 { b')' } else { b',' };
        if bytes.get(pos) != Some(&sep) {
            return Err(syntax(
                pos,
                if i == 3 {
                    "expected `)`"
                } else {
                    "expected `,`"
                },
            ));
        }
        pos += 1;
    }
    skip(&mut pos);
    if pos != bytes.len() {
        return Err(syntax(pos, "trailing input"));
    }
    let [ell, rho, k1, k2] = values;
    ManifoldDescriptor::new(family, ell, rho, k1, k2)
}
