//! Evaluation of meta-expressions and meta-conditions.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::ast::{BinOp, CmpOp, ConstDecl, ConstValue, Label, LabelPart, MetaCond, MetaExpr};

/// Exponents are capped so a typo cannot allocate gigabytes.
const MAX_EXPONENT: u32 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetaError {
    #[error("unbound meta-variable or constant {0:?}")]
    Unbound(String),
    #[error("{0:?} is an array and needs an index")]
    NotScalar(String),
    #[error("{0:?} is not an array")]
    NotArray(String),
    #[error("index {index} out of range for {name:?} of length {len}")]
    IndexOutOfRange { name: String, index: BigInt, len: usize },
    #[error("exponent {0} is negative or too large")]
    BadExponent(BigInt),
    #[error("bit({value}, {index}) needs a nonnegative value and index")]
    BadBit { value: BigInt, index: BigInt },
    #[error("constant {0:?} is declared twice")]
    DuplicateConst(String),
}

#[derive(Debug, Clone)]
enum Bound {
    Scalar(BigInt),
    Array(Vec<BigInt>),
}

/// Constant table plus a stack of loop-variable bindings.
#[derive(Debug, Clone, Default)]
pub struct Env {
    consts: HashMap<String, Bound>,
    vars: Vec<(String, BigInt)>,
}

impl Env {
    /// Evaluate declarations in order; later constants may refer to earlier ones.
    pub fn from_consts(decls: &[ConstDecl]) -> Result<Self, MetaError> {
        let mut env = Env::default();
        for d in decls {
            if env.consts.contains_key(&d.name) {
                return Err(MetaError::DuplicateConst(d.name.clone()));
            }
            let b = match &d.value {
                ConstValue::Scalar(e) => Bound::Scalar(env.eval(e)?),
                ConstValue::Array(es) => {
                    Bound::Array(es.iter().map(|e| env.eval(e)).collect::<Result<_, _>>()?)
                }
            };
            env.consts.insert(d.name.clone(), b);
        }
        Ok(env)
    }

    pub fn push(&mut self, var: &str, value: BigInt) {
        self.vars.push((var.to_string(), value));
    }

    pub fn pop(&mut self) {
        self.vars.pop();
    }

    fn lookup(&self, name: &str) -> Result<&Bound, MetaError> {
        self.consts
            .get(name)
            .ok_or_else(|| MetaError::Unbound(name.to_string()))
    }

    pub fn eval(&self, e: &MetaExpr) -> Result<BigInt, MetaError> {
        Ok(match e {
            MetaExpr::Num(n) => n.clone(),
            MetaExpr::Var(name) => {
                if let Some((_, v)) = self.vars.iter().rev().find(|(n, _)| n == name) {
                    return Ok(v.clone());
                }
                match self.lookup(name)? {
                    Bound::Scalar(v) => v.clone(),
                    Bound::Array(_) => return Err(MetaError::NotScalar(name.clone())),
                }
            }
            MetaExpr::Index(name, idx) => {
                let i = self.eval(idx)?;
                match self.lookup(name)? {
                    Bound::Array(xs) => i
                        .to_usize()
                        .and_then(|i| xs.get(i))
                        .cloned()
                        .ok_or_else(|| MetaError::IndexOutOfRange {
                            name: name.clone(),
                            index: i.clone(),
                            len: xs.len(),
                        })?,
                    Bound::Scalar(_) => return Err(MetaError::NotArray(name.clone())),
                }
            }
            MetaExpr::Neg(a) => -self.eval(a)?,
            MetaExpr::Bin(op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Pow => {
                        let e = b
                            .to_u32()
                            .filter(|&e| e <= MAX_EXPONENT)
                            .ok_or(MetaError::BadExponent(b))?;
                        num_traits::pow(a, e as usize)
                    }
                }
            }
            MetaExpr::Bit(v, i) => {
                let (v, i) = (self.eval(v)?, self.eval(i)?);
                if v.is_negative() || i.is_negative() {
                    return Err(MetaError::BadBit { value: v, index: i });
                }
                let set = i.to_u64().is_some_and(|i| v.bit(i));
                if set {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            }
        })
    }

    pub fn holds(&self, c: &MetaCond) -> Result<bool, MetaError> {
        Ok(match c {
            MetaCond::Bool(b) => *b,
            MetaCond::Cmp(op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                }
            }
            MetaCond::And(a, b) => self.holds(a)? && self.holds(b)?,
            MetaCond::Or(a, b) => self.holds(a)? || self.holds(b)?,
            MetaCond::Not(a) => !self.holds(a)?,
        })
    }

    pub fn label(&self, l: &Label) -> Result<String, MetaError> {
        let mut s = String::new();
        for p in &l.parts {
            match p {
                LabelPart::Text(t) => s.push_str(t),
                LabelPart::Expr(e) => s.push_str(&self.eval(e)?.to_string()),
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_bits() {
        let env = Env::from_consts(&[
            ConstDecl {
                name: "N".into(),
                value: ConstValue::Scalar(MetaExpr::num(6)),
            },
            ConstDecl {
                name: "A".into(),
                value: ConstValue::Array(vec![MetaExpr::num(5), MetaExpr::var("N")]),
            },
        ])
        .unwrap();
        let two_pow = MetaExpr::bin(BinOp::Pow, MetaExpr::num(2), MetaExpr::num(10));
        assert_eq!(env.eval(&two_pow).unwrap(), BigInt::from(1024));
        let idx = MetaExpr::Index("A".into(), Box::new(MetaExpr::num(1)));
        assert_eq!(env.eval(&idx).unwrap(), BigInt::from(6));
        let bit0 = MetaExpr::Bit(Box::new(MetaExpr::var("N")), Box::new(MetaExpr::num(0)));
        let bit1 = MetaExpr::Bit(Box::new(MetaExpr::var("N")), Box::new(MetaExpr::num(1)));
        assert_eq!(env.eval(&bit0).unwrap(), BigInt::zero());
        assert_eq!(env.eval(&bit1).unwrap(), BigInt::one());
        assert!(matches!(
            env.eval(&MetaExpr::var("q")),
            Err(MetaError::Unbound(_))
        ));
        let oob = MetaExpr::Index("A".into(), Box::new(MetaExpr::num(2)));
        assert!(matches!(env.eval(&oob), Err(MetaError::IndexOutOfRange { .. })));
    }

    #[test]
    fn loop_variables_shadow_constants() {
        let mut env = Env::from_consts(&[ConstDecl {
            name: "i".into(),
            value: ConstValue::Scalar(MetaExpr::num(1)),
        }])
        .unwrap();
        env.push("i", BigInt::from(7));
        assert_eq!(env.eval(&MetaExpr::var("i")).unwrap(), BigInt::from(7));
        env.pop();
        assert_eq!(env.eval(&MetaExpr::var("i")).unwrap(), BigInt::from(1));
    }
}
