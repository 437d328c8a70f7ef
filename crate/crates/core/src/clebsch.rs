//! Clebsch-Gordan coefficients from the Racah sum, evaluated in exact
//! rational arithmetic.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    pub const fn from_int(v: i64) -> Self {
        Self(2 * v)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        Self(self.0.abs())
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = String;

    fn try_from(v: f64) -> std::result::Result<Self, String> {
        let t = 2.0 * v;
        if t.is_finite() && t == t.round() && t.abs() < 1e15 {
            Ok(Self(t as i64))
        } else {
            Err(format!("{v} is not an integer or half-integer"))
        }
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// `(a)!` for a half-integer sum that must be a nonnegative integer.
fn fact(twice: i64) -> Option<BigInt> {
    if twice < 0 || twice % 2 != 0 {
        return None;
    }
    let n = twice / 2;
    Some((1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k)))
}

fn is_valid_projection(j: HalfInt, m: HalfInt) -> bool {
    j.twice() >= 0 && m.abs() <= j && (j.twice() - m.twice()) % 2 == 0
}

/// `<j1 m1; j2 m2 | J M>`, squared exactly and returned with its sign.
pub fn clebsch_gordan_general(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<f64> {
    for (jj, mm) in [(j1, m1), (j2, m2), (j, m)] {
        if !is_valid_projection(jj, mm) {
            return Err(Error::InvalidInput(format!("invalid angular momentum pair j={jj}, m={mm}")));
        }
    }
    if (j1 + j2 + j).twice() % 2 != 0 || j < (j1 - j2).abs() || j > j1 + j2 {
        return Err(Error::InvalidInput(format!("{j1} x {j2} does not contain {j}")));
    }
    if m1 + m2 != m {
        return Ok(0.0);
    }
    let f = |t: HalfInt| fact(t.twice()).expect("triangle and projection checks make this integral");
    let num = BigInt::from(j.twice() + 1)
        * f(j + j1 - j2)
        * f(j - j1 + j2)
        * f(j1 + j2 - j)
        * f(j + m)
        * f(j - m)
        * f(j1 - m1)
        * f(j1 + m1)
        * f(j2 - m2)
        * f(j2 + m2);
    let den = f(j1 + j2 + j + HalfInt::from_int(1));
    let prefactor = BigRational::new(num, den);

    let mut sum = BigRational::zero();
    let mut k = 0i64;
    loop {
        let kk = HalfInt::from_int(k);
        let args = [
            kk,
            j1 + j2 - j - kk,
            j1 - m1 - kk,
            j2 + m2 - kk,
            j - j2 + m1 + kk,
            j - j1 - m2 + kk,
        ];
        if args[1].twice() < 0 || args[2].twice() < 0 || args[3].twice() < 0 {
            break;
        }
        if args.iter().all(|a| a.twice() >= 0) {
            let d = args.iter().map(|a| f(*a)).fold(BigInt::one(), |acc, x| acc * x);
            let term = BigRational::new(BigInt::one(), d);
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        k += 1;
    }
    if sum.is_zero() {
        return Ok(0.0);
    }
    let squared = (prefactor * &sum * &sum).to_f64().expect("finite rational");
    Ok(if sum.is_negative() { -squared.sqrt() } else { squared.sqrt() })
}

/// `C^sigma_m = <F, m; 1, sigma | F, m + sigma>`.
pub fn clebsch_gordan(f: HalfInt, m: HalfInt, sigma: i64) -> Result<f64> {
    if !(-1..=1).contains(&sigma) {
        return Err(Error::InvalidInput(format!("sigma must be -1, 0 or 1, got {sigma}")));
    }
    let s = HalfInt::from_int(sigma);
    if m.abs() > f || (m + s).abs() > f {
        return Err(Error::InvalidInput(format!("projection {m} (+{sigma}) outside F = {f}")));
    }
    clebsch_gordan_general(f, m, HalfInt::from_int(1), s, f, m + s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    /// Closed forms for coupling j with 1 to total J = j, as functions of
    /// the final projection M.
    fn j1_oracle(j: f64, m_final: f64, sigma: i64) -> f64 {
        let jj = j * (j + 1.0);
        match sigma {
            1 => -((j + m_final) * (j - m_final + 1.0) / (2.0 * jj)).sqrt(),
            0 => m_final / jj.sqrt(),
            -1 => ((j - m_final) * (j + m_final + 1.0) / (2.0 * jj)).sqrt(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn stretched_projection_nine_halves() {
        let c = clebsch_gordan(h(9), h(9), 0).unwrap();
        assert!((c - 4.5 / 24.75f64.sqrt()).abs() < 1e-14);
        assert!((c - 0.90453).abs() < 1e-5);
    }

    #[test]
    fn matches_closed_forms_for_all_projections() {
        for twice_f in [1, 2, 3, 5, 9, 15] {
            let f = twice_f as f64 / 2.0;
            for twice_m in (-twice_f..=twice_f).step_by(2) {
                for sigma in -1..=1 {
                    let m_final = twice_m + 2 * sigma;
                    if m_final.abs() > twice_f {
                        assert!(clebsch_gordan(h(twice_f), h(twice_m), sigma).is_err());
                        continue;
                    }
                    let got = clebsch_gordan(h(twice_f), h(twice_m), sigma).unwrap();
                    let want = j1_oracle(f, m_final as f64 / 2.0, sigma);
                    assert!((got - want).abs() < 1e-13, "F={f} 2m={twice_m} s={sigma}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn zero_projection_vanishes_for_integer_f() {
        for f in 1..6 {
            assert_eq!(clebsch_gordan(HalfInt::from_int(f), HalfInt::from_int(0), 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn completeness_over_total_spin() {
        // sum_J <F m; 1 s | J M>^2 = 1 for every (m, s), F = 9/2
        let (f, one) = (h(9), HalfInt::from_int(1));
        for twice_m in (-9..=9).step_by(2) {
            for s in -1..=1 {
                let (m, sig) = (h(twice_m), HalfInt::from_int(s));
                let total: f64 = [7, 9, 11]
                    .iter()
                    .filter(|&&tj| (m + sig).abs().twice() <= tj)
                    .map(|&tj| clebsch_gordan_general(f, m, one, sig, h(tj), m + sig).unwrap().powi(2))
                    .sum();
                assert!((total - 1.0).abs() < 1e-13, "m={m} s={s}: {total}");
            }
        }
    }

    #[test]
    fn orthogonality_over_projections() {
        // sum_{m1+m2=M} <..|J M><..|J' M> = delta_JJ' for 3/2 x 1
        let (j1, j2) = (h(3), HalfInt::from_int(1));
        for tm in (-1..=1).step_by(2) {
            let big_m = h(tm);
            for ja in [1, 3, 5] {
                for jb in [1, 3, 5] {
                    let s: f64 = (-1..=1)
                        .filter_map(|m2| {
                            let m2 = HalfInt::from_int(m2);
                            let m1 = big_m - m2;
                            if m1.abs() > j1 {
                                return None;
                            }
                            let a = clebsch_gordan_general(j1, m1, j2, m2, h(ja), big_m).unwrap();
                            let b = clebsch_gordan_general(j1, m1, j2, m2, h(jb), big_m).unwrap();
                            Some(a * b)
                        })
                        .sum();
                    let want = if ja == jb { 1.0 } else { 0.0 };
                    assert!((s - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn large_spin_has_no_cancellation_loss() {
        // 0 = <j, 0; j, 0 | 1, 0> by symmetry for integer j
        let j = HalfInt::from_int(40);
        let z = HalfInt::from_int(0);
        assert_eq!(clebsch_gordan_general(j, z, j, z, HalfInt::from_int(1), z).unwrap(), 0.0);
        // stretched coupling is exactly one
        let c = clebsch_gordan_general(j, j, j, j, HalfInt::from_int(80), HalfInt::from_int(80)).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_int_parsing() {
        assert_eq!(HalfInt::try_from(4.5).unwrap(), h(9));
        assert!(HalfInt::try_from(0.3).is_err());
        assert_eq!(h(9).to_string(), "9/2");
        assert_eq!(h(4).to_string(), "2");
    }
}
