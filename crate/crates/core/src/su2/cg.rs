use std::fmt;
use std::ops::Mul;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Signed square root of a non-negative rational, `sign · sqrt(radicand)`.
///
/// Products and squares stay exact; conversion to `f64` happens only when a
/// matrix is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CgValue {
    sign: i8,
    radicand: Ratio<u64>,
}

impl CgValue {
    pub fn zero() -> Self {
        CgValue {
            sign: 0,
            radicand: Ratio::from_integer(0),
        }
    }

    pub fn one() -> Self {
        CgValue {
            sign: 1,
            radicand: Ratio::from_integer(1),
        }
    }

    /// `sign · sqrt(num / den)`; the radicand is reduced to lowest terms.
    pub fn new(sign: i8, num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        if num == 0 || sign == 0 {
            return Self::zero();
        }
        CgValue {
            sign: sign.signum(),
            radicand: Ratio::new(num, den),
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn radicand(&self) -> Ratio<u64> {
        self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The exact square, a non-negative rational.
    pub fn squared(&self) -> Ratio<u64> {
        if self.sign == 0 {
            Ratio::from_integer(0)
        } else {
            self.radicand
        }
    }

    pub fn negate(self) -> Self {
        CgValue {
            sign: -self.sign,
            radicand: self.radicand,
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let r = (*self.radicand.numer() as f64 / *self.radicand.denom() as f64).sqrt();
        f64::from(self.sign) * r
    }
}

impl Mul for CgValue {
    type Output = CgValue;

    fn mul(self, rhs: CgValue) -> CgValue {
        if self.sign == 0 || rhs.sign == 0 {
            return CgValue::zero();
        }
        CgValue {
            sign: self.sign * rhs.sign,
            radicand: self.radicand * rhs.radicand,
        }
    }
}

impl fmt::Display for CgValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => {
                let sign = if s < 0 { "-" } else { "" };
                if *self.radicand.denom() == 1 {
                    write!(f, "{sign}sqrt({})", self.radicand.numer())
                } else {
                    write!(
                        f,
                        "{sign}sqrt({}/{})",
                        self.radicand.numer(),
                        self.radicand.denom()
                    )
                }
            }
        }
    }
}

/// Projection of the added spin-½.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfSpin {
    /// `m = -½`, the qubit state `|0⟩`.
    Down,
    /// `m = +½`, the qubit state `|1⟩`.
    Up,
}

impl HalfSpin {
    pub fn two_m(self) -> i32 {
        match self {
            HalfSpin::Down => -1,
            HalfSpin::Up => 1,
        }
    }

    pub fn qubit(self) -> usize {
        match self {
            HalfSpin::Down => 0,
            HalfSpin::Up => 1,
        }
    }

    pub const BOTH: [HalfSpin; 2] = [HalfSpin::Down, HalfSpin::Up];
}

/// `⟨j1, m1; ½, ±½ | j, m1 ± ½⟩` in the Condon–Shortley convention, all
/// angular momenta doubled.
///
/// Returns the zero value when `|m1 ± ½| > j`. Fails unless `j = j1 ± ½`
/// and `m1` is a valid projection of `j1`.
pub fn cg_half(two_j1: u32, two_m1: i32, spin: HalfSpin, two_j: u32) -> Result<CgValue> {
    let j1 = two_j1 as i64;
    let m1 = two_m1 as i64;
    if m1.abs() > j1 || (j1 - m1) % 2 != 0 {
        return Err(Error::domain(format!(
            "2m1 = {two_m1} is not a projection of 2j1 = {two_j1}"
        )));
    }
    let den = 2 * (two_j1 as u64 + 1);
    let two_m = m1 + spin.two_m() as i64;
    if two_m.unsigned_abs() > two_j as u64 {
        // still validate the coupling
        if two_j != two_j1 + 1 && two_j + 1 != two_j1 {
            return Err(Error::domain(format!(
                "2j = {two_j} cannot couple 2j1 = {two_j1} with spin 1/2"
            )));
        }
        return Ok(CgValue::zero());
    }
    let value = if two_j == two_j1 + 1 {
        match spin {
            HalfSpin::Up => CgValue::new(1, (j1 + m1 + 2) as u64, den),
            HalfSpin::Down => CgValue::new(1, (j1 - m1 + 2) as u64, den),
        }
    } else if two_j + 1 == two_j1 {
        match spin {
            HalfSpin::Up => CgValue::new(-1, (j1 - m1) as u64, den),
            HalfSpin::Down => CgValue::new(1, (j1 + m1) as u64, den),
        }
    } else {
        return Err(Error::domain(format!(
            "2j = {two_j} cannot couple 2j1 = {two_j1} with spin 1/2"
        )));
    };
    Ok(value)
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// General Clebsch–Gordan coefficient `⟨j1 m1 j2 m2 | j m⟩` by the Racah
/// formula (Condon–Shortley phases), doubled arguments.
pub fn cg_general(two_j1: u32, two_m1: i32, two_j2: u32, two_m2: i32, two_j: u32, two_m: i32) -> f64 {
    let (j1, j2, j) = (two_j1 as i64, two_j2 as i64, two_j as i64);
    let (m1, m2, m) = (two_m1 as i64, two_m2 as i64, two_m as i64);
    if m1 + m2 != m
        || m1.abs() > j1
        || m2.abs() > j2
        || m.abs() > j
        || j > j1 + j2
        || j < (j1 - j2).abs()
        || (j1 + j2 + j) % 2 != 0
        || (j1 + m1) % 2 != 0
        || (j2 + m2) % 2 != 0
        || (j + m) % 2 != 0
    {
        return 0.0;
    }
    // every combination below is an integer once halved
    let h = |x: i64| x / 2;
    let pre = ((j + 1) as f64 * factorial(h(j + j1 - j2)) * factorial(h(j - j1 + j2))
        * factorial(h(j1 + j2 - j))
        / factorial(h(j1 + j2 + j) + 1))
        .sqrt();
    let norm = (factorial(h(j + m))
        * factorial(h(j - m))
        * factorial(h(j1 - m1))
        * factorial(h(j1 + m1))
        * factorial(h(j2 - m2))
        * factorial(h(j2 + m2)))
    .sqrt();
    let mut sum = 0.0;
    for k in 0..=h(j1 + j2 - j) {
        let terms = [
            h(j1 + j2 - j) - k,
            h(j1 - m1) - k,
            h(j2 + m2) - k,
            h(j - j2 + m1) + k,
            h(j - j1 - m2) + k,
        ];
        if terms.iter().any(|&t| t < 0) {
            continue;
        }
        let denom: f64 = factorial(k) * terms.iter().map(|&t| factorial(t)).product::<f64>();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    pre * norm * sum
}

/// Checks `cg_half` against the general routine and the reordering identity
/// `⟨j1,m1;½,±½|j,m⟩ = (-1)^{j1+½-j} ⟨½,±½;j1,m1|j,m⟩`.
pub fn cg_symmetry_check(two_j1: u32, two_m1: i32, spin: HalfSpin, two_j: u32) -> bool {
    let Ok(value) = cg_half(two_j1, two_m1, spin, two_j) else {
        return false;
    };
    let two_m = two_m1 + spin.two_m();
    let direct = cg_general(two_j1, two_m1, 1, spin.two_m(), two_j, two_m);
    let swapped = cg_general(1, spin.two_m(), two_j1, two_m1, two_j, two_m);
    let exponent = (two_j1 as i64 + 1 - two_j as i64) / 2;
    let phase = if exponent % 2 == 0 { 1.0 } else { -1.0 };
    let v = value.to_f64();
    (v - direct).abs() < 1e-12 && (v - phase * swapped).abs() < 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretched_state() {
        assert_eq!(cg_half(1, 1, HalfSpin::Up, 2).unwrap(), CgValue::one());
    }

    #[test]
    fn two_spin_coefficients() {
        let s = 0.5_f64.sqrt();
        let triplet = cg_half(1, 1, HalfSpin::Down, 2).unwrap();
        assert_eq!(triplet, CgValue::new(1, 1, 2));
        assert!((triplet.to_f64() - s).abs() < 1e-15);
        let a = cg_half(1, 1, HalfSpin::Down, 0).unwrap();
        let b = cg_half(1, -1, HalfSpin::Up, 0).unwrap();
        assert!((a.to_f64() - s).abs() < 1e-15);
        assert!((b.to_f64() + s).abs() < 1e-15);
    }

    #[test]
    fn invalid_pairing_is_domain_error() {
        assert!(matches!(cg_half(1, 1, HalfSpin::Up, 3), Err(Error::Domain(_))));
        assert!(matches!(cg_half(2, 1, HalfSpin::Up, 3), Err(Error::Domain(_))));
        assert!(matches!(cg_half(2, 4, HalfSpin::Up, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn vanishing_coefficient() {
        // m = j1 + ½ = 3/2 is outside j = ½
        assert!(cg_half(2, 2, HalfSpin::Up, 1).unwrap().is_zero());
    }

    #[test]
    fn exact_arithmetic() {
        let a = CgValue::new(-1, 2, 6);
        assert_eq!(a.radicand(), Ratio::new(1, 3));
        let b = a * a;
        assert_eq!(b.sign(), 1);
        assert_eq!(b.radicand(), Ratio::new(1, 9));
        assert_eq!(a.squared(), Ratio::new(1, 3));
        assert_eq!(format!("{a}"), "-sqrt(1/3)");
    }

    #[test]
    fn symmetry_identity_examples() {
        assert!(cg_symmetry_check(1, 1, HalfSpin::Up, 2));
        assert!(cg_symmetry_check(1, 1, HalfSpin::Down, 0));
    }

    #[test]
    fn symmetry_identity_exhaustive() {
        for two_j1 in 0..=7u32 {
            for two_m1 in (-(two_j1 as i32)..=two_j1 as i32).step_by(2) {
                for spin in HalfSpin::BOTH {
                    for two_j in [two_j1 + 1, two_j1.wrapping_sub(1)] {
                        if two_j > two_j1 + 1 {
                            continue;
                        }
                        assert!(
                            cg_symmetry_check(two_j1, two_m1, spin, two_j),
                            "j1={two_j1}/2 m1={two_m1}/2 {spin:?} j={two_j}/2"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rows_are_normalized_exactly() {
        for two_j1 in 0..=11u32 {
            for two_m1 in (-(two_j1 as i32)..=two_j1 as i32).step_by(2) {
                for spin in HalfSpin::BOTH {
                    let mut total = Ratio::from_integer(0u64);
                    for two_j in [two_j1 + 1, two_j1.wrapping_sub(1)] {
                        if two_j > two_j1 + 1 {
                            continue;
                        }
                        total += cg_half(two_j1, two_m1, spin, two_j).unwrap().squared();
                    }
                    assert_eq!(total, Ratio::from_integer(1));
                }
            }
        }
    }
}
