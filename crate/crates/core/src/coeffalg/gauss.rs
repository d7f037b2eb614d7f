//! Gaussian rationals, the ground field ℚ(i).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An element `re + im·i` with rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Gauss {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gauss {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Gauss { re, im }
    }

    pub fn zero() -> Self {
        Gauss::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Gauss::int(1)
    }

    pub fn i() -> Self {
        Gauss::new(BigRational::zero(), BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Gauss::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Gauss::new(BigRational::new(BigInt::from(n), BigInt::from(d)), BigRational::zero())
    }

    pub fn complex(re: i64, im: i64) -> Self {
        Gauss::new(BigRational::from_integer(BigInt::from(re)), BigRational::from_integer(BigInt::from(im)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Gauss::new(r, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True when both parts are integers.
    pub fn is_integral(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    pub fn conj(&self) -> Self {
        Gauss::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero Gaussian rational");
        Gauss::new(&self.re / &n, -(&self.im / &n))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Gauss::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Sign convention used by printers: the first nonzero part decides.
    pub fn is_negative(&self) -> bool {
        if !self.re.is_zero() {
            self.re.is_negative()
        } else {
            self.im.is_negative()
        }
    }

    /// If `self = r·other` for a rational `r`, returns `r`.
    pub fn rational_multiple_of(&self, other: &Gauss) -> Option<BigRational> {
        if other.is_zero() {
            return None;
        }
        if &self.re * &other.im != &self.im * &other.re {
            return None;
        }
        if !other.re.is_zero() {
            Some(&self.re / &other.re)
        } else {
            Some(&self.im / &other.im)
        }
    }

    /// Plain rendering used everywhere: `3`, `1/2`, `i`, `2*i`, `1-i`, `1/2+(1/3)*i`.
    pub fn render(&self) -> String {
        let re = &self.re;
        let im = &self.im;
        if im.is_zero() {
            return rat_str(re);
        }
        let imag = imag_str(im);
        if re.is_zero() {
            return imag;
        }
        if im.is_negative() {
            format!("{}-{}", rat_str(re), imag_str(&-im.clone()))
        } else {
            format!("{}+{}", rat_str(re), imag)
        }
    }

    /// Rendering safe to place in a product: parenthesized unless atomic.
    pub fn render_factor(&self) -> String {
        let s = self.render();
        if self.is_atomic() {
            s
        } else {
            format!("({})", s)
        }
    }

    /// Nonnegative integers, `i` and `n*i` print without parentheses.
    pub fn is_atomic(&self) -> bool {
        if self.im.is_zero() {
            self.re.is_integer() && !self.re.is_negative()
        } else {
            self.re.is_zero() && self.im.is_integer() && self.im.is_positive()
        }
    }

    pub fn latex(&self) -> String {
        let re = &self.re;
        let im = &self.im;
        let rl = |r: &BigRational| {
            if r.is_integer() {
                r.numer().to_string()
            } else {
                let sign = if r.is_negative() { "-" } else { "" };
                format!("{}\\frac{{{}}}{{{}}}", sign, r.numer().abs(), r.denom())
            }
        };
        let il = |r: &BigRational| {
            if r.is_one() {
                "i".to_string()
            } else if (-r.clone()).is_one() {
                "-i".to_string()
            } else {
                format!("{}i", rl(r))
            }
        };
        if im.is_zero() {
            rl(re)
        } else if re.is_zero() {
            il(im)
        } else if im.is_negative() {
            format!("{}-{}", rl(re), il(&-im.clone()))
        } else {
            format!("{}+{}", rl(re), il(im))
        }
    }
}

fn rat_str(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn imag_str(r: &BigRational) -> String {
    if r.is_one() {
        "i".to_string()
    } else if (-r.clone()).is_one() {
        "-i".to_string()
    } else if r.is_integer() {
        format!("{}*i", r.numer())
    } else {
        let sign = if r.is_negative() { "-" } else { "" };
        format!("{}({}/{})*i", sign, r.numer().abs(), r.denom())
    }
}

impl Ord for Gauss {
    fn cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

impl PartialOrd for Gauss {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl<'a> Add<&'a Gauss> for &'a Gauss {
    type Output = Gauss;
    fn add(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a Gauss> for &'a Gauss {
    type Output = Gauss;
    fn sub(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a Gauss> for &'a Gauss {
    type Output = Gauss;
    fn mul(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl<'a> Div<&'a Gauss> for &'a Gauss {
    type Output = Gauss;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &Gauss) -> Gauss {
        self * &o.inv()
    }
}

impl Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-self.re.clone(), -self.im.clone())
    }
}

impl Neg for Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Gauss> for Gauss {
            type Output = Gauss;
            fn $m(self, o: Gauss) -> Gauss {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

/// Rational gcd: the largest `g` with every input an integer multiple of `g`.
pub fn rational_gcd(values: &[BigRational]) -> BigRational {
    use num_integer::Integer;
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for v in values.iter().filter(|v| !v.is_zero()) {
        num = num.gcd(v.numer());
        den = den.lcm(v.denom());
    }
    if num.is_zero() {
        BigRational::one()
    } else {
        BigRational::new(num, den)
    }
}
