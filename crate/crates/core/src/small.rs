//! Fixed-width fractions for the hot loops.
//!
//! Every operation is checked; `None` means the caller must fall back to
//! [`Rational`]. A reduced `Frac` and the corresponding reduced `Rational`
//! denote the same number, so keys from either path collide identically.

use num_integer::Integer;

use crate::rational::{Line, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Frac {
    n: i128,
    d: i128,
}

impl Frac {
    pub(crate) fn new(n: i128, d: i128) -> Option<Frac> {
        if d == 0 {
            return None;
        }
        let g = n.gcd(&d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        Some(Frac { n, d })
    }

    #[cfg(test)]
    pub(crate) fn int(n: i64) -> Frac {
        Frac { n: n as i128, d: 1 }
    }

    pub(crate) fn from_rational(r: &Rational) -> Option<Frac> {
        let (n, d) = r.to_i64_pair()?;
        Some(Frac { n: n as i128, d: d as i128 })
    }

    /// Like `from_rational` but accepts anything that fits in `i128`.
    pub(crate) fn from_rational_wide(r: &Rational) -> Option<Frac> {
        use num_traits::ToPrimitive;
        Some(Frac { n: r.numer().to_i128()?, d: r.denom().to_i128()? })
    }

    pub(crate) fn numer(self) -> i128 {
        self.n
    }

    pub(crate) fn denom(self) -> i128 {
        self.d
    }

    pub(crate) fn add(self, o: Frac) -> Option<Frac> {
        let g = self.d.gcd(&o.d);
        let n = self
            .n
            .checked_mul(o.d / g)?
            .checked_add(o.n.checked_mul(self.d / g)?)?;
        Frac::new(n, self.d.checked_mul(o.d / g)?)
    }

    pub(crate) fn sub(self, o: Frac) -> Option<Frac> {
        self.add(Frac { n: o.n.checked_neg()?, d: o.d })
    }

    pub(crate) fn mul(self, o: Frac) -> Option<Frac> {
        // cross-reduce first to keep intermediates small
        let g1 = self.n.gcd(&o.d).max(1);
        let g2 = o.n.gcd(&self.d).max(1);
        Frac::new(
            (self.n / g1).checked_mul(o.n / g2)?,
            (self.d / g2).checked_mul(o.d / g1)?,
        )
    }

    pub(crate) fn div(self, o: Frac) -> Option<Frac> {
        if o.n == 0 {
            return None;
        }
        self.mul(Frac { n: o.d, d: o.n })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct SmallLine {
    pub(crate) c: Frac,
    pub(crate) d: Frac,
}

impl SmallLine {
    pub(crate) fn from_line(l: &Line) -> Option<SmallLine> {
        Some(SmallLine {
            c: Frac::from_rational(&l.c)?,
            d: Frac::from_rational(&l.d)?,
        })
    }

    pub(crate) fn quotient(self, o: SmallLine) -> Option<SmallLine> {
        Some(SmallLine {
            c: o.c.div(self.c)?,
            d: o.d.sub(self.d)?.div(self.c)?,
        })
    }

    /// Crossing point of two non-parallel lines.
    pub(crate) fn crossing(self, o: SmallLine) -> Option<(Frac, Frac)> {
        let x = o.d.sub(self.d)?.div(self.c.sub(o.c)?)?;
        let y = self.c.mul(x)?.add(self.d)?;
        Some((x, y))
    }
}

pub(crate) fn all_small(xs: &[Rational]) -> Option<Vec<Frac>> {
    xs.iter().map(Frac::from_rational).collect()
}
