//! Exact modular and multiplicative number theory: two-adic splits, p-parts,
//! unit groups, and the divisor decomposition attached to a 5-valent
//! canonical pair `(n, c)`.
//!
//! Everything here works on plain integers with enough headroom for orders
//! up to `2^31`; products such as `2(c^2 - 1)` are taken in 128 bits where
//! they could otherwise overflow.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("expected a positive integer")]
    ZeroArgument,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("connector {c} out of range for order {n}: need n even and 1 < c < n/2")]
    ConnectorOutOfRange { n: u64, c: u64 },
}

/// Factorization `m = 2^t * odd` with `odd` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoAdicSplit {
    pub t: u32,
    pub odd: u64,
}

impl TwoAdicSplit {
    /// Reconstructs the original integer `2^t * odd`.
    pub fn value(self) -> u64 {
        self.odd << self.t
    }
}

/// Splits a positive integer into its power-of-two exponent and odd part.
pub fn two_adic_split(m: u64) -> Result<TwoAdicSplit, ArithError> {
    if m == 0 {
        return Err(ArithError::ZeroArgument);
    }
    let t = m.trailing_zeros();
    Ok(TwoAdicSplit { t, odd: m >> t })
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Trial-division primality test, adequate for desk-scale moduli.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Largest power of the prime `p` dividing `m`.
pub fn p_part(m: u64, p: u64) -> Result<u64, ArithError> {
    if m == 0 {
        return Err(ArithError::ZeroArgument);
    }
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    let mut part = 1u64;
    let mut rest = m;
    while rest % p == 0 {
        part *= p;
        rest /= p;
    }
    Ok(part)
}

/// Residues in `1..n` coprime to `n`, ascending. Empty for `n = 1`.
///
/// Computed by a gcd scan; the moduli in play stay desk-scale.
pub fn units(n: u64) -> Vec<u64> {
    (1..n).filter(|&q| gcd(q, n) == 1).collect()
}

/// Positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// The divisor decomposition of a canonical pair `(n, c)`:
///
/// ```text
/// n = 2^t * ell,    c + 1 = 2^alpha * ell1,    c - 1 = 2^beta * ell2,
/// d_i = gcd(ell, ell_i),    ell = d_i * n_i,    ell_i = d_i * m_i.
/// ```
///
/// `d1` and `d2` are always coprime: an odd common divisor of `ell1` and
/// `ell2` would divide both `c + 1` and `c - 1`, hence `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecompositionWitness {
    pub n: u64,
    pub c: u64,
    pub t: u32,
    pub ell: u64,
    pub alpha: u32,
    pub ell1: u64,
    pub beta: u32,
    pub ell2: u64,
    pub d1: u64,
    pub d2: u64,
    pub n1: u64,
    pub n2: u64,
    pub m1: u64,
    pub m2: u64,
}

/// Computes the full decomposition for an even order `n` and a connector
/// `1 < c < n/2`.
pub fn decomposition_witness(n: u64, c: u64) -> Result<DecompositionWitness, ArithError> {
    if n % 2 != 0 || c <= 1 || 2 * c >= n {
        return Err(ArithError::ConnectorOutOfRange { n, c });
    }
    let TwoAdicSplit { t, odd: ell } = two_adic_split(n)?;
    let TwoAdicSplit { t: alpha, odd: ell1 } = two_adic_split(c + 1)?;
    let TwoAdicSplit { t: beta, odd: ell2 } = two_adic_split(c - 1)?;
    let d1 = gcd(ell, ell1);
    let d2 = gcd(ell, ell2);
    Ok(DecompositionWitness {
        n,
        c,
        t,
        ell,
        alpha,
        ell1,
        beta,
        ell2,
        d1,
        d2,
        n1: ell / d1,
        n2: ell / d2,
        m1: ell1 / d1,
        m2: ell2 / d2,
    })
}
