//! Integer arithmetic foundation: segmented sieves, factorization,
//! multiplicative functions, modular inverses, CRT, deterministic primality,
//! and prime windows `[L, 2L]`.
//!
//! All arithmetic is 64-bit with products routed through 128-bit
//! intermediates, so nothing here can silently overflow at the scales the
//! rest of the toolkit drives.

use crate::error::{Error, Result};

/// Hard cap on the sieve size: keeps the tables (5 bytes/entry plus the
/// prime list) within a couple of GiB.
pub const MAX_SIEVE_LIMIT: u64 = 200_000_000;

/// Interval width for short windows `[A, psi()*A]`.
pub fn psi() -> f64 {
    2f64.powf(1.0 / 15.0)
}

/// `psi() - 1`, the relative length of a short window.
pub fn xi() -> f64 {
    psi() - 1.0
}

/// Prime factorization of a positive integer, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Recomputes the product of `p^e`; equals `value` by construction.
    pub fn product(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.factors.last().map(|&(p, _)| p)
    }

    /// All prime divisors are `<= y`.
    pub fn is_smooth(&self, y: f64) -> bool {
        self.largest_prime().map_or(true, |p| p as f64 <= y)
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e - 1) * (p - 1))
    }

    pub fn tau(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(_, e)| acc * (e as u64 + 1))
    }

    pub fn mobius(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Shared sieve tables: smallest prime factor, Möbius values and the prime
/// list up to `limit`. Immutable after construction, safe to share across
/// workers.
pub struct SieveTables {
    limit: u64,
    spf: Vec<u32>,
    mobius: Vec<i8>,
    primes: Vec<u64>,
}

impl SieveTables {
    /// Builds the tables with a segmented sieve (64 KiB blocks), so the hot
    /// working set stays cache-sized while memory is O(limit) entries.
    pub fn build(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Domain(format!("sieve limit {limit} below 2")));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(Error::Resource(format!(
                "sieve limit {limit} exceeds memory budget {MAX_SIEVE_LIMIT}"
            )));
        }
        let n = limit as usize;
        let root = (limit as f64).sqrt() as usize + 1;
        let mut comp = vec![false; root + 1];
        let mut base: Vec<usize> = Vec::new();
        for i in 2..=root {
            if !comp[i] {
                base.push(i);
                let mut j = i * i;
                while j <= root {
                    comp[j] = true;
                    j += i;
                }
            }
        }

        let mut spf = vec![0u32; n + 1];
        let mut mobius = vec![0i8; n + 1];
        spf[1] = 1;
        mobius[1] = 1;
        let mut primes: Vec<u64> = Vec::new();

        const SEG: usize = 1 << 16;
        let mut rem = vec![0u64; SEG];
        let mut mu = vec![0i8; SEG];
        let mut lo = 2usize;
        while lo <= n {
            let hi = (lo + SEG - 1).min(n);
            let len = hi - lo + 1;
            for i in 0..len {
                rem[i] = (lo + i) as u64;
                mu[i] = 1;
            }
            for &p in &base {
                let start = lo.div_ceil(p) * p;
                let mut m = start;
                while m <= hi {
                    let i = m - lo;
                    if spf[m] == 0 {
                        spf[m] = p as u32;
                    }
                    mu[i] = -mu[i];
                    rem[i] /= p as u64;
                    m += p;
                }
                let p2 = p * p;
                if p2 <= hi {
                    let mut m = lo.div_ceil(p2) * p2;
                    while m <= hi {
                        mu[m - lo] = 0;
                        m += p2;
                    }
                }
            }
            for i in 0..len {
                let v = lo + i;
                if rem[i] > 1 {
                    // exactly one prime factor above sqrt(limit) remains
                    if mu[i] != 0 {
                        mu[i] = -mu[i];
                    }
                    if spf[v] == 0 {
                        spf[v] = v as u32;
                    }
                }
                mobius[v] = mu[i];
                if spf[v] == v as u32 {
                    primes.push(v as u64);
                }
            }
            lo = hi + 1;
        }

        Ok(SieveTables {
            limit,
            spf,
            mobius,
            primes,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Möbius value for `n <= limit`.
    pub fn mobius(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.limit, "mobius({n}) outside sieve range");
        self.mobius[n as usize]
    }

    /// Smallest prime factor for `2 <= n <= limit`.
    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        assert!(n >= 2 && n <= self.limit, "spf({n}) outside sieve range");
        self.spf[n as usize] as u64
    }

    /// Primes in the closed real interval `[lo, hi]`.
    pub fn primes_in(&self, lo: f64, hi: f64) -> &[u64] {
        if hi < lo {
            return &[];
        }
        let a = self.primes.partition_point(|&p| (p as f64) < lo);
        let b = self.primes.partition_point(|&p| (p as f64) <= hi);
        &self.primes[a..b]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n <= self.limit {
            n >= 2 && self.spf[n as usize] as u64 == n
        } else {
            is_prime_u64(n)
        }
    }

    fn factor_small(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0u32;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out.sort_unstable();
        out
    }

    /// Factors `n`. Beyond `limit`, falls back to trial division by the
    /// sieved primes and a deterministic 64-bit primality check on the
    /// cofactor.
    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::Domain("factorize(0)".into()));
        }
        if n <= self.limit {
            return Ok(Factorization {
                value: n,
                factors: self.factor_small(n),
            });
        }
        let mut rest = n;
        let mut factors: Vec<(u64, u32)> = Vec::new();
        for &p in &self.primes {
            if p * p > rest {
                break;
            }
            if rest % p == 0 {
                let mut e = 0u32;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
        if rest > 1 {
            if rest <= self.limit {
                for (p, e) in self.factor_small(rest) {
                    factors.push((p, e));
                }
            } else if is_prime_u64(rest) {
                factors.push((rest, 1));
            } else {
                let r = isqrt(rest);
                if r * r == rest && is_prime_u64(r) {
                    factors.push((r, 2));
                } else {
                    return Err(Error::NeedsLargerSieve(format!(
                        "cofactor {rest} of {n} is composite with no sieved prime divisor"
                    )));
                }
            }
        }
        factors.sort_unstable();
        Ok(Factorization { value: n, factors })
    }

    /// `n` is divisible by no prime square; `1` qualifies.
    pub fn is_squarefree(&self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(Error::Domain("is_squarefree(0)".into()));
        }
        if n <= self.limit {
            return Ok(self.mobius[n as usize] != 0);
        }
        Ok(self.factorize(n)?.is_squarefree())
    }

    /// All prime divisors of `n` are `<= y`; `1` is `y`-smooth for any `y >= 1`.
    pub fn is_smooth(&self, n: u64, y: f64) -> Result<bool> {
        if n == 0 {
            return Err(Error::Domain("is_smooth(0)".into()));
        }
        Ok(self.factorize(n)?.is_smooth(y))
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        Ok(self.factorize(n)?.euler_phi())
    }

    pub fn tau(&self, n: u64) -> Result<u64> {
        Ok(self.factorize(n)?.tau())
    }

    /// The prime window `[L, 2L]` with the multiples of `excluded` removed.
    pub fn prime_window(&self, l: f64, excluded: u64) -> Result<PrimeWindow> {
        if !(l >= 2.0) {
            return Err(Error::Domain(format!("prime window needs L >= 2, got {l}")));
        }
        if 2.0 * l > self.limit as f64 {
            return Err(Error::NeedsLargerSieve(format!(
                "prime window [{l}, {}] beyond sieve limit {}",
                2.0 * l,
                self.limit
            )));
        }
        let members: Vec<u64> = self
            .primes_in(l, 2.0 * l)
            .iter()
            .copied()
            .filter(|&p| gcd(p, excluded) == 1)
            .collect();
        Ok(PrimeWindow {
            l,
            excluded,
            members,
        })
    }
}

/// The set of primes `l` in `[L, 2L]` coprime to a fixed modulus.
#[derive(Debug, Clone)]
pub struct PrimeWindow {
    pub l: f64,
    pub excluded: u64,
    pub members: Vec<u64>,
}

impl PrimeWindow {
    /// Cardinality `K` of the window.
    pub fn k(&self) -> usize {
        self.members.len()
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r.checked_mul(r).map_or(true, |s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |s| s <= n) {
        r += 1;
    }
    r
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin over the witness set that covers all 64-bit
/// integers; no probabilistic failures in any oracle built on top of it.
pub fn is_prime_u64(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Multiplicative inverse of `k` modulo `m`, normalized to `[1, m-1]`.
pub fn mod_inverse(k: i64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::Domain(format!("modulus {m} below 2")));
    }
    let r = k.rem_euclid(m as i64) as u64;
    let (g, x, _) = ext_gcd(r as i128, m as i128);
    if g != 1 {
        return Err(Error::Domain(format!("gcd({k}, {m}) = {g} != 1")));
    }
    Ok(x.rem_euclid(m as i128) as u64)
}

/// Solves a system of congruences, merging pairwise; moduli need not be
/// coprime as long as the residues are consistent.
pub fn crt_solve(constraints: &[(i64, u64)]) -> Result<(u64, u64)> {
    if constraints.is_empty() {
        return Err(Error::Domain("empty congruence system".into()));
    }
    let mut r = constraints[0].0.rem_euclid(constraints[0].1 as i64) as u128;
    let mut m = constraints[0].1 as u128;
    if m == 0 {
        return Err(Error::Domain("zero modulus".into()));
    }
    for &(r2, m2) in &constraints[1..] {
        if m2 == 0 {
            return Err(Error::Domain("zero modulus".into()));
        }
        let m2 = m2 as u128;
        let r2 = (r2.rem_euclid(m2 as i64)) as u128;
        let g = gcd(m as u64, m2 as u64) as u128;
        let diff = r2 as i128 - r as i128;
        if diff.rem_euclid(g as i128) != 0 {
            return Err(Error::Domain(format!(
                "inconsistent congruences: {r} mod {m} vs {r2} mod {m2}"
            )));
        }
        let lcm = m
            .checked_mul(m2 / g)
            .filter(|&l| l <= u64::MAX as u128)
            .ok_or_else(|| Error::Resource("combined modulus exceeds 64 bits".into()))?;
        let step = m2 / g;
        let t = ((diff / g as i128).rem_euclid(step as i128)) as u128;
        let inv = mod_inverse((m / g % step) as i64, step as u64)? as u128;
        let k = t * inv % step;
        r += m * k;
        m = lcm;
        r %= m;
    }
    Ok((r as u64, m as u64))
}
