//! Exact counting of congruence solutions: products of window primes times
//! an interval variable, square-free-restricted variants via Möbius
//! inclusion-exclusion, reciprocal-square tuples, and structured products.
//!
//! Every counter comes in two routes: a fast path built on canonical-residue
//! arithmetic, and a naive enumeration oracle that checks the congruence
//! literally. The oracles exist so that equality can be asserted, not just
//! eyeballed.

use std::collections::HashMap;

use crate::arith::{gcd, mod_inverse, mul_mod, SieveTables};
use crate::error::{Error, Result};
use crate::report::CountReport;

fn require_prime(p: u64, tables: &SieveTables) -> Result<()> {
    if !tables.is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    Ok(())
}

fn require_unit(a: i64, p: u64) -> Result<u64> {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Err(Error::Domain(format!("residue {a} not coprime to {p}")));
    }
    Ok(r)
}

/// Canonical solutions `u` of `l1*l2*u = a (mod p)` for every ordered window
/// pair, i.e. the multiset `{a * l1bar * l2bar mod p}`.
fn canonical_u_values(p: u64, a: u64, l: f64, tables: &SieveTables) -> Result<Vec<u64>> {
    let window = tables.prime_window(l, p)?;
    let inverses: Vec<u64> = window
        .members
        .iter()
        .map(|&m| mod_inverse(m as i64, p))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(inverses.len() * inverses.len());
    for &i1 in &inverses {
        for &i2 in &inverses {
            out.push(mul_mod(a, mul_mod(i1, i2, p), p));
        }
    }
    Ok(out)
}

/// Count of `(l1, l2, u)` with both primes in the window `[L, 2L]` and
/// `1 <= u <= h` solving `l1*l2*u = a (mod p)`.
pub fn count_n(p: u64, a: i64, l: f64, h: f64, tables: &SieveTables) -> Result<CountReport> {
    require_prime(p, tables)?;
    let a = require_unit(a, p)?;
    if !(h >= 1.0) || h > p as f64 {
        return Err(Error::Domain(format!("count needs 1 <= h <= p, got h={h}")));
    }
    let uh = h.floor() as u64;
    let window = tables.prime_window(l, p)?;
    let k = window.k() as f64;
    let exact = canonical_u_values(p, a, l, tables)?
        .into_iter()
        .filter(|&u| u <= uh)
        .count() as u64;
    let main = k * k * h / p as f64;
    let bound = l.powf(1.5) * (p as f64).powf(0.125);
    Ok(CountReport::new(
        "N",
        &[
            ("p", p as f64),
            ("a", a as f64),
            ("L", l),
            ("h", h),
            ("K", k),
        ],
        exact,
        main,
        Some(bound),
    ))
}

/// Literal triple-loop oracle for `count_n`.
pub fn count_n_naive(p: u64, a: i64, l: f64, h: f64, tables: &SieveTables) -> Result<u64> {
    require_prime(p, tables)?;
    let a = require_unit(a, p)?;
    let uh = h.floor() as u64;
    let window = tables.prime_window(l, p)?;
    let mut count = 0u64;
    for &l1 in &window.members {
        for &l2 in &window.members {
            let base = mul_mod(l1 % p, l2 % p, p);
            for u in 1..=uh {
                if mul_mod(base, u % p, p) == a {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// The square-free-restricted count, by direct filter and by the Möbius
/// inclusion-exclusion over `d <= sqrt(h)`; the two routes must agree.
#[derive(Debug, Clone)]
pub struct SquarefreeCount {
    pub report: CountReport,
    pub direct: u64,
    pub inclusion_exclusion: i64,
    pub agree: bool,
}

pub fn count_n_squarefree(
    p: u64,
    a: i64,
    l: f64,
    h: f64,
    tables: &SieveTables,
) -> Result<SquarefreeCount> {
    require_prime(p, tables)?;
    let a_red = require_unit(a, p)?;
    if !(h >= 1.0) || h > p as f64 {
        return Err(Error::Domain(format!("count needs 1 <= h <= p, got h={h}")));
    }
    let uh = h.floor() as u64;

    let direct = canonical_u_values(p, a_red, l, tables)?
        .into_iter()
        .filter(|&u| u <= uh && tables.mobius(u) != 0)
        .count() as u64;

    // sum over d <= sqrt(h) of mu(d) * N(a * dbar^2, h/d^2)
    let mut incl: i64 = 0;
    let mut d = 1u64;
    while (d * d) as f64 <= h {
        let mu = tables.mobius(d);
        if mu != 0 {
            let d_inv_sq = {
                let inv = mod_inverse((d % p) as i64, p)?;
                mul_mod(inv, inv, p)
            };
            let a_d = mul_mod(a_red, d_inv_sq, p);
            let h_d = h / (d * d) as f64;
            let n = count_n(p, a_d as i64, l, h_d, tables)?.exact_count;
            incl += mu as i64 * n as i64;
        }
        d += 1;
    }

    let window = tables.prime_window(l, p)?;
    let k = window.k() as f64;
    let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let main = k * k * h / (zeta2 * p as f64);
    let bound = l.powf(1.5) * (p as f64).powf(0.125) + h.sqrt();
    let report = CountReport::new(
        "N_sharp",
        &[
            ("p", p as f64),
            ("a", a_red as f64),
            ("L", l),
            ("h", h),
            ("K", k),
        ],
        direct,
        main,
        Some(bound),
    );
    Ok(SquarefreeCount {
        report,
        direct,
        inclusion_exclusion: incl,
        agree: incl >= 0 && incl as u64 == direct,
    })
}

/// Count of `(l1, l2, v)` with `l1*l2^2*v = a (mod p)`, `1 <= v <= h`.
pub fn count_q(p: u64, a: i64, l: f64, h: f64, tables: &SieveTables) -> Result<CountReport> {
    require_prime(p, tables)?;
    let a = require_unit(a, p)?;
    if !(h >= 1.0) || h > p as f64 {
        return Err(Error::Domain(format!("count needs 1 <= h <= p, got h={h}")));
    }
    let vh = h.floor() as u64;
    let window = tables.prime_window(l, p)?;
    let k = window.k() as f64;
    let mut exact = 0u64;
    for &l1 in &window.members {
        for &l2 in &window.members {
            let i1 = mod_inverse(l1 as i64, p)?;
            let i2 = mod_inverse(l2 as i64, p)?;
            let v0 = mul_mod(a, mul_mod(i1, mul_mod(i2, i2, p), p), p);
            if v0 >= 1 && v0 <= vh {
                exact += 1;
            }
        }
    }
    let main = k * k * h / p as f64;
    // bound applies when 2Lh <= p
    let bound = if 2.0 * l * h <= p as f64 {
        Some((l * h / p as f64 + 1.0) * l)
    } else {
        None
    };
    let mut rep = CountReport::new(
        "Q",
        &[
            ("p", p as f64),
            ("a", a as f64),
            ("L", l),
            ("h", h),
            ("K", k),
        ],
        exact,
        main,
        bound,
    );
    if bound.is_none() {
        rep = rep.with_flag("bound-needs-2Lh<=p");
    }
    Ok(rep)
}

pub fn count_q_naive(p: u64, a: i64, l: f64, h: f64, tables: &SieveTables) -> Result<u64> {
    require_prime(p, tables)?;
    let a = require_unit(a, p)?;
    let vh = h.floor() as u64;
    let window = tables.prime_window(l, p)?;
    let mut count = 0u64;
    for &l1 in &window.members {
        for &l2 in &window.members {
            let base = mul_mod(l1 % p, mul_mod(l2 % p, l2 % p, p), p);
            for v in 1..=vh {
                if mul_mod(base, v % p, p) == a {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Count of `(u, v)` with `u^2 v = a (mod p)`, `1 <= u <= U`, `1 <= v <= V`.
pub fn count_t(p: u64, a: i64, u_max: f64, v_max: f64, tables: &SieveTables) -> Result<CountReport> {
    require_prime(p, tables)?;
    let a = require_unit(a, p)?;
    if !(u_max >= 1.0) || !(v_max >= 1.0) {
        return Err(Error::Domain("count needs U, V >= 1".into()));
    }
    let ub = u_max.floor() as u64;
    let vb = v_max.floor() as u64;
    let mut exact = 0u64;
    for u in 1..=ub {
        if u % p == 0 {
            continue;
        }
        let inv = mod_inverse((u % p) as i64, p)?;
        let v0 = mul_mod(a, mul_mod(inv, inv, p), p);
        if v0 >= 1 && v0 <= vb {
            // one solution per period of p
            exact += (vb - v0) / p + 1;
        }
    }
    let main = u_max * v_max / p as f64;
    let bound = v_max.powf(0.25)
        * (u_max * (p as f64).powf(-0.25) + u_max.sqrt());
    Ok(CountReport::new(
        "T",
        &[
            ("p", p as f64),
            ("a", a as f64),
            ("U", u_max),
            ("V", v_max),
        ],
        exact,
        main,
        Some(bound),
    ))
}

pub fn count_t_naive(p: u64, a: i64, u_max: f64, v_max: f64, tables: &SieveTables) -> Result<u64> {
    require_prime(p, tables)?;
    let a = require_unit(a, p)?;
    let ub = u_max.floor() as u64;
    let vb = v_max.floor() as u64;
    let mut count = 0u64;
    for u in 1..=ub {
        for v in 1..=vb {
            if mul_mod(mul_mod(u % p, u % p, p), v % p, p) == a {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Count of `2r`-tuples in `[U, 2U]` whose reciprocal squares balance up to
/// `lambda`: sum of the first `r` inverse squares = sum of the last `r`
/// plus `lambda` (mod p). Meet-in-the-middle over `r`-fold sums.
pub fn count_i(p: u64, r: u32, u_base: f64, lambda: i64, tables: &SieveTables) -> Result<CountReport> {
    require_prime(p, tables)?;
    if r < 1 {
        return Err(Error::Domain("tuple arity r must be >= 1".into()));
    }
    if !(u_base >= 1.0) || 2.0 * u_base >= p as f64 {
        return Err(Error::Domain(format!(
            "window [U, 2U] must sit below p; U={u_base}, p={p}"
        )));
    }
    let lo = u_base.ceil() as u64;
    let hi = (2.0 * u_base).floor() as u64;
    let lam = lambda.rem_euclid(p as i64) as u64;
    let mut inv_squares = Vec::new();
    for u in lo..=hi {
        let inv = mod_inverse(u as i64, p)?;
        inv_squares.push(mul_mod(inv, inv, p));
    }
    let n = inv_squares.len() as u64;

    // r-fold sums of inverse squares, with multiplicity
    let mut sums: HashMap<u64, u64> = HashMap::new();
    sums.insert(0, 1);
    for _ in 0..r {
        let mut next: HashMap<u64, u64> = HashMap::with_capacity(sums.len() * inv_squares.len());
        for (&s, &c) in &sums {
            for &w in &inv_squares {
                *next.entry((s + w) % p).or_insert(0) += c;
            }
        }
        sums = next;
    }
    // left = right + lambda
    let mut exact = 0u64;
    for (&s, &c_left) in &sums {
        let right = (s + p - lam) % p;
        if let Some(&c_right) = sums.get(&right) {
            exact += c_left * c_right;
        }
    }

    let nf = n as f64;
    let main = nf.powi(2 * r as i32) / p as f64;
    let bound = u_base.powi(2 * r as i32) / p as f64 + u_base.powi(r as i32);
    Ok(CountReport::new(
        "I",
        &[
            ("p", p as f64),
            ("r", r as f64),
            ("U", u_base),
            ("lambda", lam as f64),
            ("n", nf),
        ],
        exact,
        main,
        Some(bound),
    ))
}

/// Literal 2r-fold loop oracle for `count_i` (use only at tiny sizes).
pub fn count_i_naive(p: u64, r: u32, u_base: f64, lambda: i64, tables: &SieveTables) -> Result<u64> {
    require_prime(p, tables)?;
    let lo = u_base.ceil() as u64;
    let hi = (2.0 * u_base).floor() as u64;
    let lam = lambda.rem_euclid(p as i64) as u64;
    let vals: Vec<u64> = (lo..=hi).collect();
    let arity = 2 * r as usize;
    let mut idx = vec![0usize; arity];
    let mut count = 0u64;
    loop {
        let mut left = 0u64;
        let mut right = 0u64;
        for (pos, &i) in idx.iter().enumerate() {
            let inv = mod_inverse(vals[i] as i64, p)?;
            let w = mul_mod(inv, inv, p);
            if pos < r as usize {
                left = (left + w) % p;
            } else {
                right = (right + w) % p;
            }
        }
        if left == (right + lam) % p {
            count += 1;
        }
        let mut pos = arity;
        loop {
            if pos == 0 {
                return Ok(count);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < vals.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Sum over `d` in `[F, 2F]` of the window count at residue `a * dbar^2`.
pub fn count_r(
    p: u64,
    a: i64,
    f_base: f64,
    l: f64,
    h: f64,
    tables: &SieveTables,
) -> Result<CountReport> {
    require_prime(p, tables)?;
    let a_red = require_unit(a, p)?;
    if !(f_base >= 1.0) || 2.0 * f_base >= p as f64 {
        return Err(Error::Domain(format!(
            "divisor window [F, 2F] must sit below p; F={f_base}"
        )));
    }
    let lo = f_base.ceil() as u64;
    let hi = (2.0 * f_base).floor() as u64;
    let mut exact = 0u64;
    for d in lo..=hi {
        let inv = mod_inverse(d as i64, p)?;
        let a_d = mul_mod(a_red, mul_mod(inv, inv, p), p);
        exact += count_n(p, a_d as i64, l, h, tables)?.exact_count;
    }
    let l2h = l * l * h;
    // the reference bound needs F and L^2 h below p
    let bound = if l2h < p as f64 {
        Some(
            (f_base * l2h.powf(0.25) * (p as f64).powf(-0.25))
                .max(f_base.sqrt() * l2h.powf(0.25)),
        )
    } else {
        None
    };
    let window = tables.prime_window(l, p)?;
    let k = window.k() as f64;
    let main = (hi.saturating_sub(lo) + 1) as f64 * k * k * h / p as f64;
    let mut rep = CountReport::new(
        "R",
        &[
            ("p", p as f64),
            ("a", a_red as f64),
            ("F", f_base),
            ("L", l),
            ("h", h),
        ],
        exact,
        main,
        bound,
    );
    if bound.is_none() {
        rep = rep.with_flag("bound-needs-L2h<p");
    }
    Ok(rep)
}

/// Prime-window specification for the structured factor `r`: a list of
/// (count, base) pairs, each asking for `count` distinct primes from
/// `[base, window_factor * base]`.
pub type RSpec = [(usize, f64)];

/// Distinct products of distinct primes drawn per the spec windows. Sorted.
fn enumerate_r_values(
    r_spec: &RSpec,
    window_factor: f64,
    exclude: u64,
    tables: &SieveTables,
) -> Result<Vec<u64>> {
    const R_BUDGET: usize = 5_000_000;
    let mut products: Vec<u64> = vec![1];
    for &(count, base) in r_spec {
        let lo = base;
        let hi = window_factor * base;
        let primes: Vec<u64> = tables
            .primes_in(lo, hi)
            .iter()
            .copied()
            .filter(|&p| gcd(p, exclude) == 1)
            .collect();
        if primes.len() < count {
            return Ok(Vec::new()); // degenerate window
        }
        let mut next: Vec<u64> = Vec::new();
        // extend every partial product by `count` distinct primes from this
        // window; dedup at the end keeps r values distinct as integers
        fn combos(
            primes: &[u64],
            start: usize,
            remaining: usize,
            acc: u64,
            base_products: &[u64],
            out: &mut Vec<u64>,
            budget: usize,
        ) -> Result<()> {
            if remaining == 0 {
                for &b in base_products {
                    let v = b
                        .checked_mul(acc)
                        .ok_or_else(|| Error::Resource("structured product overflow".into()))?;
                    out.push(v);
                    if out.len() > budget {
                        return Err(Error::Resource(
                            "structured product enumeration too large".into(),
                        ));
                    }
                }
                return Ok(());
            }
            for i in start..primes.len() {
                let acc2 = acc
                    .checked_mul(primes[i])
                    .ok_or_else(|| Error::Resource("structured product overflow".into()))?;
                combos(primes, i + 1, remaining - 1, acc2, base_products, out, budget)?;
            }
            Ok(())
        }
        combos(&primes, 0, count, 1, &products, &mut next, R_BUDGET)?;
        products = next;
    }
    products.sort_unstable();
    products.dedup();
    // overlapping windows can pick the same prime twice; keep square-free only
    let mut out = Vec::with_capacity(products.len());
    for v in products {
        if v <= tables.limit() {
            if tables.mobius(v) != 0 {
                out.push(v);
            }
        } else if tables.factorize(v)?.is_squarefree() {
            out.push(v);
        }
    }
    Ok(out)
}

/// Count of `(m, n, r)` with `m, n` in `[N, wf*N]`, `mn` square-free and
/// `N^zeta`-smooth, `r` a product of distinct window primes coprime to `q`,
/// and `m*n*r = a (mod q)`. Counts via residue histograms for the `mn`
/// multiset and the `r` set.
pub fn count_structured_products(
    q: u64,
    a: i64,
    n_base: f64,
    zeta: f64,
    window_factor: f64,
    r_spec: &RSpec,
    tables: &SieveTables,
) -> Result<CountReport> {
    if q < 3 {
        return Err(Error::Domain("structured count needs q >= 3".into()));
    }
    let a_red = a.rem_euclid(q as i64) as u64;
    if gcd(a_red, q) != 1 {
        return Err(Error::Domain(format!("residue {a} not coprime to {q}")));
    }
    if window_factor < crate::arith::psi() {
        return Err(Error::Domain(format!(
            "window factor {window_factor} below psi"
        )));
    }
    let params = [
        ("q", q as f64),
        ("a", a_red as f64),
        ("N", n_base),
        ("zeta", zeta),
        ("wf", window_factor),
    ];

    let lo = n_base.ceil() as u64;
    let hi = (window_factor * n_base).floor() as u64;
    let smooth_bound = n_base.powf(zeta);
    let mut admissible: Vec<u64> = Vec::new();
    for m in lo..=hi {
        if tables.mobius(m) != 0 && tables.is_smooth(m, smooth_bound)? {
            admissible.push(m);
        }
    }
    let r_values = enumerate_r_values(r_spec, window_factor, q, tables)?;
    if admissible.is_empty() || r_values.is_empty() {
        return Ok(
            CountReport::new("structured", &params, 0, 0.0, None).with_flag("degenerate-window")
        );
    }

    // residue histogram of k = m*n over admissible coprime pairs
    let mut k_hist: HashMap<u64, u64> = HashMap::new();
    let mut pair_total = 0u64;
    for &m in &admissible {
        for &n in &admissible {
            if gcd(m, n) != 1 {
                continue;
            }
            let k = mul_mod(m % q, n % q, q);
            if gcd(k, q) == 1 {
                *k_hist.entry(k).or_insert(0) += 1;
                pair_total += 1;
            }
        }
    }
    let mut r_hist: HashMap<u64, u64> = HashMap::new();
    for &r in &r_values {
        *r_hist.entry(r % q).or_insert(0) += 1;
    }

    let mut exact = 0u64;
    for (&kr, &ck) in &k_hist {
        let need = mul_mod(a_red, mod_inverse(kr as i64, q)?, q);
        if let Some(&cr) = r_hist.get(&need) {
            exact += ck * cr;
        }
    }

    let phi = tables.euler_phi(q)? as f64;
    let main = pair_total as f64 * r_values.len() as f64 / phi;
    Ok(CountReport::new("structured", &params, exact, main, None))
}

/// Naive oracle: the literal triple loop with per-triple predicate checks.
pub fn count_structured_products_naive(
    q: u64,
    a: i64,
    n_base: f64,
    zeta: f64,
    window_factor: f64,
    r_spec: &RSpec,
    tables: &SieveTables,
) -> Result<u64> {
    let a_red = a.rem_euclid(q as i64) as u64;
    let lo = n_base.ceil() as u64;
    let hi = (window_factor * n_base).floor() as u64;
    let smooth_bound = n_base.powf(zeta);
    let r_values = enumerate_r_values(r_spec, window_factor, q, tables)?;
    let mut count = 0u64;
    for m in lo..=hi {
        for n in lo..=hi {
            let mn = m
                .checked_mul(n)
                .ok_or_else(|| Error::Resource("mn overflow".into()))?;
            if !tables.is_squarefree(mn)? || !tables.is_smooth(mn, smooth_bound)? {
                continue;
            }
            for &r in &r_values {
                if mul_mod(mn % q, r % q, q) == a_red {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn tables() -> SieveTables {
        SieveTables::build(10_000).unwrap()
    }

    #[test]
    fn count_n_full_interval_is_k_squared() {
        let t = tables();
        for &(p, l) in &[(13u64, 2.0), (101, 3.0), (211, 4.0)] {
            let k = t.prime_window(l, p).unwrap().k() as u64;
            let rep = count_n(p, 7, l, p as f64, &t).unwrap();
            assert_eq!(rep.exact_count, k * k, "p={p}");
        }
    }

    #[test]
    fn count_n_matches_triple_loop() {
        let t = tables();
        let rep = count_n(101, 7, 3.0, 50.0, &t).unwrap();
        let naive = count_n_naive(101, 7, 3.0, 50.0, &t).unwrap();
        assert_eq!(rep.exact_count, naive);
        // randomized agreement
        let mut rng = StdRng::seed_from_u64(2024);
        let primes: Vec<u64> = t.primes_in(11.0, 499.0).to_vec();
        for _ in 0..50 {
            let p = primes[rng.gen_range(0..primes.len())];
            let a = rng.gen_range(1..p) as i64;
            let l = rng.gen_range(2.0..(p as f64).powf(1.0 / 3.0).max(2.5));
            let h = rng.gen_range(1.0..p as f64);
            assert_eq!(
                count_n(p, a, l, h, &t).unwrap().exact_count,
                count_n_naive(p, a, l, h, &t).unwrap(),
                "p={p} a={a} l={l} h={h}"
            );
        }
    }

    #[test]
    fn count_n_rejects_bad_parameters() {
        let t = tables();
        assert!(count_n(100, 7, 3.0, 5.0, &t).is_err()); // composite
        assert!(count_n(101, 0, 3.0, 5.0, &t).is_err()); // a = 0
        assert!(count_n(101, 7, 3.0, 102.0, &t).is_err()); // h > p
    }

    #[test]
    fn count_n_empty_window() {
        let t = tables();
        // p = 7 excludes the only prime in [5.1, 10.2]
        let rep = count_n(7, 3, 5.1, 6.0, &t).unwrap();
        assert_eq!(rep.exact_count, 0);
    }

    #[test]
    fn partition_identity_over_residues() {
        let t = tables();
        for &(p, l, h) in &[(101u64, 3.0, 50.0), (211, 4.0, 100.0), (13, 2.0, 13.0)] {
            let k = t.prime_window(l, p).unwrap().k() as u64;
            let total: u64 = (1..p)
                .map(|a| count_n(p, a as i64, l, h, &t).unwrap().exact_count)
                .sum();
            let uh = h.floor() as u64;
            let coprime_u = (1..=uh).filter(|&u| u % p != 0).count() as u64;
            assert_eq!(total, k * k * coprime_u, "p={p}");
        }
    }

    #[test]
    fn squarefree_routes_agree() {
        let t = tables();
        let sc = count_n_squarefree(101, 7, 3.0, 50.0, &t).unwrap();
        assert!(sc.agree, "direct={} incl={}", sc.direct, sc.inclusion_exclusion);
        // h = 1: only u = 1 counts and 1 is square-free
        let sc = count_n_squarefree(101, 7, 3.0, 1.0, &t).unwrap();
        assert!(sc.agree);
        assert_eq!(
            sc.direct,
            count_n(101, 7, 3.0, 1.0, &t).unwrap().exact_count
        );
        let mut rng = StdRng::seed_from_u64(99);
        let primes: Vec<u64> = t.primes_in(11.0, 499.0).to_vec();
        for _ in 0..60 {
            let p = primes[rng.gen_range(0..primes.len())];
            let a = rng.gen_range(1..p) as i64;
            let l = rng.gen_range(2.0..(p as f64).powf(1.0 / 3.0).max(2.5));
            let h = rng.gen_range(1.0..p as f64);
            let sc = count_n_squarefree(p, a, l, h, &t).unwrap();
            assert!(sc.agree, "p={p} a={a} l={l} h={h}");
        }
    }

    #[test]
    fn squarefree_density_at_full_interval() {
        // at h = p the square-free fraction approaches 6/pi^2; the sample
        // size is K^2, so the window must hold enough primes to concentrate
        let big = SieveTables::build(200_000).unwrap();
        let p = 99991u64; // prime
        let l = (p as f64).powf(0.45);
        let sc = count_n_squarefree(p, 5, l, p as f64, &big).unwrap();
        let n = count_n(p, 5, l, p as f64, &big).unwrap().exact_count;
        assert!(n >= 500, "sample too small: {n}");
        let ratio = sc.direct as f64 / n as f64;
        assert!(
            (ratio - 6.0 / (std::f64::consts::PI * std::f64::consts::PI)).abs() < 0.06,
            "ratio {ratio}"
        );
    }

    #[test]
    fn count_n_upper_bound_diagnostic() {
        // the divisor-bound estimate (L^2 h/p + 1) * polylog, asserted at
        // the loose constant 10 (log p)^3
        let t = tables();
        let mut rng = StdRng::seed_from_u64(312);
        let primes: Vec<u64> = t.primes_in(11.0, 499.0).to_vec();
        for _ in 0..50 {
            let p = primes[rng.gen_range(0..primes.len())];
            let a = rng.gen_range(1..p) as i64;
            let l = rng.gen_range(2.0..(p as f64).sqrt());
            let h = rng.gen_range(1.0..p as f64);
            let rep = count_n(p, a, l, h, &t).unwrap();
            let logp = (p as f64).ln();
            let cap = (l * l * h / p as f64 + 1.0) * 10.0 * logp * logp * logp;
            assert!(
                (rep.exact_count as f64) <= cap,
                "p={p} a={a} L={l} h={h}: {} > {cap}",
                rep.exact_count
            );
        }
    }

    #[test]
    fn count_q_examples() {
        let t = tables();
        let k = t.prime_window(3.0, 211).unwrap().k() as u64;
        let rep = count_q(211, 5, 3.0, 211.0, &t).unwrap();
        assert_eq!(rep.exact_count, k * k);
        let rep = count_q(211, 5, 3.0, 20.0, &t).unwrap();
        assert_eq!(rep.exact_count, count_q_naive(211, 5, 3.0, 20.0, &t).unwrap());
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..25 {
            let p = 499u64;
            let a = rng.gen_range(1..p) as i64;
            let l = rng.gen_range(2.0..7.0);
            let h = rng.gen_range(1.0..p as f64);
            assert_eq!(
                count_q(p, a, l, h, &t).unwrap().exact_count,
                count_q_naive(p, a, l, h, &t).unwrap()
            );
        }
    }

    #[test]
    fn count_t_examples() {
        let t = tables();
        let rep = count_t(101, 1, 1.0, 1.0, &t).unwrap();
        assert_eq!(rep.exact_count, 1); // u = v = 1
        let rep = count_t(101, 3, 30.0, 30.0, &t).unwrap();
        assert_eq!(rep.exact_count, count_t_naive(101, 3, 30.0, 30.0, &t).unwrap());
        // quadratic non-residue with V = 1: no square roots
        // non-residues mod 101 include 2? squares mod 101: check 2
        let is_qr = |a: u64, p: u64| (1..p).any(|x| mul_mod(x, x, p) == a);
        let nqr = (2..101).find(|&a| !is_qr(a, 101)).unwrap();
        let rep = count_t(101, nqr as i64, 90.0, 1.0, &t).unwrap();
        assert_eq!(rep.exact_count, 0);
        // ranges beyond p wrap correctly
        let rep = count_t(13, 3, 40.0, 40.0, &t).unwrap();
        assert_eq!(rep.exact_count, count_t_naive(13, 3, 40.0, 40.0, &t).unwrap());
    }

    #[test]
    fn count_i_examples() {
        let t = tables();
        // frozen from the 4-fold loop oracle: window [3, 6], all ten pair
        // sums of inverse squares mod 101 are distinct, so the count is
        // 4 diagonal sums (multiplicity 1) plus 6 off-diagonal (mult. 2):
        // 4*1 + 6*4 = 28
        let naive = count_i_naive(101, 2, 3.0, 0, &t).unwrap();
        assert_eq!(naive, 28);
        let rep = count_i(101, 2, 3.0, 0, &t).unwrap();
        assert_eq!(rep.exact_count, naive);
        // diagonal lower bound: n^r
        let n = 4u64;
        assert!(rep.exact_count >= n * n);
        // lambda never beats lambda = 0
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let lam = rng.gen_range(1..101i64);
            let r = count_i(101, 2, 3.0, lam, &t).unwrap();
            assert!(r.exact_count <= rep.exact_count, "lambda={lam}");
            assert_eq!(
                r.exact_count,
                count_i_naive(101, 2, 3.0, lam, &t).unwrap()
            );
        }
        assert!(count_i(101, 2, 51.0, 0, &t).is_err()); // 2U >= p
    }

    #[test]
    fn count_r_matches_per_divisor_sum() {
        let t = tables();
        let rep = count_r(211, 5, 3.0, 3.0, 20.0, &t).unwrap();
        let mut oracle = 0u64;
        for d in 3..=6u64 {
            let inv = mod_inverse(d as i64, 211).unwrap();
            let a_d = mul_mod(5, mul_mod(inv, inv, 211), 211);
            oracle += count_n_naive(211, a_d as i64, 3.0, 20.0, &t).unwrap();
        }
        assert_eq!(rep.exact_count, oracle);
        // h = p reduces every inner count to K^2
        let k = t.prime_window(3.0, 211).unwrap().k() as u64;
        let rep = count_r(211, 5, 3.0, 3.0, 211.0, &t).unwrap();
        assert_eq!(rep.exact_count, 4 * k * k); // d in [3, 6]
    }

    #[test]
    fn structured_products_match_enumeration() {
        let t = tables();
        let spec = [(1usize, 3.0)];
        let rep = count_structured_products(101, 3, 10.0, 1.0, 2.0, &spec, &t).unwrap();
        let naive = count_structured_products_naive(101, 3, 10.0, 1.0, 2.0, &spec, &t).unwrap();
        assert_eq!(rep.exact_count, naive);
        // partition identity over reduced classes
        let mut total = 0u64;
        let mut grand = 0u64;
        for a in 1..101u64 {
            total += count_structured_products(101, a as i64, 10.0, 1.0, 2.0, &spec, &t)
                .unwrap()
                .exact_count;
        }
        // total picks up every admissible triple exactly once
        let lo = 10u64;
        let hi = 20u64;
        for m in lo..=hi {
            for n in lo..=hi {
                let mn = m * n;
                if !t.is_squarefree(mn).unwrap() || !t.is_smooth(mn, 10.0).unwrap() {
                    continue;
                }
                for r in [3u64, 5] {
                    if gcd(mn * r, 101) == 1 {
                        grand += 1;
                    }
                }
            }
        }
        assert_eq!(total, grand);
    }

    #[test]
    fn structured_products_degenerate_window() {
        let t = tables();
        // no primes in [97, 98*psi-ish]: choose a window between primes
        let spec = [(1usize, 90.0)]; // [90, 96.5] holds no prime? 89 < 90, 97 > 96.5
        let rep =
            count_structured_products(101, 3, 10.0, 1.0, crate::arith::psi(), &spec, &t).unwrap();
        assert_eq!(rep.exact_count, 0);
        assert_eq!(rep.flag.as_deref(), Some("degenerate-window"));
    }

    #[test]
    fn structured_products_two_window_spec() {
        let t = tables();
        // two windows with overlap: r = products of one prime from [3, 6]
        // and one from [5, 10]; duplicates like 5*5 must be dropped
        let spec = [(1usize, 3.0), (1usize, 5.0)];
        let rep = count_structured_products(103, 2, 12.0, 1.0, 2.0, &spec, &t).unwrap();
        let naive = count_structured_products_naive(103, 2, 12.0, 1.0, 2.0, &spec, &t).unwrap();
        assert_eq!(rep.exact_count, naive);
    }
}
