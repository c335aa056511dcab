//! Smooth square-free representatives of residue classes: the per-modulus
//! cover bound M(p), its budgeted smoothness-restricted variant, the
//! window prime-pair construction, the Booker lower-bound family, and the
//! triple-product search.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::arith::{gcd, mod_inverse, mul_mod, SieveTables};
use crate::error::{Error, Result};
use crate::parallel;

/// Largest prime handled by the progressive-enumeration mode.
pub const MP_PRIME_LIMIT: u64 = 10_000;
/// Meet-in-the-middle coverage decisions are feasible up to this many primes.
pub const MP_MITM_PRIMES: usize = 40;

/// Outcome of the per-modulus cover computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MpStatus {
    /// Every class has a representative; the value is the max of per-class
    /// minima.
    Finite(u64),
    /// Some classes are provably never hit by any square-free smooth value.
    Infinite { uncovered: Vec<u64> },
    /// The enumeration budget ran out with classes still open, but coverage
    /// could not be decided either way.
    Undecided { uncovered: Vec<u64> },
}

#[derive(Debug, Clone)]
pub struct MpResult {
    pub p: u64,
    pub status: MpStatus,
    /// Minimal representative per residue class (index = class).
    pub per_class: Vec<Option<u64>>,
    /// Max of per-class minima over reduced classes only.
    pub reduced_max: Option<u64>,
    /// Value budget the enumeration ran to.
    pub budget: u64,
}

impl MpResult {
    pub fn value(&self) -> Option<u64> {
        match self.status {
            MpStatus::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Computes the smallest bound M such that every residue class modulo `p`
/// (class 0 included) holds a `p`-smooth square-free positive integer
/// `<= M`, by generating those integers in increasing order from a
/// best-first heap over strictly increasing prime sequences.
pub fn compute_m(p: u64, tables: &SieveTables) -> Result<MpResult> {
    if !tables.is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if p > MP_PRIME_LIMIT {
        return Err(Error::Domain(format!(
            "cover computation supports p <= {MP_PRIME_LIMIT}, got {p}"
        )));
    }
    if tables.limit() < p {
        return Err(Error::NeedsLargerSieve(format!(
            "need primes up to {p}, sieve stops at {}",
            tables.limit()
        )));
    }
    let primes: Vec<u64> = tables.primes_in(2.0, p as f64).to_vec();
    let budget = p.saturating_pow(3);

    let mut per_class: Vec<Option<u64>> = vec![None; p as usize];
    per_class[1 % p as usize] = Some(1); // the empty product
    let mut open = p - 1;

    // heap entries: (value, index of the largest prime used)
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    if !primes.is_empty() {
        heap.push(Reverse((primes[0], 0)));
    }
    // once any successor is dropped for exceeding the budget, draining the
    // heap no longer proves the enumeration was complete
    let mut pruned = false;
    while let Some(Reverse((v, i))) = heap.pop() {
        let class = (v % p) as usize;
        if per_class[class].is_none() {
            per_class[class] = Some(v);
            open -= 1;
            if open == 0 {
                break;
            }
        }
        if i + 1 < primes.len() {
            let next = primes[i + 1];
            match v.checked_mul(next) {
                Some(w) if w <= budget => heap.push(Reverse((w, i + 1))),
                _ => pruned = true,
            }
            let replaced = v / primes[i] * next;
            if replaced <= budget {
                heap.push(Reverse((replaced, i + 1)));
            } else {
                pruned = true;
            }
        }
    }

    let uncovered: Vec<u64> = (0..p).filter(|&c| per_class[c as usize].is_none()).collect();
    let status = if uncovered.is_empty() {
        let max = per_class.iter().map(|m| m.unwrap()).max().unwrap();
        MpStatus::Finite(max)
    } else if !pruned {
        // every subset product was enumerated below the budget
        MpStatus::Infinite { uncovered }
    } else if primes.len() <= MP_MITM_PRIMES {
        let reachable = reachable_classes(p, &primes);
        if uncovered.iter().any(|&c| !reachable[c as usize]) {
            MpStatus::Infinite {
                uncovered: uncovered
                    .iter()
                    .copied()
                    .filter(|&c| !reachable[c as usize])
                    .collect(),
            }
        } else {
            MpStatus::Undecided { uncovered }
        }
    } else {
        MpStatus::Undecided { uncovered }
    };

    let reduced_max = (1..p)
        .map(|c| per_class[c as usize])
        .collect::<Option<Vec<u64>>>()
        .map(|v| v.into_iter().max().unwrap());
    Ok(MpResult {
        p,
        status,
        per_class,
        reduced_max,
        budget,
    })
}

/// Residues reachable as subset products of the given primes, decided
/// exactly by meeting the two halves of the prime list in the middle.
fn reachable_classes(p: u64, primes: &[u64]) -> Vec<bool> {
    let half = primes.len() / 2;
    let residues = |set: &[u64]| -> Vec<u64> {
        let mut out = vec![1u64 % p];
        for &q in set {
            let cur = out.clone();
            for r in cur {
                out.push(mul_mod(r, q % p, p));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    };
    let left = residues(&primes[..half]);
    let right = residues(&primes[half..]);
    let mut reach = vec![false; p as usize];
    for &a in &left {
        for &b in &right {
            reach[mul_mod(a, b, p) as usize] = true;
        }
    }
    reach
}

/// Sweep of `compute_m` over all primes in `[pmin, pmax]`, parallel per
/// prime.
pub fn compute_m_table(pmin: u64, pmax: u64, tables: &SieveTables) -> Result<Vec<MpResult>> {
    let primes: Vec<u64> = tables.primes_in(pmin as f64, pmax as f64).to_vec();
    parallel::map_collect(primes, |p| compute_m(p, tables))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MalphaStatus {
    Finite(u64),
    Undecided { uncovered: Vec<u64> },
}

#[derive(Debug, Clone)]
pub struct MalphaResult {
    pub q: u64,
    pub alpha: f64,
    pub budget: u64,
    pub smooth_bound: f64,
    /// `(class, minimal representative)` for every reduced class, ascending.
    pub per_class: Vec<(u64, Option<u64>)>,
    pub status: MalphaStatus,
}

/// Minimal `q^alpha`-smooth square-free representative of every reduced
/// class modulo `q`, sieving the interval `[1, budget]`.
pub fn compute_m_alpha_star(
    q: u64,
    alpha: f64,
    budget: u64,
    tables: &SieveTables,
) -> Result<MalphaResult> {
    if q < 3 {
        return Err(Error::Domain(format!("modulus {q} below 3")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if budget < q {
        return Err(Error::Domain(format!("budget {budget} below q = {q}")));
    }
    if budget > tables.limit() {
        return Err(Error::Resource(format!(
            "budget {budget} beyond sieve limit {}",
            tables.limit()
        )));
    }
    let smooth_bound = (q as f64).powf(alpha);
    let reduced: Vec<u64> = (1..q).filter(|&a| gcd(a, q) == 1).collect();
    let mut minima: Vec<Option<u64>> = vec![None; q as usize];
    let mut open = reduced.len();
    's: for s in 1..=budget {
        if tables.mobius(s) == 0 {
            continue;
        }
        let class = (s % q) as usize;
        if minima[class].is_some() || gcd(class as u64, q) != 1 {
            continue;
        }
        // largest prime factor <= q^alpha
        let mut n = s;
        let mut smooth = true;
        while n > 1 {
            let f = tables.smallest_prime_factor(n);
            if f as f64 > smooth_bound {
                smooth = false;
                break;
            }
            while n % f == 0 {
                n /= f;
            }
        }
        if !smooth {
            continue;
        }
        minima[class] = Some(s);
        open -= 1;
        if open == 0 {
            break 's;
        }
    }
    let per_class: Vec<(u64, Option<u64>)> =
        reduced.iter().map(|&a| (a, minima[a as usize])).collect();
    let status = if open == 0 {
        MalphaStatus::Finite(
            per_class
                .iter()
                .map(|&(_, m)| m.unwrap())
                .max()
                .expect("q >= 3 has a reduced class"),
        )
    } else {
        MalphaStatus::Undecided {
            uncovered: per_class
                .iter()
                .filter(|(_, m)| m.is_none())
                .map(|&(a, _)| a)
                .collect(),
        }
    };
    Ok(MalphaResult {
        q,
        alpha,
        budget,
        smooth_bound,
        per_class,
        status,
    })
}

/// A representative found for one residue class.
#[derive(Debug, Clone)]
pub struct RepresentativeRecord {
    pub modulus: u64,
    pub class: u64,
    pub found: bool,
    pub s: Option<u64>,
    pub factors: Vec<(u64, u32)>,
    pub smoothness_bound: f64,
    /// `ln(s) / ln(modulus)` when found.
    pub exponent: Option<f64>,
}

impl RepresentativeRecord {
    fn missing(modulus: u64, class: u64, smoothness_bound: f64) -> Self {
        RepresentativeRecord {
            modulus,
            class,
            found: false,
            s: None,
            factors: Vec::new(),
            smoothness_bound,
            exponent: None,
        }
    }

    fn found(modulus: u64, class: u64, s: u64, smoothness_bound: f64, tables: &SieveTables) -> Result<Self> {
        let factors = tables.factorize(s)?.factors;
        Ok(RepresentativeRecord {
            modulus,
            class,
            found: true,
            s: Some(s),
            factors,
            smoothness_bound,
            exponent: Some((s as f64).ln() / (modulus as f64).ln()),
        })
    }
}

/// Result of the window prime-pair construction for one class.
#[derive(Debug, Clone)]
pub struct PrimePairRep {
    pub record: RepresentativeRecord,
    pub l: f64,
    pub k: usize,
    /// The factors `(l1, l2, u)` of the minimal product, when found.
    pub parts: Option<(u64, u64, u64)>,
    /// `4 L^2 (p-1)`, the size budget every found value satisfies.
    pub size_budget: f64,
}

/// Searches `s = l1 * l2 * u` with distinct primes `l1, l2` from the window
/// `[L, 2L]`, `L = p^(1/4 + eps)`, and `1 <= u <= p-1` square-free avoiding
/// both primes, such that `s = a (mod p)`. Returns the minimal such `s`.
///
/// The window pins `u` per pair: `u` is the canonical residue of
/// `a * l1bar * l2bar`, so each unordered pair contributes at most one
/// candidate.
pub fn prime_pair_representative(
    p: u64,
    a: i64,
    eps: f64,
    tables: &SieveTables,
) -> Result<PrimePairRep> {
    if !tables.is_prime(p) || p < 11 {
        return Err(Error::Domain(format!("need a prime p >= 11, got {p}")));
    }
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::Domain(format!("eps must lie in (0, 1/4], got {eps}")));
    }
    let a_red = a.rem_euclid(p as i64) as u64;
    if a_red == 0 {
        return Err(Error::Domain(format!("residue {a} not coprime to {p}")));
    }
    if tables.limit() < p {
        return Err(Error::NeedsLargerSieve(format!(
            "square-free tests need the sieve up to {p}, have {}",
            tables.limit()
        )));
    }
    let l = (p as f64).powf(0.25 + eps);
    let window = tables.prime_window(l, p)?;
    let h = p - 1;
    let mut best: Option<(u64, (u64, u64, u64))> = None;
    for (i, &l1) in window.members.iter().enumerate() {
        for &l2 in &window.members[i + 1..] {
            let inv = mod_inverse(mul_mod(l1, l2, p) as i64, p)?;
            let u = mul_mod(a_red, inv, p);
            if u == 0 || u > h {
                continue;
            }
            if u % l1 == 0 || u % l2 == 0 || tables.mobius(u) == 0 {
                continue;
            }
            let s = l1
                .checked_mul(l2)
                .and_then(|x| x.checked_mul(u))
                .ok_or_else(|| Error::Resource("product overflow".into()))?;
            if best.map_or(true, |(b, _)| s < b) {
                best = Some((s, (l1, l2, u)));
            }
        }
    }
    // window primes stay below 2L < p and u < p, so any hit is p-smooth
    let size_budget = 4.0 * l * l * (h as f64);
    let (record, parts) = match best {
        Some((s, parts)) => (
            RepresentativeRecord::found(p, a_red, s, p as f64, tables)?,
            Some(parts),
        ),
        None => (RepresentativeRecord::missing(p, a_red, p as f64), None),
    };
    Ok(PrimePairRep {
        record,
        l,
        k: window.k(),
        parts,
        size_budget,
    })
}

/// Runs the prime-pair construction over every reduced class.
pub fn prime_pair_sweep(p: u64, eps: f64, tables: &SieveTables) -> Result<Vec<PrimePairRep>> {
    parallel::map_range(1, p - 1, |a| prime_pair_representative(p, a as i64, eps, tables))
        .into_iter()
        .collect()
}

/// Lower-bound family: a prime `p` in the CRT progression forcing the first
/// `K` candidates `4 + kp` to be divisible by a prime square.
#[derive(Debug, Clone)]
pub struct LowerBoundResult {
    pub k: u32,
    pub residue: u64,
    pub modulus: u64,
    pub p: u64,
    pub s_min: u64,
    /// `s_min / (K * p)`, greater than 1 by construction.
    pub ratio: f64,
}

pub fn booker_lower_bound(k: u32, tables: &SieveTables) -> Result<LowerBoundResult> {
    if !(1..=6).contains(&k) {
        return Err(Error::Domain(format!("K must lie in [1, 6], got {k}")));
    }
    // constraints k*p + 4 = 0 mod p_(k+1)^2 for k = 1..K, p_j the j-th prime
    let mut constraints: Vec<(i64, u64)> = Vec::new();
    for j in 1..=k as usize {
        let pj = tables.primes()[j]; // primes()[1] = 3 = p_2
        let m = pj * pj;
        let inv = mod_inverse(j as i64, m)?;
        let r = mul_mod((m - 4 % m) % m, inv, m);
        constraints.push((r as i64, m));
    }
    let (residue, modulus) = crate::arith::crt_solve(&constraints)?;

    const PRIME_SCAN_BUDGET: u64 = 2_000_000;
    let mut p = if residue < 2 { residue + modulus } else { residue };
    let mut steps = 0u64;
    while !crate::arith::is_prime_u64(p) {
        p = p
            .checked_add(modulus)
            .ok_or_else(|| Error::Resource("prime scan overflow".into()))?;
        steps += 1;
        if steps > PRIME_SCAN_BUDGET {
            return Err(Error::Resource(format!(
                "no prime found in {steps} steps of the progression {residue} mod {modulus}"
            )));
        }
    }

    // least square-free s = 4 (mod p)
    let mut s = 4u64 % p;
    if s == 0 {
        s = p;
    }
    loop {
        if tables.factorize(s)?.is_squarefree() {
            break;
        }
        s = s
            .checked_add(p)
            .ok_or_else(|| Error::Resource("representative scan overflow".into()))?;
    }
    if s <= k as u64 * p {
        return Err(Error::Domain(format!(
            "construction violated: s = {s} <= K*p = {}",
            k as u64 * p
        )));
    }
    Ok(LowerBoundResult {
        k,
        residue,
        modulus,
        p,
        s_min: s,
        ratio: s as f64 / (k as u64 * p) as f64,
    })
}

/// Result of the triple-product search `s * u * v`.
#[derive(Debug, Clone)]
pub struct TripleSearchRep {
    pub record: RepresentativeRecord,
    pub parts: Option<(u64, u64, u64)>,
    /// Number of admissible `(u, v)` pairs inspected.
    pub pairs: u64,
}

/// Finds the minimal `s * u * v = a (mod p)` with `s <= t_bound`
/// square-free, `u, v` products of `k` distinct primes from
/// `[W^(1/k)/2, W^(1/k)]`, and the whole product square-free.
pub fn smooth_squarefree_triple_search(
    p: u64,
    a: i64,
    t_bound: u64,
    w: f64,
    k: u32,
    tables: &SieveTables,
) -> Result<TripleSearchRep> {
    if !tables.is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let a_red = a.rem_euclid(p as i64) as u64;
    if a_red == 0 {
        return Err(Error::Domain(format!("residue {a} not coprime to {p}")));
    }
    if k < 1 || t_bound < 1 {
        return Err(Error::Domain("need k >= 1 and a positive s budget".into()));
    }
    let hi = w.powf(1.0 / k as f64);
    let lo = 0.5 * hi;
    let primes: Vec<u64> = tables.primes_in(lo, hi).to_vec();
    let smooth_bound = hi;

    // all products of k distinct window primes
    let mut products: Vec<(u64, Vec<u64>)> = Vec::new();
    fn combos(
        primes: &[u64],
        start: usize,
        remaining: u32,
        acc: u64,
        chosen: &mut Vec<u64>,
        out: &mut Vec<(u64, Vec<u64>)>,
    ) {
        if remaining == 0 {
            out.push((acc, chosen.clone()));
            return;
        }
        for i in start..primes.len() {
            if let Some(acc2) = acc.checked_mul(primes[i]) {
                chosen.push(primes[i]);
                combos(primes, i + 1, remaining - 1, acc2, chosen, out);
                chosen.pop();
            }
        }
    }
    combos(&primes, 0, k, 1, &mut Vec::new(), &mut products);

    let mut best: Option<(u64, (u64, u64, u64))> = None;
    let mut pairs = 0u64;
    for (u, u_primes) in &products {
        for (v, _) in &products {
            if gcd(*u, *v) != 1 || gcd(mul_mod(*u % p, *v % p, p), p) != 1 {
                continue;
            }
            pairs += 1;
            let inv = mod_inverse(mul_mod(*u % p, *v % p, p) as i64, p)?;
            let s0 = mul_mod(a_red, inv, p);
            if s0 == 0 {
                continue;
            }
            let mut s = s0;
            while s <= t_bound {
                if tables.mobius(s) != 0 && gcd(s, *u) == 1 && gcd(s, *v) == 1 {
                    let total = s
                        .checked_mul(*u)
                        .and_then(|x| x.checked_mul(*v))
                        .ok_or_else(|| Error::Resource("product overflow".into()))?;
                    if best.map_or(true, |(b, _)| total < b) {
                        best = Some((total, (s, *u, *v)));
                    }
                    break; // s ascending: first admissible is pair-minimal
                }
                s += p;
            }
        }
        let _ = u_primes;
    }
    let (record, parts) = match best {
        Some((total, parts)) => (
            RepresentativeRecord::found(p, a_red, total, smooth_bound, tables)?,
            Some(parts),
        ),
        None => (RepresentativeRecord::missing(p, a_red, smooth_bound), None),
    };
    Ok(TripleSearchRep {
        record,
        parts,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tables() -> SieveTables {
        SieveTables::build(2_000_000).unwrap()
    }

    #[test]
    fn m_of_two() {
        let t = SieveTables::build(100).unwrap();
        let r = compute_m(2, &t).unwrap();
        assert_eq!(r.status, MpStatus::Finite(2));
        assert_eq!(r.per_class, vec![Some(2), Some(1)]);
    }

    #[test]
    fn m_of_five_and_seven_are_infinite() {
        let t = SieveTables::build(100).unwrap();
        // oracle: all subset products of {2,3,5} and {2,3,5,7}
        for (p, primes) in [(5u64, vec![2u64, 3, 5]), (7, vec![2, 3, 5, 7])] {
            let mut hit = vec![false; p as usize];
            for mask in 0..(1u32 << primes.len()) {
                let mut v = 1u64;
                for (i, &q) in primes.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        v *= q;
                    }
                }
                hit[(v % p) as usize] = true;
            }
            let missing: Vec<u64> = (0..p).filter(|&c| !hit[c as usize]).collect();
            assert!(!missing.is_empty());
            let r = compute_m(p, &t).unwrap();
            match r.status {
                MpStatus::Infinite { ref uncovered } => assert_eq!(*uncovered, missing),
                ref other => panic!("expected infinite for p={p}, got {other:?}"),
            }
        }
    }

    #[test]
    fn m_of_eleven_matches_subset_oracle() {
        let t = SieveTables::build(100).unwrap();
        let primes = [2u64, 3, 5, 7, 11];
        let mut minima = vec![None::<u64>; 11];
        for mask in 0..(1u32 << 5) {
            let mut v = 1u64;
            for (i, &q) in primes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v *= q;
                }
            }
            let c = (v % 11) as usize;
            if minima[c].map_or(true, |m| v < m) {
                minima[c] = Some(v);
            }
        }
        let oracle = minima.iter().map(|m| m.unwrap()).max().unwrap();
        let r = compute_m(11, &t).unwrap();
        assert_eq!(r.status, MpStatus::Finite(oracle));
        for (c, m) in r.per_class.iter().enumerate() {
            assert_eq!(*m, minima[c], "class {c}");
        }
    }

    #[test]
    fn m_witnesses_verify_predicates() {
        let t = SieveTables::build(10_000).unwrap();
        for p in [11u64, 13, 101, 499] {
            let r = compute_m(p, &t).unwrap();
            assert!(matches!(r.status, MpStatus::Finite(_)), "p={p}");
            for (c, m) in r.per_class.iter().enumerate() {
                let s = m.unwrap();
                assert_eq!(s % p, c as u64);
                let f = t.factorize(s).unwrap();
                assert!(f.is_squarefree());
                assert!(f.is_smooth(p as f64));
            }
        }
    }

    #[test]
    fn malpha_matches_linear_scan() {
        let t = tables();
        let r = compute_m_alpha_star(35, 0.9, 35 * 35, &t).unwrap();
        let y = (35f64).powf(0.9);
        for &(a, m) in &r.per_class {
            let oracle = (1..=35 * 35u64).find(|&s| {
                s % 35 == a
                    && t.is_squarefree(s).unwrap()
                    && t.is_smooth(s, y).unwrap()
            });
            assert_eq!(m, oracle, "class {a}");
        }
    }

    #[test]
    fn malpha_alpha_one_agrees_with_compute_m() {
        let t = tables();
        let p = 101u64;
        let m = compute_m(p, &t).unwrap();
        let r = compute_m_alpha_star(p, 1.0, 200_000, &t).unwrap();
        for &(a, got) in &r.per_class {
            assert_eq!(got, m.per_class[a as usize], "class {a}");
        }
        match (r.status, m.reduced_max) {
            (MalphaStatus::Finite(v), Some(rm)) => assert_eq!(v, rm),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malpha_is_monotone_in_alpha() {
        let t = tables();
        let budget = 50_000u64;
        let mut prev: Option<u64> = None;
        for &alpha in &[0.5, 0.7, 0.9, 1.0] {
            let r = compute_m_alpha_star(101, alpha, budget, &t).unwrap();
            if let MalphaStatus::Finite(v) = r.status {
                if let Some(pv) = prev {
                    assert!(v <= pv, "alpha={alpha}: {v} > {pv}");
                }
                prev = Some(v);
            }
        }
        assert!(prev.is_some());
    }

    #[test]
    fn malpha_undecided_when_budget_too_small() {
        let t = tables();
        let r = compute_m_alpha_star(97, 0.2, 97, &t).unwrap();
        match r.status {
            MalphaStatus::Undecided { ref uncovered } => assert!(!uncovered.is_empty()),
            ref o => panic!("expected undecided, got {o:?}"),
        }
    }

    #[test]
    fn prime_pair_postconditions() {
        let t = tables();
        let mut found_any = false;
        for a in 1..101u64 {
            let r = prime_pair_representative(1009, a as i64, 0.1, &t).unwrap();
            if let Some(s) = r.record.s {
                found_any = true;
                assert_eq!(s % 1009, a);
                let f = t.factorize(s).unwrap();
                assert!(f.is_squarefree());
                assert!(f.is_smooth(1009.0));
                assert!((s as f64) <= r.size_budget);
            }
        }
        assert!(found_any);
    }

    #[test]
    fn prime_pair_never_beats_unconstrained_minimum() {
        let t = tables();
        let p = 1009u64;
        let m = compute_m_alpha_star(p, 1.0, 2_000_000, &t).unwrap();
        let minima: std::collections::HashMap<u64, u64> = m
            .per_class
            .iter()
            .filter_map(|&(a, v)| v.map(|v| (a, v)))
            .collect();
        for a in [5u64, 17, 123, 900] {
            let r = prime_pair_representative(p, a as i64, 0.05, &t).unwrap();
            if let Some(s) = r.record.s {
                assert!(s >= minima[&a], "class {a}: {s} < {}", minima[&a]);
            }
        }
    }

    #[test]
    fn booker_k2_frozen_example() {
        let t = tables();
        let r = booker_lower_bound(2, &t).unwrap();
        assert_eq!((r.residue, r.modulus), (23, 225));
        assert_eq!(r.p, 23);
        // scan oracle: 4 = 2*2, 27 = 3^3, 50 = 2*5^2 all fail, 73 is prime
        assert_eq!(r.s_min, 73);
        assert!(r.s_min > 2 * r.p);
        assert!((r.ratio - 73.0 / 46.0).abs() < 1e-12);
    }

    #[test]
    fn booker_small_k() {
        let t = tables();
        let r = booker_lower_bound(1, &t).unwrap();
        assert_eq!(r.residue % 9, 5); // p = 5 mod 9
        assert!(r.ratio > 1.0);
        assert!(t.is_squarefree(r.s_min).unwrap());
        assert_eq!(r.s_min % r.p, 4 % r.p);
        for k in 2..=3u32 {
            let r = booker_lower_bound(k, &t).unwrap();
            assert!(r.ratio > 1.0, "K={k}");
            assert!(t.is_squarefree(r.s_min).unwrap());
            assert_eq!(r.s_min % r.p, 4);
        }
        assert!(booker_lower_bound(0, &t).is_err());
        assert!(booker_lower_bound(7, &t).is_err());
    }

    #[test]
    fn triple_search_matches_enumeration() {
        let t = tables();
        // full enumeration oracle over (s, u, v)
        let oracle = |p: u64, a: u64, t_bound: u64, w: f64, k: u32| -> Option<u64> {
            let hi = w.powf(1.0 / k as f64);
            let lo = 0.5 * hi;
            let primes: Vec<u64> = t.primes_in(lo, hi).to_vec();
            let mut prods: Vec<u64> = Vec::new();
            let n = primes.len();
            if k == 2 {
                for i in 0..n {
                    for j in (i + 1)..n {
                        prods.push(primes[i] * primes[j]);
                    }
                }
            } else {
                panic!("oracle built for k = 2 only");
            }
            let mut best: Option<u64> = None;
            for &u in &prods {
                for &v in &prods {
                    for s in 1..=t_bound {
                        let total = s * u * v;
                        if total % p == a
                            && t.is_squarefree(total).unwrap()
                        {
                            if best.map_or(true, |b| total < b) {
                                best = Some(total);
                            }
                        }
                    }
                }
            }
            best
        };
        // the tiny windows: [3, 6] gives only u = v = 15 which shares primes,
        // so both routes must agree on "not found"
        for a in [5u64, 17] {
            let r = smooth_squarefree_triple_search(211, a as i64, 15, 36.0, 2, &t).unwrap();
            assert_eq!(r.record.s, oracle(211, a, 15, 36.0, 2), "degenerate a={a}");
        }
        // a window with two disjoint pairs: [15, 30] = {17, 19, 23, 29}
        for a in [5u64, 17, 100, 200] {
            let r = smooth_squarefree_triple_search(211, a as i64, 15, 900.0, 2, &t).unwrap();
            assert_eq!(r.record.s, oracle(211, a, 15, 900.0, 2), "a={a}");
            if let Some(total) = r.record.s {
                let (s, u, v) = r.parts.unwrap();
                assert_eq!(s * u * v, total);
                assert_eq!(total % 211, a);
                assert!(t.is_squarefree(total).unwrap());
                assert!(gcd(u, v) == 1 && gcd(s, u * v) == 1);
            }
        }
    }
}
