//! Multiplicative character groups modulo q, character sums over square-free
//! integers, the mean-value inequality, and the exceptional-prime census.
//!
//! Characters are represented exactly by exponent vectors on a fixed
//! generator basis (primitive roots for odd prime powers, the two-generator
//! structure for powers of two). Evaluation assembles an exact rational
//! phase and converts to a complex number only at the very end, so the only
//! floating-point error is the final `cos`/`sin` call and the accumulation
//! of at most one ulp per summand.

use num_complex::Complex64;

use crate::arith::{gcd, mul_mod, SieveTables};
use crate::error::{Error, Result};
use crate::parallel;

/// Largest modulus for which a character group will be constructed.
pub const CHAR_GROUP_LIMIT: u64 = 1_000_000;

struct Component {
    /// Prime-power modulus this component acts on.
    modulus: u64,
    /// Generator of the component (global lift, for structure checks).
    generator: u64,
    order: u64,
    /// Discrete log of each unit modulo `modulus`; `u32::MAX` off the units.
    dlog: Vec<u32>,
}

/// Unit group structure modulo `q`: generators, component orders and a
/// discrete-log table. Immutable after construction.
pub struct CharacterGroup {
    q: u64,
    phi: u64,
    order_lcm: u64,
    components: Vec<Component>,
}

/// A character, identified by one exponent per group component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Character {
    pub exponents: Vec<u64>,
}

impl Character {
    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }
}

/// One character sum with its tracked rounding budget.
#[derive(Debug, Clone, Copy)]
pub struct CharSum {
    pub value: Complex64,
    /// Upper bound on the accumulated floating-point error.
    pub rounding_bound: f64,
}

impl CharacterGroup {
    /// Builds the full character group modulo `q >= 2`.
    pub fn build(q: u64, tables: &SieveTables) -> Result<Self> {
        if q < 2 {
            return Err(Error::Domain(format!("character group needs q >= 2, got {q}")));
        }
        if q > CHAR_GROUP_LIMIT {
            return Err(Error::Resource(format!(
                "character group modulus {q} exceeds limit {CHAR_GROUP_LIMIT}"
            )));
        }
        let fact = tables.factorize(q)?;
        let mut components = Vec::new();
        for &(p, e) in &fact.factors {
            let pe = p.pow(e);
            if p == 2 {
                match e {
                    1 => {} // trivial unit group
                    2 => components.push(two_power_low_component(q)?),
                    _ => {
                        components.push(two_power_sign_component(q, pe, e)?);
                        components.push(two_power_main_component(q, pe, e)?);
                    }
                }
            } else {
                components.push(odd_prime_power_component(q, p, e, tables)?);
            }
        }
        let phi = fact.euler_phi();
        let mut order_lcm = 1u64;
        for c in &components {
            order_lcm = order_lcm / gcd(order_lcm, c.order) * c.order;
        }
        Ok(CharacterGroup {
            q,
            phi,
            order_lcm,
            components,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Group size, equal to Euler phi of the modulus.
    pub fn size(&self) -> u64 {
        self.phi
    }

    pub fn component_orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    pub fn generators(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.generator).collect()
    }

    /// Exponent vector of a unit `n` on the generator basis, or `None` when
    /// `gcd(n, q) > 1`.
    pub fn dlog(&self, n: i64) -> Option<Vec<u64>> {
        let r = n.rem_euclid(self.q as i64) as u64;
        if gcd(r, self.q) != 1 {
            return None;
        }
        let mut out = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let v = c.dlog[(r % c.modulus) as usize];
            if v == u32::MAX {
                return None;
            }
            out.push(v as u64);
        }
        Some(out)
    }

    pub fn principal(&self) -> Character {
        Character {
            exponents: vec![0; self.components.len()],
        }
    }

    /// All characters in a fixed mixed-radix order, principal first.
    pub fn characters(&self) -> Vec<Character> {
        let orders: Vec<u64> = self.component_orders();
        let mut out = Vec::with_capacity(self.phi as usize);
        let mut exps = vec![0u64; orders.len()];
        loop {
            out.push(Character {
                exponents: exps.clone(),
            });
            let mut i = exps.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                exps[i] += 1;
                if exps[i] < orders[i] {
                    break;
                }
                exps[i] = 0;
            }
        }
    }

    pub fn nonprincipal_characters(&self) -> Vec<Character> {
        self.characters()
            .into_iter()
            .filter(|c| !c.is_principal())
            .collect()
    }

    /// Evaluates `chi(n)`: a root of unity on units, exactly 0 otherwise.
    pub fn eval(&self, chi: &Character, n: i64) -> Complex64 {
        match self.phase_numerator(chi, n) {
            None => Complex64::new(0.0, 0.0),
            Some(0) => Complex64::new(1.0, 0.0),
            Some(t) => {
                let theta = 2.0 * std::f64::consts::PI * (t as f64) / (self.order_lcm as f64);
                Complex64::new(theta.cos(), theta.sin())
            }
        }
    }

    /// Exact phase of `chi(n)` as a numerator over `order_lcm`, or `None`
    /// off the units.
    fn phase_numerator(&self, chi: &Character, n: i64) -> Option<u64> {
        let r = n.rem_euclid(self.q as i64) as u64;
        let mut t: u128 = 0;
        for (c, &e) in self.components.iter().zip(&chi.exponents) {
            let v = c.dlog[(r % c.modulus) as usize];
            if v == u32::MAX {
                return None;
            }
            t += e as u128 * v as u128 * (self.order_lcm / c.order) as u128;
        }
        Some((t % self.order_lcm as u128) as u64)
    }

    /// Character sum over square-free integers `s <= t`.
    pub fn squarefree_char_sum(
        &self,
        chi: &Character,
        t: u64,
        tables: &SieveTables,
    ) -> Result<CharSum> {
        if t < 1 || t > self.q {
            return Err(Error::Domain(format!(
                "square-free char sum needs 1 <= t <= q, got t={t}, q={}",
                self.q
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 1..=t {
            if tables.mobius(s) != 0 {
                acc += self.eval(chi, s as i64);
            }
        }
        Ok(CharSum {
            value: acc,
            rounding_bound: t as f64 * 2f64.powi(-45),
        })
    }

    /// Maximum of `|S_chi(t)|` over nonprincipal characters, with the argmax
    /// exponent vector and the observed exponent `ln(max)/ln(t)`.
    pub fn max_nonprincipal_sf_sum(
        &self,
        t: u64,
        tables: &SieveTables,
    ) -> Result<MaxSfSum> {
        if self.phi <= 1 {
            return Err(Error::Domain(format!(
                "no nonprincipal characters modulo {}",
                self.q
            )));
        }
        let chars = self.nonprincipal_characters();
        let sums = parallel::map_collect(chars, |chi| {
            let s = self
                .squarefree_char_sum(&chi, t, tables)
                .expect("t validated above");
            (s.value.norm(), chi)
        });
        let mut best = None::<(f64, Character)>;
        for (abs, chi) in sums {
            let better = match &best {
                None => true,
                Some((b, _)) => abs > *b,
            };
            if better {
                best = Some((abs, chi));
            }
        }
        let (max_abs, argmax) = best.expect("at least one nonprincipal character");
        let exponent = if t > 1 && max_abs > 0.0 {
            max_abs.ln() / (t as f64).ln()
        } else {
            0.0
        };
        Ok(MaxSfSum {
            max_abs,
            argmax,
            exponent,
        })
    }

    /// Mean-value inequality for an arbitrary coefficient vector:
    /// `sum_chi |sum_n a_n chi(n)|^2 <= phi(q) (N/q + 1) sum |a_n|^2`.
    pub fn mean_value_check(&self, coefficients: &[Complex64]) -> MeanValueCheck {
        let n_max = coefficients.len() as u64;
        let mut lhs = 0.0f64;
        for chi in self.characters() {
            let mut inner = Complex64::new(0.0, 0.0);
            for (idx, a) in coefficients.iter().enumerate() {
                if a.norm_sqr() != 0.0 {
                    inner += a * self.eval(&chi, idx as i64 + 1);
                }
            }
            lhs += inner.norm_sqr();
        }
        let weight: f64 = coefficients.iter().map(|a| a.norm_sqr()).sum();
        let rhs = self.phi as f64 * (n_max as f64 / self.q as f64 + 1.0) * weight;
        MeanValueCheck {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + 2f64.powi(-30)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MaxSfSum {
    pub max_abs: f64,
    pub argmax: Character,
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MeanValueCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn odd_prime_power_component(
    q: u64,
    p: u64,
    e: u32,
    tables: &SieveTables,
) -> Result<Component> {
    let pe = p.pow(e);
    let g = primitive_root_mod_p(p, tables)?;
    // a primitive root mod p lifts to p^e unless it fixes p^2
    let g = if e >= 2 && crate::arith::pow_mod(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    };
    let order = pe / p * (p - 1);
    let mut dlog = vec![u32::MAX; pe as usize];
    let mut x = 1u64;
    for k in 0..order {
        dlog[x as usize] = k as u32;
        x = mul_mod(x, g, pe);
    }
    Ok(Component {
        modulus: pe,
        generator: lift(g, pe, q)?,
        order,
        dlog,
    })
}

fn two_power_low_component(q: u64) -> Result<Component> {
    // modulus 4: units {1, 3}, generated by 3
    Ok(Component {
        modulus: 4,
        generator: lift(3, 4, q)?,
        order: 2,
        dlog: vec![u32::MAX, 0, u32::MAX, 1],
    })
}

fn two_power_sign_component(q: u64, pe: u64, e: u32) -> Result<Component> {
    // 2^e, e >= 3: every unit is (-1)^a * 3^b uniquely; this is the sign bit
    let order = 1u64 << (e - 2);
    let mut dlog = vec![u32::MAX; pe as usize];
    let mut x = 1u64;
    for _ in 0..order {
        dlog[x as usize] = 0;
        dlog[(pe - x) as usize] = 1;
        x = mul_mod(x, 3, pe);
    }
    Ok(Component {
        modulus: pe,
        generator: lift(pe - 1, pe, q)?,
        order: 2,
        dlog,
    })
}

fn two_power_main_component(q: u64, pe: u64, e: u32) -> Result<Component> {
    // 2^e, e >= 3: the cyclic factor generated by 3 of order 2^(e-2);
    // every unit is +-3^k
    let order = 1u64 << (e - 2);
    let mut dlog = vec![u32::MAX; pe as usize];
    let mut x = 1u64;
    for k in 0..order {
        dlog[x as usize] = k as u32;
        dlog[(pe - x) as usize] = k as u32;
        x = mul_mod(x, 3, pe);
    }
    Ok(Component {
        modulus: pe,
        generator: lift(3, pe, q)?,
        order,
        dlog,
    })
}

/// Lifts a residue mod `pe` to the element of (Z/q)* that is `g` mod `pe`
/// and 1 modulo the cofactor.
fn lift(g: u64, pe: u64, q: u64) -> Result<u64> {
    let cof = q / pe;
    if cof == 1 {
        return Ok(g % pe);
    }
    let (r, _) = crate::arith::crt_solve(&[(g as i64, pe), (1, cof)])?;
    Ok(r)
}

/// Smallest primitive root modulo an odd prime `p`.
pub fn primitive_root_mod_p(p: u64, tables: &SieveTables) -> Result<u64> {
    if p == 2 {
        return Ok(1);
    }
    let fact = tables.factorize(p - 1)?;
    'cand: for g in 2..p {
        for &(f, _) in &fact.factors {
            if crate::arith::pow_mod(g, (p - 1) / f, p) == 1 {
                continue 'cand;
            }
        }
        return Ok(g);
    }
    Err(Error::Domain(format!("{p} is not prime")))
}

/// One row of the exceptional-prime census.
#[derive(Debug, Clone)]
pub struct CensusRow {
    pub prime: u64,
    pub max_abs: f64,
    pub exponent: f64,
    pub violates: bool,
}

/// Census of primes `p` in `[Q, 2Q]` whose maximal nonprincipal square-free
/// character sum up to `t` exceeds `t^(1-delta)`.
#[derive(Debug, Clone)]
pub struct CensusReport {
    pub q: u64,
    pub t: u64,
    pub delta: f64,
    pub bound: f64,
    pub rows: Vec<CensusRow>,
    pub violation_count: usize,
    /// Fractional part of `2 log Q / log t`.
    pub gamma: f64,
    /// Both candidate exponents `(1-2d)g` and `2d(1-g)`; the predicted
    /// exceptional-count exponent is their minimum.
    pub theta_candidates: (f64, f64),
    pub predicted_exceptional: f64,
}

pub fn exceptional_prime_census(
    q: u64,
    t: u64,
    delta: f64,
    tables: &SieveTables,
) -> Result<CensusReport> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::Domain(format!(
            "census needs 0 < delta < 1/4, got {delta}"
        )));
    }
    if t < 2 {
        return Err(Error::Domain("census needs t >= 2".into()));
    }
    let primes: Vec<u64> = tables
        .primes_in(q as f64, 2.0 * q as f64)
        .iter()
        .copied()
        .filter(|&p| t <= p)
        .collect();
    let bound = (t as f64).powf(1.0 - delta);
    let rows = parallel::map_collect(primes, |p| {
        let group = CharacterGroup::build(p, tables).expect("prime modulus in range");
        let m = group
            .max_nonprincipal_sf_sum(t, tables)
            .expect("p > 2 prime");
        CensusRow {
            prime: p,
            max_abs: m.max_abs,
            exponent: m.exponent,
            violates: m.max_abs > bound,
        }
    });
    let violation_count = rows.iter().filter(|r| r.violates).count();
    let gamma = (2.0 * (q as f64).ln() / (t as f64).ln()).fract();
    let theta1 = (1.0 - 2.0 * delta) * gamma;
    let theta2 = 2.0 * delta * (1.0 - gamma);
    let theta = theta1.min(theta2);
    let predicted_exceptional = (q as f64).powf(4.0 * delta) * (t as f64).powf(theta);
    Ok(CensusReport {
        q,
        t,
        delta,
        bound,
        rows,
        violation_count,
        gamma,
        theta_candidates: (theta1, theta2),
        predicted_exceptional,
    })
}
