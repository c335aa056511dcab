//! Count reports and byte-stable numeric formatting.

/// Result of one congruence-counting or census experiment: the exact count,
/// the predicted main term, and the reference error bound when one applies.
#[derive(Debug, Clone)]
pub struct CountReport {
    pub label: String,
    pub params: Vec<(String, f64)>,
    pub exact_count: u64,
    pub main_term: f64,
    pub error_bound: Option<f64>,
    pub relative_deviation: f64,
    pub flag: Option<String>,
}

impl CountReport {
    pub fn new(
        label: &str,
        params: &[(&str, f64)],
        exact_count: u64,
        main_term: f64,
        error_bound: Option<f64>,
    ) -> Self {
        let relative_deviation = (exact_count as f64 - main_term).abs() / main_term.max(1.0);
        CountReport {
            label: label.to_string(),
            params: params
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
            exact_count,
            main_term,
            error_bound,
            relative_deviation,
            flag: None,
        }
    }

    pub fn with_flag(mut self, flag: &str) -> Self {
        self.flag = Some(flag.to_string());
        self
    }
}

/// Significant digits used for every floating-point report field.
pub const REPORT_SIG_DIGITS: usize = 12;

/// Formats `x` rounded to 12 significant digits.
pub fn fmt_f64(x: f64) -> String {
    fmt_sig(x, REPORT_SIG_DIGITS)
}

/// Rounds `x` to `sig` significant decimal digits with ties-to-even and
/// renders it without trailing zeros. The rounding inspects the full exact
/// decimal expansion of the double, so results are reproducible bytes.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let neg = x < 0.0;
    // A double's exact decimal expansion has at most 767 significant digits;
    // this captures all of them, so tie detection below is exact.
    let s = format!("{:.*e}", 766, x.abs());
    let (mantissa, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: Vec<u8> = mantissa
        .bytes()
        .filter(|&b| b != b'.')
        .map(|b| b - b'0')
        .collect();

    let (mut kept, mut exp) = (digits[..sig.min(digits.len())].to_vec(), exp);
    if digits.len() > sig {
        let first_dropped = digits[sig];
        let tail_nonzero = digits[sig + 1..].iter().any(|&d| d != 0);
        let round_up = match first_dropped.cmp(&5) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => tail_nonzero || kept[sig - 1] % 2 == 1,
        };
        if round_up {
            let mut i = sig;
            loop {
                if i == 0 {
                    kept.insert(0, 1);
                    kept.pop();
                    exp += 1;
                    break;
                }
                i -= 1;
                if kept[i] == 9 {
                    kept[i] = 0;
                } else {
                    kept[i] += 1;
                    break;
                }
            }
        }
    }
    while kept.len() > 1 && *kept.last().unwrap() == 0 {
        kept.pop();
    }

    let body = render_digits(&kept, exp);
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Renders digits with decimal exponent `exp` (value = 0.d1d2... * 10^(exp+1)
/// in the usual scientific normalization d1.d2... * 10^exp).
fn render_digits(digits: &[u8], exp: i32) -> String {
    let digit_str: String = digits.iter().map(|&d| (d + b'0') as char).collect();
    let n = digits.len() as i32;
    if exp >= -5 && exp < 18 {
        if exp >= n - 1 {
            // integer with possible trailing zeros
            let zeros = (exp - (n - 1)) as usize;
            format!("{digit_str}{}", "0".repeat(zeros))
        } else if exp >= 0 {
            let split = (exp + 1) as usize;
            format!("{}.{}", &digit_str[..split], &digit_str[split..])
        } else {
            let zeros = (-exp - 1) as usize;
            format!("0.{}{digit_str}", "0".repeat(zeros))
        }
    } else {
        let head = &digit_str[..1];
        let tail = &digit_str[1..];
        if tail.is_empty() {
            format!("{head}e{exp}")
        } else {
            format!("{head}.{tail}e{exp}")
        }
    }
}

/// Formats an optional value, empty string when absent.
pub fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
