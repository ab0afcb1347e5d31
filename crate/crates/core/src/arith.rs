//! Elementary arithmetic: gcd, deterministic Miller–Rabin, factorization,
//! Euler φ and Möbius μ.

pub use num_integer::gcd;

/// Trial-division bound for certified factorizations.
pub const TRIAL_BOUND: u64 = 1_000_000;

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
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

/// Deterministic primality for all `u64` (Miller–Rabin with the first twelve
/// prime bases).
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
///
/// Trial division up to [`TRIAL_BOUND`]; a remaining cofactor is accepted
/// only if it is prime, otherwise `None`.
pub fn factorize(mut n: u64) -> Option<Vec<(u64, u32)>> {
    let mut out = Vec::new();
    if n <= 1 {
        return Some(out);
    }
    let mut p = 2u64;
    while p * p <= n && p <= TRIAL_BOUND {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        if p * p > n || is_prime_u64(n) {
            out.push((n, 1));
        } else {
            return None;
        }
    }
    Some(out)
}

/// Factorization of numbers small enough that trial division always finishes.
pub fn factor_small(n: u64) -> Vec<(u64, u32)> {
    assert!(
        n <= TRIAL_BOUND * TRIAL_BOUND,
        "factor_small: {n} too large"
    );
    factorize(n).expect("trial division is complete below TRIAL_BOUND^2")
}

/// Complete factorization of any `u64`, finishing the cofactor left by trial
/// division with Pollard–Brent.
pub fn factorize_full(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p < 1000 && p * p <= m {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    let mut stack = if m > 1 { vec![m] } else { Vec::new() };
    let mut big = Vec::new();
    while let Some(c) = stack.pop() {
        if is_prime_u64(c) {
            big.push(c);
            continue;
        }
        let d = pollard_brent(c);
        stack.push(d);
        stack.push(c / d);
    }
    big.sort_unstable();
    for q in big {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out
}

/// A nontrivial factor of an odd composite `n` with no factor below 1000.
fn pollard_brent(n: u64) -> u64 {
    let f = |x: u64, c: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
    for c in 1u64.. {
        let (mut y, mut g, mut r, mut q) = (2u64, 1u64, 1u64, 1u64);
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y, c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..128.min(r - k) {
                    y = f(y, c);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys, c);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

pub fn euler_phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factorize_full(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i32 {
    let f = factorize_full(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Euler φ for `0..=n` by a linear sieve.
pub fn phi_table(n: usize) -> Vec<u32> {
    let mut phi: Vec<u32> = (0..=n as u32).collect();
    for i in 2..=n {
        if phi[i] == i as u32 {
            let mut j = i;
            while j <= n {
                phi[j] -= phi[j] / i as u32;
                j += i;
            }
        }
    }
    phi
}

/// Smallest-prime-factor table for `0..=n` (`spf[0] = spf[1] = 0`).
pub fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Primes up to `n` by a plain sieve; for small helper tables.
pub fn small_primes(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime_u64(n), trial(n), "n={n}");
        }
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn factorization_roundtrip() {
        for n in 1..5000u64 {
            let f = factorize(n).unwrap();
            assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
            assert!(f.iter().all(|&(p, _)| trial(p)));
        }
    }

    #[test]
    fn large_semiprime_is_refused() {
        // both factors exceed the trial bound
        let n = 1_000_003u64 * 1_000_033;
        assert!(factorize(n).is_none());
        let p = 1_000_000_007u64;
        assert_eq!(factorize(2 * p).unwrap(), vec![(2, 1), (p, 1)]);
    }

    #[test]
    fn full_factorization() {
        let n = 1_000_003u64 * 1_000_033;
        assert_eq!(factorize_full(n), vec![(1_000_003, 1), (1_000_033, 1)]);
        let n = 2u64 * 3 * 3 * 4_294_967_291;
        assert_eq!(factorize_full(n), vec![(2, 1), (3, 2), (4_294_967_291, 1)]);
        for n in 1..3000u64 {
            assert_eq!(factorize_full(n), factorize(n).unwrap());
        }
    }

    #[test]
    fn phi_and_mobius_tables_agree() {
        let t = phi_table(1000);
        for n in 1..=1000u64 {
            assert_eq!(t[n as usize] as u64, euler_phi(n));
        }
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(4), 0);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(30), -1);
    }
}
