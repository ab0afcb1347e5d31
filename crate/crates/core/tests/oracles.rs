use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restricta::arcs::{ArcKind, Classifier};
use restricta::fourier::{
    cell_refined_max, cell_sin_bound, digit_window_sum, sin_bound, DigitWindow, MaxSettings,
};
use restricta::DigitSystem;

#[test]
fn bound_chain_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let settings = MaxSettings::default();
    for _ in 0..10_000 {
        let q = rng.gen_range(3..60u32);
        let b = rng.gen_range(0..q);
        let sys = DigitSystem::excluding(q, &[b]).unwrap();
        let phi: f64 = rng.gen();
        let t = ((phi * q as f64) as u32).min(q - 1);
        let f = digit_window_sum(&sys, phi);
        let window = DigitWindow::new(&sys);
        let refined = cell_refined_max(&window, q, t, settings).upper;
        let cell = cell_sin_bound(q, t);
        let pointwise = sin_bound(&sys, phi).unwrap();
        assert!(
            f <= refined + 1e-9,
            "q={q} b={b} phi={phi}: {f} > refined {refined}"
        );
        assert!(
            f <= pointwise + 1e-9,
            "q={q} b={b} phi={phi}: {f} > sine bound {pointwise}"
        );
        assert!(pointwise <= cell + 1e-9);
        // the refined maximum is within its relative tolerance of the true cell maximum
        assert!(
            refined <= cell * (1.0 + 2.0 * settings.rel_tol) + 1e-9,
            "q={q} t={t}: {refined} > {cell}"
        );
    }
}

/// Smallest `s ≤ L` with some reduced `r/s` satisfying `|j − rN/s| ≤ L`, and
/// among those `r` the least error, by direct search.
fn brute_classify(j: i128, n: i128, l_num: i128, bits: u32) -> Option<(i128, i128, f64)> {
    let l_floor = l_num >> bits;
    for s in 1..=l_floor {
        let mut best: Option<(i128, f64)> = None;
        for r in 0..=s {
            if num_integer::gcd(r, s) != 1 {
                continue;
            }
            let diff = (j * s - r * n).abs();
            if (diff << bits) <= l_num * s {
                let e = diff as f64 / s as f64;
                if best.is_none_or(|(_, be)| e < be) {
                    best = Some((r, e));
                }
            }
        }
        if let Some((r, e)) = best {
            return Some((r, s, e));
        }
    }
    None
}

#[test]
fn classification_matches_brute_force() {
    const BITS: u32 = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for &a in &[1.0, 1.5, 2.0] {
        let c = Classifier::new(10, 6, a).unwrap();
        let n = c.modulus() as i128;
        let l_num = (c.window() * (1u64 << BITS) as f64) as i128;
        for _ in 0..1000 {
            let j = rng.gen_range(0..n);
            let got = c.classify(j as u128);
            match brute_classify(j, n, l_num, BITS) {
                None => assert_eq!(got.class, ArcKind::Minor, "j={j}"),
                Some((_, s, e)) => {
                    assert_ne!(got.class, ArcKind::Minor, "j={j}");
                    assert_eq!(got.witness.s as i128, s, "j={j}");
                    assert!((got.error - e).abs() < 1e-9, "j={j}");
                    let expected = if 10 % s == 0 {
                        ArcKind::PrimaryMajor
                    } else if restricta::arcs::is_smooth_over(10, s as u64) {
                        ArcKind::SmoothMajor
                    } else {
                        ArcKind::NonSmoothMajor
                    };
                    assert_eq!(got.class, expected, "j={j}");
                }
            }
        }
    }
}
