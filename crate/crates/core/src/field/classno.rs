//! Class numbers by counting reduced binary quadratic forms of discriminant Δ.

use std::collections::HashSet;

use num_integer::Roots;

/// Number of reduced positive definite forms (a, b, c) with b² − 4ac = Δ < 0.
pub(crate) fn imaginary_class_number(disc: i64) -> u64 {
    assert!(disc < 0);
    let mut count = 0;
    let abs = -disc;
    // a ≤ √(|Δ|/3)
    let mut a = 1i64;
    while 3 * a * a <= abs {
        let mut b = -a + 1;
        while b <= a {
            let num = b * b - disc;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                if c >= a && !(b < 0 && (a == c)) {
                    count += 1;
                }
            }
            b += 1;
        }
        a += 1;
    }
    count
}

/// Reduced indefinite form: 0 < b < √Δ and √Δ − b < 2|a| < √Δ + b.
fn is_reduced(a: i64, b: i64, sqrt_floor: i64, disc: i64) -> bool {
    // With s = √Δ irrational, x < s ⇔ x ≤ ⌊s⌋ and s < y ⇔ ⌊s⌋ < y (for integers).
    let _ = disc;
    b > 0 && b <= sqrt_floor && 2 * a.abs() > sqrt_floor - b && 2 * a.abs() <= sqrt_floor + b
}

/// ρ(a, b, c) = (c, b′, a′) with b′ ≡ −b mod 2c and √Δ − 2|c| < b′ < √Δ.
fn rho(form: (i64, i64, i64), sqrt_floor: i64, disc: i64) -> (i64, i64, i64) {
    let (_, b, c) = form;
    let m = 2 * c.abs();
    // largest b′ ≤ ⌊√Δ⌋ with b′ ≡ −b (mod m)
    let target = (-b).rem_euclid(m);
    let mut bp = sqrt_floor - (sqrt_floor - target).rem_euclid(m);
    if bp <= sqrt_floor - m {
        bp += m;
    }
    let ap = (bp * bp - disc) / (4 * c);
    (c, bp, ap)
}

/// Narrow class number h⁺ by counting ρ-cycles of reduced forms, converted to h.
pub(crate) fn real_class_number(disc: i64, unit_norm_negative: bool) -> u64 {
    assert!(disc > 0);
    let s = disc.sqrt();
    let mut reduced = Vec::new();
    let mut b = s;
    while b > 0 {
        if (b - disc).rem_euclid(2) == 0 {
            let ac = (b * b - disc) / 4; // negative
            let prod = -ac;
            let mut a = 1i64;
            while a * a <= prod {
                if prod % a == 0 {
                    for x in [a, prod / a] {
                        for sign in [1, -1] {
                            let aa = sign * x;
                            let cc = ac / aa;
                            if is_reduced(aa, b, s, disc) {
                                reduced.push((aa, b, cc));
                            }
                        }
                    }
                }
                a += 1;
            }
        }
        b -= 1;
    }
    let forms: HashSet<_> = reduced.into_iter().collect();
    let mut seen = HashSet::new();
    let mut ordered: Vec<_> = forms.iter().copied().collect();
    ordered.sort();
    let mut cycles = 0u64;
    for f in ordered {
        if seen.contains(&f) {
            continue;
        }
        cycles += 1;
        let mut g = f;
        loop {
            seen.insert(g);
            g = rho(g, s, disc);
            debug_assert!(forms.contains(&g), "rho left the reduced set at {g:?}");
            if g == f {
                break;
            }
        }
    }
    if unit_norm_negative {
        cycles
    } else {
        cycles / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imaginary_small() {
        assert_eq!(imaginary_class_number(-4), 1);
        assert_eq!(imaginary_class_number(-3), 1);
        assert_eq!(imaginary_class_number(-20), 2);
        assert_eq!(imaginary_class_number(-23), 3);
        assert_eq!(imaginary_class_number(-56), 4);
        assert_eq!(imaginary_class_number(-163), 1);
    }

    #[test]
    fn narrow_class_numbers() {
        // Q(√3): N(ε) = +1, h⁺ = 2, h = 1.
        assert_eq!(real_class_number(12, false), 1);
        assert_eq!(real_class_number(8, true), 1);
        assert_eq!(real_class_number(40, true), 2);
        assert_eq!(real_class_number(316, false), 3);
        assert_eq!(real_class_number(229, true), 3);
    }
}
