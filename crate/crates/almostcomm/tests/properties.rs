//! Property tests for the format and linear-algebra invariants.

use almostcomm::io::{cmat_from_str, cmat_to_string, parse_complex};
use almostcomm::linalg::{
    operator_norm, pfaffian_sign, polar_unitary, unitary_error, ComplexMatrix,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn finite_f64() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e12f64..1e12,
        -1.0f64..1.0,
        Just(0.0),
        Just(-0.0),
        Just(1.5e-300),
        Just(-7.25),
    ]
}

fn small_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((finite_f64(), finite_f64()), n * n).prop_map(move |cells| {
        ComplexMatrix::from_fn(n, n, |i, j| {
            let (re, im) = cells[i * n + j];
            Complex64::new(re, im)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cmat_round_trip_is_bit_exact(m in small_matrix(4)) {
        let text = cmat_to_string(&m);
        let back = cmat_from_str(&text, "prop").unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.abs().to_bits(), b.im.abs().to_bits());
            // sign of zero is allowed to normalize, everything else is exact
            if a.im != 0.0 {
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn complex_token_parses_what_it_prints(re in finite_f64(), im in finite_f64()) {
        let z = Complex64::new(re, im);
        let token = almostcomm::io::format_complex(z);
        let back = parse_complex(&token).unwrap();
        prop_assert_eq!(back.re.to_bits(), z.re.to_bits());
        prop_assert_eq!(back.im.abs().to_bits(), z.im.abs().to_bits());
    }

    #[test]
    fn polar_factor_is_always_unitary(m in small_matrix(5)) {
        let scale = operator_norm(&m).unwrap();
        if scale > 1e-8 {
            let (u, p) = polar_unitary(&m).unwrap();
            prop_assert!(unitary_error(&u) <= 1e-9);
            let recon = operator_norm(&(&u * &p - &m)).unwrap();
            prop_assert!(recon <= 1e-8 * scale.max(1.0));
        }
    }

    #[test]
    fn pfaffian_sign_squares_to_one(entries in prop::collection::vec(-1.0f64..1.0, 15)) {
        let n = 6;
        let mut m = ComplexMatrix::zeros(n, n);
        let mut it = entries.into_iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = it.next().unwrap();
                m[(i, j)] = Complex64::new(v, 0.0);
                m[(j, i)] = Complex64::new(-v, 0.0);
            }
        }
        match pfaffian_sign(&m) {
            Ok(s) => {
                prop_assert_eq!(s * s, 1);
                // Pf(A)^2 = det(A): the sign of det must be positive
                let det = m.determinant();
                prop_assert!(det.re > 0.0);
            }
            Err(_) => {} // near-singular inputs are allowed to refuse
        }
    }
}
