use k3cls_core::aut::is_isometric;
use k3cls_core::error::Error;
use k3cls_core::genus::*;
use k3cls_core::lattice::Lattice;
use k3cls_core::linalg::IntMatrix;
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

fn lat(rows: &[&[i64]]) -> Lattice {
    Lattice::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// First invariant lattice of each table row with its printed genus.
fn table_rows() -> Vec<(u32, Lattice, &'static str)> {
    vec![
        (54, lat(&[&[2, 0, 0], &[0, 16, 8], &[0, 8, 16]]), "2^{+1}_1, 8^{-2}_{II}, 3^{+1}"),
        (62, lat(&[&[6, 0, 3], &[0, 6, 3], &[3, 3, 12]]), "4^{+1}_7, 3^{+2}, 9^{+1}"),
        (63, lat(&[&[2, 0, 0], &[0, 12, 6], &[0, 6, 12]]), "2^{-3}_1, 3^{+1}, 9^{+1}"),
        (70, lat(&[&[4, 1, 0], &[1, 4, 0], &[0, 0, 20]]), "4^{-1}_5, 3^{-1}, 5^{-2}"),
        (74, lat(&[&[2, 1, 0], &[1, 4, 0], &[0, 0, 28]]), "4^{+1}_7, 7^{+2}"),
        (76, lat(&[&[4, 0, 0], &[0, 8, 0], &[0, 0, 12]]), "4^{-2}_4, 8^{+1}_1, 3^{+1}"),
        (77, lat(&[&[4, 0, 0], &[0, 8, 4], &[0, 4, 8]]), "4^{-3}_1, 3^{-1}"),
        (78, lat(&[&[8, 4, 4], &[4, 8, 2], &[4, 2, 8]]), "2^{+2}_{II}, 8^{+1}_7, 3^{+2}"),
        (79, lat(&[&[2, 1, 0], &[1, 8, 0], &[0, 0, 12]]), "4^{-1}_3, 3^{+2}, 5^{+1}"),
        (80, lat(&[&[4, 0, 0], &[0, 8, 0], &[0, 0, 8]]), "4^{+1}_1, 8^{+2}_2"),
        (81, lat(&[&[4, 0, 2], &[0, 4, 2], &[2, 2, 12]]), "2^{-2}_{II}, 8^{+1}_7, 5^{-1}"),
    ]
}

/// Rows with two invariant lattices in one genus.
fn split_pairs() -> Vec<(u32, Lattice, Lattice)> {
    vec![
        (
            70,
            lat(&[&[4, 1, 0], &[1, 4, 0], &[0, 0, 20]]),
            lat(&[&[4, 2, 2], &[2, 6, 1], &[2, 1, 16]]),
        ),
        (
            74,
            lat(&[&[2, 1, 0], &[1, 4, 0], &[0, 0, 28]]),
            lat(&[&[4, 2, 2], &[2, 8, 1], &[2, 1, 8]]),
        ),
        (
            79,
            lat(&[&[2, 1, 0], &[1, 8, 0], &[0, 0, 12]]),
            lat(&[&[6, 0, 3], &[0, 6, 3], &[3, 3, 8]]),
        ),
    ]
}

#[test]
fn normalization_of_printed_symbols() {
    assert_eq!(normalize_symbol("2^{+1}_1, 8^{-2}_{II}, 3^{+1}"), "2^{+1}_1 8^{-2}_{II} 3^{+1}");
    assert_eq!(normalize_symbol("2^{+1}_1,\\ 3^{+1}"), "2^{+1}_1 3^{+1}");
}

fn printed(s: &str) -> String {
    normalize_symbol(s).replace("{II}", "II")
}

#[test]
fn genus_symbols_of_table_rows() {
    for (no, l, expect) in table_rows() {
        let g = genus_symbol(&l).unwrap();
        assert_eq!(g.to_string(), printed(expect), "row {no}");
    }
}

#[test]
fn symbol_reconstructs_determinant() {
    for (no, l, _) in table_rows() {
        let g = genus_symbol(&l).unwrap();
        assert_eq!(g.abs_det(), l.det().abs(), "row {no}");
    }
}

#[test]
fn jordan_of_a1_at_two() {
    let c = padic_jordan(&lat(&[&[2]]), 2).unwrap();
    assert_eq!(
        c,
        vec![Constituent { scale_exp: 1, rank: 1, sign: 1, odd: true, oddity: 1 }]
    );
}

#[test]
fn jordan_of_hyperbolic_plane() {
    let c = padic_jordan(&lat(&[&[0, 1], &[1, 0]]), 2).unwrap();
    assert_eq!(
        c,
        vec![Constituent { scale_exp: 0, rank: 2, sign: 1, odd: false, oddity: 0 }]
    );
    let c = padic_jordan(&lat(&[&[2, 1], &[1, 2]]), 2).unwrap();
    assert_eq!(c[0].sign, -1);
    assert!(!c[0].odd);
}

#[test]
fn jordan_at_odd_prime() {
    // diag(2, 6, 12) at 3: unit 2 at scale 1, units 2 and 4 at scale 3
    let l = lat(&[&[2, 0, 0], &[0, 6, 0], &[0, 0, 12]]);
    let c = padic_jordan(&l, 3).unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!((c[0].scale_exp, c[0].rank, c[0].sign), (0, 1, -1));
    assert_eq!((c[1].scale_exp, c[1].rank, c[1].sign), (1, 2, -1));
}

#[test]
fn jordan_needs_off_diagonal_pivot() {
    // the minimum valuation sits off the diagonal
    let c = padic_jordan(&lat(&[&[0, 3], &[3, 0]]), 3).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!((c[0].scale_exp, c[0].rank), (1, 2));
    // -9 = det; unit part -1 is a non-square mod 3
    assert_eq!(c[0].sign, -1);
}

#[test]
fn jordan_rejects_composite() {
    assert!(matches!(padic_jordan(&lat(&[&[2]]), 6), Err(Error::Invalid(_))));
}

#[test]
fn genus_rejects_odd_lattice() {
    assert!(matches!(genus_symbol(&lat(&[&[1]])), Err(Error::OddLattice)));
}

#[test]
fn unimodular_even_lattice_has_empty_rendering() {
    let g = genus_symbol(&lat(&[&[0, 1], &[1, 0]])).unwrap();
    assert_eq!(g.to_string(), "");
    assert_eq!(g.abs_det(), BigInt::from(1));
}

#[test]
fn split_pairs_share_genus_but_are_not_isometric() {
    for (no, a, b) in split_pairs() {
        assert!(same_genus(&a, &b).unwrap(), "row {no}");
        assert!(is_isometric(&a, &b).unwrap().is_none(), "row {no}");
    }
}

#[test]
fn different_rows_have_different_genera() {
    let rows = table_rows();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            assert!(!same_genus(&rows[i].1, &rows[j].1).unwrap());
        }
    }
}

#[test]
fn signature_separates_genera() {
    let a = lat(&[&[2]]);
    let b = lat(&[&[-2]]);
    assert!(!same_genus(&a, &b).unwrap());
}

#[test]
fn prime_divisors_examples() {
    assert_eq!(prime_divisors(&BigInt::from(1)), Vec::<u64>::new());
    assert_eq!(prime_divisors(&BigInt::from(-360)), vec![2, 3, 5]);
    assert_eq!(prime_divisors(&BigInt::from(97)), vec![97]);
}

fn unimodular(entries: &[i64; 3], swaps: u8) -> IntMatrix {
    // product of elementary matrices, so det = +-1
    let mut u = IntMatrix::identity(3);
    u.add_row_multiple(0, 1, &BigInt::from(entries[0]));
    u.add_row_multiple(1, 2, &BigInt::from(entries[1]));
    u.add_row_multiple(2, 0, &BigInt::from(entries[2]));
    if swaps & 1 == 1 {
        u.swap_rows(0, 2);
    }
    if swaps & 2 == 2 {
        u.negate_row(1);
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn genus_is_invariant_under_congruence(
        i in 0usize..11,
        e in prop::array::uniform3(-3i64..=3),
        s in 0u8..4,
    ) {
        let (_, l, _) = &table_rows()[i];
        let u = unimodular(&e, s);
        let h = Lattice::new(&(&u.transpose() * l.gram()) * &u).unwrap();
        prop_assert_eq!(genus_symbol(&h).unwrap(), genus_symbol(l).unwrap());
    }

    #[test]
    fn binary_forms_reconstruct_det(a in 1i64..=10, b in -8i64..=8, c in 1i64..=10) {
        if let Ok(l) = Lattice::from_rows(&[vec![2 * a, b], vec![b, 2 * c]]) {
            let g = genus_symbol(&l).unwrap();
            prop_assert_eq!(g.abs_det(), l.det().abs());
            let local: usize = g.at(2).unwrap().constituents.iter().map(|c| c.rank).sum();
            prop_assert_eq!(local, 2);
        }
    }
}
