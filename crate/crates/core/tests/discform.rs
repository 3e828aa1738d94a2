use k3cls_core::aut::automorphism_group;
use k3cls_core::discform::*;
use k3cls_core::error::Error;
use k3cls_core::lattice::Lattice;
use k3cls_core::linalg::IntMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn lat(rows: &[&[i64]]) -> Lattice {
    Lattice::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// The first invariant lattice of each table row with its expected `#O(q)`.
fn table_rows() -> Vec<(u32, Lattice, usize)> {
    vec![
        (54, lat(&[&[2, 0, 0], &[0, 16, 8], &[0, 8, 16]]), 192),
        (62, lat(&[&[6, 0, 3], &[0, 6, 3], &[3, 3, 12]]), 288),
        (63, lat(&[&[2, 0, 0], &[0, 12, 6], &[0, 6, 12]]), 72),
        (70, lat(&[&[4, 1, 0], &[1, 4, 0], &[0, 0, 20]]), 48),
        (74, lat(&[&[2, 1, 0], &[1, 4, 0], &[0, 0, 28]]), 32),
        (76, lat(&[&[4, 0, 0], &[0, 8, 0], &[0, 0, 12]]), 128),
        (77, lat(&[&[4, 0, 0], &[0, 8, 4], &[0, 4, 8]]), 192),
        (78, lat(&[&[8, 4, 4], &[4, 8, 2], &[4, 2, 8]]), 128),
        (79, lat(&[&[2, 1, 0], &[1, 8, 0], &[0, 0, 12]]), 32),
        (80, lat(&[&[4, 0, 0], &[0, 8, 0], &[0, 0, 8]]), 128),
        (81, lat(&[&[4, 0, 2], &[0, 4, 2], &[2, 2, 12]]), 96),
    ]
}

#[test]
fn form_of_a1() {
    let d = disc_form(&lat(&[&[2]])).unwrap();
    assert_eq!(d.factors(), &[BigInt::from(2)]);
    assert_eq!(d.q_values(), &[r(1, 2)]);
}

#[test]
fn form_of_unimodular_plane_is_trivial() {
    let d = disc_form(&lat(&[&[0, 1], &[1, 0]])).unwrap();
    assert!(d.factors().is_empty());
    assert_eq!(orthogonal_group_of_form(&d).unwrap().len(), 1);
}

#[test]
fn form_rejects_odd_lattice() {
    assert!(matches!(disc_form(&lat(&[&[1]])), Err(Error::OddLattice)));
}

#[test]
fn form_order_is_determinant() {
    for (_, l, _) in table_rows() {
        let d = disc_form(&l).unwrap();
        assert_eq!(d.order(), l.det().clone());
    }
}

#[test]
fn negation() {
    assert_eq!(DiscForm::trivial().negate(), DiscForm::trivial());
    let d = disc_form(&lat(&[&[2]])).unwrap().negate();
    assert_eq!(d.q_values(), &[r(3, 2)]);
    let d = disc_form(&table_rows()[0].1).unwrap();
    assert_eq!(d.negate().negate(), d);
}

#[test]
fn orthogonal_group_orders_of_table_rows() {
    for (no, l, expect) in table_rows() {
        let d = disc_form(&l).unwrap();
        let o = orthogonal_group_of_form(&d).unwrap();
        assert_eq!(o.len(), expect, "row {no}");
        let on = orthogonal_group_of_form(&d.negate()).unwrap();
        assert_eq!(on.len(), expect, "row {no} negated");
    }
}

#[test]
fn orthogonal_group_of_trivial_form() {
    assert_eq!(orthogonal_group_of_form(&DiscForm::trivial()).unwrap().len(), 1);
}

#[test]
fn orthogonal_group_elements_preserve_q() {
    let d = disc_form(&table_rows()[10].1).unwrap();
    for f in orthogonal_group_of_form(&d).unwrap() {
        assert!(preserves_form(&f, &d, &d, 1));
    }
}

#[test]
fn cap_is_enforced() {
    // Z/1024 exceeds the brute-force cap
    let l = lat(&[&[2048]]);
    let d = disc_form(&l).unwrap();
    assert!(matches!(orthogonal_group_of_form(&d), Err(Error::CapExceeded { .. })));
}

#[test]
fn induced_maps_of_identity_and_minus_identity() {
    let l = table_rows()[0].1.clone();
    let d = disc_form(&l).unwrap();
    let id = induced_form_isometry(&l, &IntMatrix::identity(3)).unwrap();
    assert!(id.is_identity());
    let minus = induced_form_isometry(&l, &(-&IntMatrix::identity(3))).unwrap();
    for c in d.elements().unwrap() {
        let neg: Vec<BigInt> = c.iter().map(|x| -x).collect();
        assert_eq!(minus.apply(&c), d.reduce(&neg));
    }
}

#[test]
fn induced_maps_preserve_q() {
    let l = table_rows()[0].1.clone();
    let d = disc_form(&l).unwrap();
    for g in automorphism_group(&l).unwrap().generators() {
        let f = induced_form_isometry(&l, g).unwrap();
        for c in d.elements().unwrap() {
            assert_eq!(d.q(&f.apply(&c)), d.q(&c));
        }
    }
}

#[test]
fn induced_map_rejects_non_isometry() {
    let l = table_rows()[0].1.clone();
    let g = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    assert!(matches!(induced_form_isometry(&l, &g), Err(Error::NotIsometry)));
}

#[test]
fn anti_isometries_examples() {
    let t = anti_isometries(&DiscForm::trivial(), &DiscForm::trivial()).unwrap();
    assert_eq!(t.len(), 1);
    let a = disc_form(&lat(&[&[2]])).unwrap();
    let b = disc_form(&lat(&[&[-2]])).unwrap();
    let maps = anti_isometries(&a, &b).unwrap();
    assert_eq!(maps.len(), 1);
    assert_eq!(maps[0].image_of_generator(0), vec![BigInt::from(1)]);
}

#[test]
fn anti_isometry_between_glue_subgroups_of_a_split_case() {
    // T_X = diag(2, 48), l^2 = 16 inside the row-54 lattice with index 2
    let t = lat(&[&[2, 0], &[0, 48]]);
    let l = lat(&[&[16]]);
    let dt = disc_form(&t).unwrap();
    let dl = disc_form(&l).unwrap();
    // order-2 subgroups generated by the elements of order 2 with matching q
    let mut found = false;
    for x in dt.elements().unwrap() {
        if dt.element_order(&x) != BigInt::from(2) {
            continue;
        }
        for y in dl.elements().unwrap() {
            if dl.element_order(&y) != BigInt::from(2) {
                continue;
            }
            let (sx, _) = dt.subgroup(&[x.clone()]).unwrap();
            let (sy, _) = dl.subgroup(&[y.clone()]).unwrap();
            if !anti_isometries(&sx, &sy).unwrap().is_empty() {
                found = true;
            }
        }
    }
    assert!(found);
}

#[test]
fn subgroup_structure_examples() {
    let f = vec![BigInt::from(2), BigInt::from(4)];
    let (inv, gens) = subgroup_structure(&f, &[vec![BigInt::from(1), BigInt::from(2)]]).unwrap();
    assert_eq!(inv, vec![BigInt::from(2)]);
    assert_eq!(gens.len(), 1);
    let (inv, _) = subgroup_structure(&f, &[vec![1.into(), 0.into()], vec![0.into(), 1.into()]]).unwrap();
    assert_eq!(inv, vec![BigInt::from(2), BigInt::from(4)]);
    let (inv, _) = subgroup_structure(&f, &[]).unwrap();
    assert!(inv.is_empty());
}

#[test]
fn p_parts_multiply_to_the_whole() {
    let d = disc_form(&table_rows()[0].1).unwrap();
    let two = d.p_part(2);
    let three = d.p_part(3);
    assert_eq!(two.order() * three.order(), d.order());
    assert_eq!(two.order(), BigInt::from(128));
}

#[test]
fn form_table_identities() {
    // b(x, y) = (q(x + y) - q(x) - q(y)) / 2 mod 1
    let d = disc_form(&table_rows()[1].1).unwrap();
    let els = d.elements().unwrap();
    for x in els.iter().step_by(7) {
        for y in els.iter().step_by(11) {
            let s = d.add(x, y);
            let lhs = d.b(x, y);
            let rhs = mod1(&((d.q(&s) - d.q(x) - d.q(y)) / BigRational::from_integer(2.into())));
            assert_eq!(lhs, rhs);
        }
        let three: Vec<BigInt> = x.iter().map(|c| c * 3).collect();
        assert_eq!(d.q(&d.reduce(&three)), mod2(&(d.q(x) * BigRational::from_integer(9.into()))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn induced_map_is_a_homomorphism(i in 0usize..11, a in 0usize..64, b in 0usize..64) {
        let l = table_rows()[i].1.clone();
        let o = automorphism_group(&l).unwrap();
        let els = o.elements().unwrap();
        let g = &els[a % els.len()];
        let h = &els[b % els.len()];
        let fg = induced_form_isometry(&l, g).unwrap();
        let fh = induced_form_isometry(&l, h).unwrap();
        let fgh = induced_form_isometry(&l, &(g * h)).unwrap();
        prop_assert_eq!(fgh, fg.compose(&fh));
    }

    #[test]
    fn disc_order_equals_det(a in 1i64..=12, b in -6i64..=6, c in 1i64..=12) {
        let g = vec![vec![2 * a, b], vec![b, 2 * c]];
        if let Ok(l) = Lattice::from_rows(&g) {
            let d = disc_form(&l).unwrap();
            prop_assert_eq!(d.order(), num_traits::Signed::abs(l.det()));
        }
    }
}
