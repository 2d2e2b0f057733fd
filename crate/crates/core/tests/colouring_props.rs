use ids_core::colouring::{
    anchor_count, count_occurrences, empirical_frequencies, is_visible, make_percolation,
    make_periodic, make_visible, pattern_at, Alphabet, Colouring, VISIBLE,
};
use ids_core::lattice::{LatticeBox, Point, Region};
use num_rational::Ratio;
use proptest::prelude::*;

fn periodic_strategy() -> impl Strategy<Value = Colouring> {
    (1usize..=2, 1usize..=3, 2usize..=3).prop_flat_map(|(d, n, k)| {
        prop::collection::vec(0..k, n.pow(d as u32)).prop_map(move |table| {
            let names: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            make_periodic(d, n, Alphabet::named(&names).unwrap(), table).unwrap()
        })
    })
}

fn percolation(d: usize, seed: u64) -> Colouring {
    make_percolation(
        d,
        Alphabet::named(&["open", "closed"]).unwrap(),
        &[0.7, 0.3],
        seed,
    )
    .unwrap()
}

fn box_region(d: usize, lo: &[i64], sides: &[usize]) -> Region {
    let hi: Vec<i64> = lo
        .iter()
        .zip(sides)
        .map(|(l, s)| l + *s as i64 - 1)
        .collect();
    Region::from_box(
        &LatticeBox::new(Point::new(lo[..d].to_vec()), Point::new(hi[..d].to_vec())).unwrap(),
    )
}

/// Anchors of `side`-cubes inside `q`, by direct membership tests.
fn naive_anchors(q: &Region, side: usize) -> Vec<Point> {
    q.points()
        .iter()
        .filter(|x| {
            LatticeBox::cube_at(x, side)
                .points()
                .all(|p| q.contains(&p))
        })
        .cloned()
        .collect()
}

proptest! {
    #[test]
    fn frequency_sum_identity(
        c in periodic_strategy(),
        side in 1usize..4,
        lo in prop::collection::vec(-10i64..10, 2),
        sides in prop::collection::vec(1usize..12, 2),
    ) {
        let q = box_region(c.dim(), &lo, &sides);
        let t = empirical_frequencies(&c, side, &q).unwrap();
        let anchors = naive_anchors(&q, side).len() as u64;
        prop_assert_eq!(t.total_count(), anchors);
        prop_assert_eq!(anchor_count(&q, side) as u64, anchors);
        prop_assert!(t.entries.values().all(|s| s.count >= 1));
    }

    #[test]
    fn counts_agree_with_naive_scan(
        seed in any::<u64>(),
        side in 1usize..3,
        pts in prop::collection::vec(prop::collection::vec(-6i64..6, 2), 1..60),
    ) {
        let c = percolation(2, seed);
        let q = Region::from_points(2, pts.into_iter().map(Point::new)).unwrap();
        let t = empirical_frequencies(&c, side, &q).unwrap();
        let anchors = naive_anchors(&q, side);
        prop_assert_eq!(t.total_count(), anchors.len() as u64);
        for (p, s) in &t.entries {
            let naive = anchors.iter().filter(|x| &pattern_at(&c, x, side) == p).count();
            prop_assert_eq!(s.count as usize, naive);
            prop_assert_eq!(count_occurrences(p, &c, &q), naive);
        }
    }

    #[test]
    fn periodic_rates_are_exact(c in periodic_strategy(), k in 1usize..5) {
        let (n, table) = c.periodic_table().unwrap();
        let d = c.dim();
        let t = empirical_frequencies(&c, 1, &Region::cube(d, k * n)).unwrap();
        let cell = n.pow(d as u32) as u64;
        for p in t.entries.keys() {
            let per_cell = table.iter().filter(|&&v| v == p.values()[0] as usize).count() as u64;
            prop_assert_eq!(t.frequency(p), Ratio::new(per_cell, cell));
        }
    }

    #[test]
    fn visible_symmetry(x in prop::collection::vec(-10_000i64..10_000, 1..4), axis in 0usize..3, sign in prop::bool::ANY) {
        let c = make_visible(x.len()).unwrap();
        let neg: Vec<i64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(c.colour_at(&x), c.colour_at(&neg));
        let mut y = x.clone();
        y[axis % x.len()] = if sign { 1 } else { -1 };
        prop_assert_eq!(c.colour_at(&y), VISIBLE);
        prop_assert_eq!(c.colour_at(&x) == VISIBLE, is_visible(&x));
    }

    #[test]
    fn percolation_seed_changes_realization_not_identity(seed in any::<u64>(), side in 1usize..4) {
        let q = Region::cube(2, 24);
        let a = empirical_frequencies(&percolation(2, seed), side, &q).unwrap();
        let b = empirical_frequencies(&percolation(2, seed ^ 0x9e37_79b9), side, &q).unwrap();
        let anchors = ((24 - side + 1) * (24 - side + 1)) as u64;
        prop_assert_eq!(a.total_count(), anchors);
        prop_assert_eq!(b.total_count(), anchors);
    }
}

#[test]
fn percolation_realizations_differ_between_seeds() {
    let q = Region::cube(2, 30);
    let a: Vec<usize> = q
        .points()
        .iter()
        .map(|x| percolation(2, 1).colour_at(x))
        .collect();
    let b: Vec<usize> = q
        .points()
        .iter()
        .map(|x| percolation(2, 2).colour_at(x))
        .collect();
    assert_ne!(a, b);
}

#[test]
fn visible_gcd_oracle() {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let c = make_visible(2).unwrap();
    for x in -40i64..=40 {
        for y in -40i64..=40 {
            let expected = x == 0 && y == 0 || gcd(x, y) == 1;
            assert_eq!(c.colour_at(&[x, y]) == VISIBLE, expected, "({x},{y})");
        }
    }
}
