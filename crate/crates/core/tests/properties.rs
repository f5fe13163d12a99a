use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::sample::Index;

use fiberforge::coloring::{find_standard_coloring, Color, Coloring};
use fiberforge::fiber::sigma3;
use fiberforge::homology::{betti_over_field, rank_over_rationals, smith_normal_form, SparseIntMatrix};
use fiberforge::morse::{ascending_link, collapse_to_point, descending_link, flag_complex_k, replay, LinkComplex};
use fiberforge::polytope::{are_adjacent, enumerate_facets, polytope};
use fiberforge::states::{apply_move, assign_states, enumerate_balanced, initial_state, CopyLabel, MoveSet, State};
use fiberforge::triangulation::{Triangulation, VertexPerm};

fn coloring() -> &'static Coloring {
    static C: OnceLock<Coloring> = OnceLock::new();
    C.get_or_init(|| find_standard_coloring().unwrap())
}

fn k() -> &'static LinkComplex {
    static K: OnceLock<LinkComplex> = OnceLock::new();
    K.get_or_init(flag_complex_k)
}

fn balanced() -> &'static [State] {
    static B: OnceLock<Vec<State>> = OnceLock::new();
    B.get_or_init(|| enumerate_balanced(coloring()).unwrap())
}

fn color() -> impl Strategy<Value = Color> {
    (0..8usize).prop_map(Color::from_index)
}

fn block() -> impl Strategy<Value = Vec<Color>> {
    prop::collection::btree_set(0..8usize, 1..=8).prop_map(|s| s.into_iter().map(Color::from_index).collect())
}

fn dense(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max, 1..=max).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::collection::vec(prop_oneof![3 => Just(0i64), 1 => -6i64..=6], n), m)
    })
}

fn shuffle<T: Clone>(v: &[T], keys: &[u32]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by_key(|&i| keys[i % keys.len()].wrapping_mul(i as u32 + 1) ^ i as u32);
    idx.into_iter().map(|i| v[i].clone()).collect()
}

#[test]
fn facet_graph_is_ten_regular() {
    let facets = enumerate_facets();
    let edges = facets
        .iter()
        .flat_map(|&f| facets.iter().map(move |&g| (f, g)))
        .filter(|&(f, g)| f.index() < g.index() && are_adjacent(f, g))
        .count();
    assert_eq!(edges, 80);
    assert_eq!(edges, polytope().f_vector()[3]);
    for &f in &facets {
        assert_eq!(facets.iter().filter(|&&g| are_adjacent(f, g)).count(), 10);
    }
}

#[test]
fn lattice_is_a_polytope_lattice() {
    let lat = polytope().lattice();
    assert!(lat.has_diamond_property());
    for &r in lat.faces_of_rank(3) {
        assert_eq!(lat.cofacets(r).len(), 2);
    }
    for &r in lat.faces_of_rank(2) {
        let above = lat.faces_of_rank(4).iter().filter(|&&f| lat.le(r, f)).count();
        assert_eq!(above, 3);
    }
}

#[test]
fn coloring_is_proper() {
    let c = coloring();
    for f in enumerate_facets() {
        for g in enumerate_facets() {
            if are_adjacent(f, g) {
                assert_ne!(c.color(f), c.color(g));
            }
        }
    }
}

#[test]
fn sigma3_has_36_ridges() {
    for &s in balanced() {
        let sig = sigma3(s).unwrap();
        assert_eq!(sig.ridges.len(), 36);
        let t = sig.triangulation().unwrap();
        let betti = betti_over_field(&t.chain_complex(false).unwrap(), 0);
        let alt: i64 = betti.iter().enumerate().map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) }).sum();
        assert_eq!(alt, t.chain_complex(false).unwrap().euler_characteristic());
    }
}

#[test]
fn balanced_states_cover_all_copies() {
    let c = coloring();
    let s0 = initial_state(c).unwrap();
    let reached: std::collections::BTreeSet<_> =
        CopyLabel::all().map(|v| assign_states(c, s0, &MoveSet::canonical(), v)).collect();
    let all: std::collections::BTreeSet<_> = balanced().iter().copied().collect();
    assert_eq!(reached, all);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn isometries_preserve_adjacency(g in any::<Index>(), a in 0..16usize, b in 0..16usize) {
        let iso = g.get(polytope().isometries());
        let facets = enumerate_facets();
        let (f, h) = (facets[a], facets[b]);
        prop_assert_eq!(are_adjacent(f, h), are_adjacent(iso.apply_facet(f), iso.apply_facet(h)));
    }

    #[test]
    fn r16_is_a_subgroup(a in any::<Index>(), b in any::<Index>()) {
        let r = polytope().r16();
        let (g, h) = (a.get(r), b.get(r));
        prop_assert!(r.contains(&g.compose(h)));
        prop_assert!(r.contains(&g.inverse()));
    }

    #[test]
    fn moves_are_commuting_involutions(mask in any::<u16>(), x in block(), y in block()) {
        let c = coloring();
        let s = State::from_mask(mask);
        prop_assert_eq!(apply_move(apply_move(s, c, &x), c, &x), s);
        prop_assert_eq!(
            apply_move(apply_move(s, c, &x), c, &y),
            apply_move(apply_move(s, c, &y), c, &x)
        );
    }

    #[test]
    fn neighbouring_copies_differ_on_one_block(v in any::<u8>(), i in color()) {
        let c = coloring();
        let s0 = initial_state(c).unwrap();
        let m = MoveSet::canonical();
        let a = assign_states(c, s0, &m, CopyLabel(v));
        let b = assign_states(c, s0, &m, CopyLabel(v).step(i));
        let block = c.facet_mask(m.block_of(i).iter().copied());
        prop_assert_eq!(a.in_mask() ^ b.in_mask(), block);
    }

    #[test]
    fn reversal_reverses_every_status(mask in any::<u16>()) {
        let s = State::from_mask(mask);
        for f in enumerate_facets() {
            prop_assert_eq!(s.reversed().status(f), s.status(f).flipped());
        }
    }

    #[test]
    fn links_partition_and_swap(mask in any::<u16>()) {
        let s = State::from_mask(mask);
        let (up, down) = (ascending_link(k(), s), descending_link(k(), s));
        prop_assert_eq!(up.vertex_mask() & down.vertex_mask(), 0);
        prop_assert_eq!(up.vertex_mask() | down.vertex_mask(), k().vertex_mask());
        prop_assert_eq!(&ascending_link(k(), s.reversed()), &down);
        prop_assert_eq!(&descending_link(k(), s.reversed()), &up);
    }

    #[test]
    fn collapses_replay(mask in any::<u16>(), seed in any::<u64>()) {
        let link = ascending_link(k(), State::from_mask(mask));
        if let Some(cert) = collapse_to_point(&link, seed, 8).unwrap().certificate() {
            prop_assert!(replay(&link, cert));
        }
    }

    #[test]
    fn cone_apex_is_in_every_maximal_simplex(mask in any::<u16>()) {
        let link = descending_link(k(), State::from_mask(mask));
        if let Some(a) = link.cone_apex() {
            for m in link.maximal() {
                prop_assert!(m & (1 << a) != 0);
            }
        }
    }

    #[test]
    fn r16_acts_on_balanced_states(g in any::<Index>(), s in any::<Index>()) {
        let g = g.get(polytope().r16());
        let s = *s.get(balanced());
        let t = s.transported(g);
        prop_assert!(t.is_balanced(coloring()));
        prop_assert_eq!(ascending_link(k(), t).f_vector(), ascending_link(k(), s).f_vector());
        prop_assert_eq!(descending_link(k(), t).f_vector(), descending_link(k(), s).f_vector());
    }

    #[test]
    fn smith_factors_form_a_divisor_chain(d in dense(12)) {
        let m = SparseIntMatrix::from_dense(&d);
        let snf = smith_normal_form(&m);
        prop_assert_eq!(snf.rank, rank_over_rationals(&m));
        prop_assert_eq!(snf.invariant_factors.len(), snf.rank);
        for w in snf.invariant_factors.windows(2) {
            prop_assert!(w[1].is_multiple_of(&w[0]));
        }
        prop_assert!(snf.invariant_factors.iter().all(|x| *x > BigInt::zero()));
    }

    #[test]
    fn smith_form_ignores_row_and_column_order(d in dense(12), keys in prop::collection::vec(any::<u32>(), 1..16)) {
        let rows = shuffle(&d, &keys);
        let cols: Vec<Vec<i64>> = {
            let n = d[0].len();
            let order = shuffle(&(0..n).collect::<Vec<_>>(), &keys);
            rows.iter().map(|r| order.iter().map(|&j| r[j]).collect()).collect()
        };
        let a = smith_normal_form(&SparseIntMatrix::from_dense(&d));
        let b = smith_normal_form(&SparseIntMatrix::from_dense(&cols));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn signature_survives_relabeling(s in any::<Index>(), keys in prop::collection::vec(any::<u32>(), 1..64), p in any::<Index>()) {
        let t: Triangulation = sigma3(*s.get(balanced())).unwrap().triangulation().unwrap();
        let map: Vec<u32> = shuffle(&(0..t.len() as u32).collect::<Vec<_>>(), &keys);
        let perms = all_perms(t.dim());
        let vperms: Vec<VertexPerm> = (0..t.len()).map(|i| perms[(p.index(perms.len()) + i * 7) % perms.len()]).collect();
        prop_assert_eq!(t.relabeled(&map, &vperms).canonical_signature(), t.canonical_signature());
    }
}

fn all_perms(dim: usize) -> Vec<VertexPerm> {
    let n = dim as u8 + 1;
    let mut out = Vec::new();
    let mut img: Vec<u8> = (0..n).collect();
    heap(&mut img, n as usize, &mut out);
    out
}

fn heap(img: &mut Vec<u8>, k: usize, out: &mut Vec<VertexPerm>) {
    if k <= 1 {
        out.push(VertexPerm::from_images(img).unwrap());
        return;
    }
    for i in 0..k {
        heap(img, k - 1, out);
        let j = if k.is_multiple_of(2) { i } else { 0 };
        img.swap(j, k - 1);
    }
}
