mod common;

use approx::assert_abs_diff_eq;
use common::*;
use proptest::prelude::*;
use softcover::measures::*;
use softcover::{Channel64, Distribution64, Error, JointDistribution64, LogBase};

#[test]
fn distribution_validation() {
    assert!(Distribution64::new(vec![0.5, 0.5]).is_ok());
    assert!(matches!(
        Distribution64::new(vec![0.5, 0.6]),
        Err(Error::InvalidDistribution(_))
    ));
    assert!(Distribution64::new(vec![1.2, -0.2]).is_err());
    assert!(Distribution64::new(vec![]).is_err());
    assert!(Distribution64::new(vec![f64::NAN, 1.0]).is_err());
    let d = Distribution64::with_tolerance(vec![0.5, 0.5 + 1e-10], 1e-9).unwrap();
    assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    assert!(Channel64::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
}

#[test]
fn entropy_examples() {
    assert_abs_diff_eq!(
        entropy(&Distribution64::uniform(4).unwrap()),
        4f64.ln(),
        epsilon = 1e-15
    );
    assert_eq!(entropy(&Distribution64::point_mass(3, 1).unwrap()), 0.0);
    let h = bits(entropy(&Distribution64::binary(0.4).unwrap()));
    let oracle = -(0.4 * 0.4f64.log2() + 0.6 * 0.6f64.log2());
    assert_abs_diff_eq!(h, oracle, epsilon = 1e-14);
}

#[test]
fn relative_entropy_examples() {
    let p = Distribution64::new(vec![0.6, 0.4]).unwrap();
    let q = Distribution64::uniform(2).unwrap();
    let oracle = 0.6 * (0.6f64 / 0.5).ln() + 0.4 * (0.4f64 / 0.5).ln();
    assert_abs_diff_eq!(relative_entropy(&p, &q).unwrap(), oracle, epsilon = 1e-15);
    assert_eq!(relative_entropy(&p, &p).unwrap(), 0.0);
    let pm = Distribution64::point_mass(2, 0).unwrap();
    assert!(relative_entropy(&q, &pm).unwrap().is_infinite());
    assert!(relative_entropy(&q, &Distribution64::uniform(3).unwrap()).is_err());
}

#[test]
fn joint_and_conditional_relative_entropy() {
    let (p, w) = bsc_instance();
    let pxy = w.joint(&p).unwrap();
    let py = w.output(&p).unwrap();
    let prod = JointDistribution64::product(&p, &py);
    // D(P_XY || P_X P_Y) = I(X;Y)
    let d = joint_relative_entropy(&pxy, &prod).unwrap();
    assert_abs_diff_eq!(d, mutual_information(&p, &w).unwrap(), epsilon = 1e-14);
    // Conditional form with the constant channel P_Y also gives I.
    let c = Channel64::constant(2, &py).unwrap();
    let dc = conditional_relative_entropy(&w, &c, &p).unwrap();
    assert_abs_diff_eq!(dc, d, epsilon = 1e-14);
    assert_abs_diff_eq!(pxy.marginal_x().probs()[0], 0.4, epsilon = 1e-15);
    assert_abs_diff_eq!(pxy.marginal_y().probs()[0], 0.41, epsilon = 1e-15);
    let back = pxy.conditional();
    assert_abs_diff_eq!(back.prob(1, 0), 0.05, epsilon = 1e-15);
}

#[test]
fn mutual_information_examples() {
    let (p, w) = bsc_instance();
    let mi = bits(mutual_information(&p, &w).unwrap());
    let oracle = mi_oracle(p.probs(), &w.to_rows()) / LN2;
    assert_abs_diff_eq!(mi, oracle, epsilon = 1e-14);
    assert!((mi - 0.69).abs() < 0.005);
    // Noiseless channel: I = H(P).
    let id = Channel64::identity(3).unwrap();
    let u = Distribution64::new(vec![0.2, 0.3, 0.5]).unwrap();
    assert_abs_diff_eq!(
        mutual_information(&u, &id).unwrap(),
        entropy(&u),
        epsilon = 1e-14
    );
    // Degenerate channel: I = 0 and the degeneracy test fires.
    let q = Distribution64::new(vec![0.3, 0.7]).unwrap();
    let deg = Channel64::constant(2, &q).unwrap();
    assert_eq!(
        mutual_information(&u.clone(), &Channel64::constant(3, &q).unwrap()).unwrap(),
        0.0
    );
    assert!(deg.is_degenerate(&p).unwrap());
    assert!(!w.is_degenerate(&p).unwrap());
}

#[test]
fn information_density_and_varentropy() {
    let (p, w) = bsc_instance();
    let table = information_density_table(&p, &w).unwrap();
    let py = [0.41, 0.59];
    let rows = w.to_rows();
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let i = (rows[x][y] / py[y]).ln();
            assert_abs_diff_eq!(table[x][y], i, epsilon = 1e-14);
            let mass = p.probs()[x] * rows[x][y];
            m1 += mass * i;
            m2 += mass * i * i;
        }
    }
    assert_abs_diff_eq!(
        mutual_varentropy(&p, &w).unwrap(),
        m2 - m1 * m1,
        epsilon = 1e-14
    );
    // Zero-probability cells.
    let z = Channel64::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
    let t = information_density_table(&Distribution64::uniform(2).unwrap(), &z).unwrap();
    assert!(t[0][1].is_infinite() && t[0][1] < 0.0);
    assert!(t[0][2].is_nan());
    let u = Distribution64::uniform(2).unwrap();
    assert_eq!(
        mutual_varentropy(&u, &Channel64::identity(2).unwrap()).unwrap(),
        0.0
    );
}

#[test]
fn renyi_joint_matches_double_sum() {
    let (p, w) = bsc_instance();
    let rows = w.to_rows();
    let py = [0.41, 0.59];
    for &order in &[0.5, 1.5, 2.0, 3.0] {
        let l: f64 = order - 1.0;
        let mut s = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                s += p.probs()[x] * rows[x][y] * (rows[x][y] / py[y]).powf(l);
            }
        }
        assert_abs_diff_eq!(
            renyi_divergence_joint(&p, &w, order).unwrap(),
            s.ln() / l,
            epsilon = 1e-13
        );
    }
    let mi = mutual_information(&p, &w).unwrap();
    assert_abs_diff_eq!(
        renyi_divergence_joint(&p, &w, 1.0).unwrap(),
        mi,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        renyi_divergence_joint(&p, &w, 1.0 + 1e-7).unwrap(),
        mi,
        epsilon = 1e-6
    );
    assert!(renyi_divergence_joint(&p, &w, -1.0).is_err());
}

#[test]
fn tilde_renyi_matches_oracle_and_is_dominated() {
    let (p, w) = bsc_instance();
    let rows = w.to_rows();
    let py = [0.41, 0.59];
    let l = 0.5;
    let mut outer = 0.0;
    for y in 0..2 {
        let inner: f64 = (0..2)
            .map(|x| p.probs()[x] * rows[x][y] / py[y] * (rows[x][y] / py[y]).powf(l))
            .sum();
        outer += py[y] * inner.sqrt();
    }
    let oracle = 2.0 / l * outer.ln();
    let t = tilde_renyi(&p, &w, l).unwrap();
    assert_abs_diff_eq!(t, oracle, epsilon = 1e-13);
    assert!(t <= renyi_divergence_joint(&p, &w, 1.0 + l).unwrap() + 1e-12);
    assert_abs_diff_eq!(
        tilde_renyi(&p, &w, 0.0).unwrap(),
        mutual_information(&p, &w).unwrap(),
        epsilon = 1e-15
    );
    assert!(matches!(tilde_renyi(&p, &w, 1.5), Err(Error::Domain(_))));
}

#[test]
fn sibson_examples() {
    let (p, w) = bsc_instance();
    let rows = w.to_rows();
    let a = 2.0;
    let s: f64 = (0..2)
        .map(|y| {
            (0..2)
                .map(|x| p.probs()[x] * rows[x][y].powf(a))
                .sum::<f64>()
                .powf(1.0 / a)
        })
        .sum();
    assert_abs_diff_eq!(
        sibson_mi(&p, &w, a).unwrap(),
        a / (a - 1.0) * s.ln(),
        epsilon = 1e-13
    );
    let mi = mutual_information(&p, &w).unwrap();
    assert_abs_diff_eq!(sibson_mi(&p, &w, 1.0).unwrap(), mi, epsilon = 1e-15);
    assert_abs_diff_eq!(
        bits(sibson_mi(&p, &w, 1.0).unwrap()),
        0.6901,
        epsilon = 1e-4
    );
    // Monotone in the order, with the order-infinity limit on top.
    let inf = sibson_mi_infinite(&p, &w).unwrap();
    assert_abs_diff_eq!(inf, (0.95f64 + 0.95).ln(), epsilon = 1e-14);
    let mut prev = 0.0;
    for &o in &[0.3, 0.7, 1.0, 1.5, 3.0, 10.0, 100.0] {
        let v = sibson_mi(&p, &w, o).unwrap();
        assert!(v >= prev - 1e-14 && v <= inf + 1e-12);
        prev = v;
    }
    assert_abs_diff_eq!(sibson_mi(&p, &w, 1e6).unwrap(), inf, epsilon = 1e-5);
}

#[test]
fn csiszar_matches_grid_minimization() {
    let (p, w) = bsc_instance();
    for &order in &[0.5, 1.5, 3.0] {
        let c = csiszar_mi(&p, &w, order).unwrap();
        // Independent grid over S(0) at step 1e-5, then a local refinement.
        let rows = w.to_rows();
        let obj = |s0: f64| -> f64 {
            let s = [s0, 1.0 - s0];
            (0..2)
                .map(|x| {
                    let z: f64 = (0..2)
                        .map(|y| rows[x][y].powf(order) * s[y].powf(1.0 - order))
                        .sum();
                    p.probs()[x] * z.ln() / (order - 1.0)
                })
                .sum()
        };
        let (mut best, mut arg) = (f64::INFINITY, 0.0);
        for i in 1..100_000 {
            let s0 = i as f64 * 1e-5;
            let v = obj(s0);
            if v < best {
                best = v;
                arg = s0;
            }
        }
        for i in -1000..=1000 {
            let s0 = arg + i as f64 * 1e-8;
            best = best.min(obj(s0));
        }
        assert_abs_diff_eq!(c.value, best, epsilon = 1e-11);
        assert_abs_diff_eq!(
            csiszar_objective(&p, &w, order, &c.minimizer).unwrap(),
            c.value,
            epsilon = 1e-12
        );
        // Sibson and Csiszár sandwich: I^c <= I^s for order > 1, reversed below.
        let s = sibson_mi(&p, &w, order).unwrap();
        if order > 1.0 {
            assert!(c.value <= s + 1e-12);
        } else {
            assert!(c.value >= s - 1e-12);
        }
    }
}

#[test]
fn csiszar_at_order_one_is_mutual_information() {
    let (p, w) = random_instance(3, 3, 4);
    let c = csiszar_mi(&p, &w, 1.0).unwrap();
    assert_abs_diff_eq!(c.value, mi_oracle(p.probs(), &w.to_rows()), epsilon = 1e-14);
}

#[test]
fn total_variation_examples() {
    assert_abs_diff_eq!(
        total_variation(&[0.6, 0.4], &[0.5, 0.5]).unwrap(),
        0.2,
        epsilon = 1e-15
    );
    assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
    assert!(total_variation(&[1.0], &[0.5, 0.5]).is_err());
}

#[test]
fn reverse_channel_is_bayes_rule() {
    let (p, w) = bsc_instance();
    let (py, rev) = w.reverse(&p).unwrap();
    assert_abs_diff_eq!(py.probs()[0], 0.41, epsilon = 1e-15);
    assert_abs_diff_eq!(rev.prob(0, 0), 0.4 * 0.95 / 0.41, epsilon = 1e-15);
    // Mutual information is symmetric.
    assert_abs_diff_eq!(
        mutual_information(&py, &rev).unwrap(),
        mutual_information(&p, &w).unwrap(),
        epsilon = 1e-14
    );
}

#[test]
fn log_base_conversion() {
    assert_abs_diff_eq!(LogBase::Bits.from_nats(2f64.ln()), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(LogBase::Bits.to_nats(1.0), 2f64.ln(), epsilon = 1e-15);
    assert_abs_diff_eq!(LogBase::Bits.pow(3.0), 8.0, epsilon = 1e-12);
    assert_abs_diff_eq!(LogBase::Nats.pow(1.0), std::f64::consts::E, epsilon = 1e-15);
    assert_eq!("bits".parse::<LogBase>().unwrap(), LogBase::Bits);
    assert!("decibans".parse::<LogBase>().is_err());
}

#[test]
fn single_precision_agrees() {
    let p = softcover::Distribution32::binary(0.4).unwrap();
    let w = softcover::Channel32::bsc(0.05).unwrap();
    let mi = mutual_information(&p, &w).unwrap() as f64;
    assert!((bits(mi) - 0.6901035).abs() < 1e-5);
}

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #[test]
    fn measures_are_consistent(px in simplex(3), r0 in simplex(2), r1 in simplex(2), r2 in simplex(2), order in 1.05f64..4.0) {
        let p = Distribution64::with_tolerance(px.clone(), 1e-9).unwrap();
        let w = Channel64::with_tolerance(vec![r0, r1, r2], 1e-9).unwrap();
        let mi = mutual_information(&p, &w).unwrap();
        prop_assert!(mi >= 0.0);
        prop_assert!((mi - mi_oracle(p.probs(), &w.to_rows())).abs() < 1e-12);
        prop_assert!(mi <= entropy(&p).min(2f64.ln()) + 1e-12);
        let s = sibson_mi(&p, &w, order).unwrap();
        let c = csiszar_mi(&p, &w, order).unwrap().value;
        let r = renyi_divergence_joint(&p, &w, order).unwrap();
        // I <= I^c <= I^s <= D_order(P_XY || P_X P_Y) for order > 1.
        prop_assert!(mi <= c + 1e-10);
        prop_assert!(c <= s + 1e-10);
        prop_assert!(s <= r + 1e-10);
    }
}
