mod common;

use approx::assert_abs_diff_eq;
use common::*;
use softcover::exponents::*;
use softcover::measures::{csiszar_mi, mutual_information, mutual_varentropy};
use softcover::{Certificate, Channel64, Distribution64, Error, JointDistribution64};

/// Sibson's measure from explicit loops.
fn sibson_oracle(p: &Distribution64, w: &Channel64, a: f64) -> f64 {
    let rows = w.to_rows();
    let s: f64 = (0..w.output_size())
        .map(|y| {
            (0..p.len())
                .map(|x| p.probs()[x] * rows[x][y].powf(a))
                .sum::<f64>()
                .powf(1.0 / a)
        })
        .sum();
    a / (a - 1.0) * s.ln()
}

/// `D_{1+l}(P_XY || P_X P_Y)` from explicit loops.
fn renyi_oracle(p: &Distribution64, w: &Channel64, l: f64) -> f64 {
    let rows = w.to_rows();
    let py: Vec<f64> = (0..w.output_size())
        .map(|y| (0..p.len()).map(|x| p.probs()[x] * rows[x][y]).sum())
        .collect();
    let mut s = 0.0;
    for x in 0..p.len() {
        for y in 0..py.len() {
            s += p.probs()[x] * rows[x][y] * (rows[x][y] / py[y]).powf(l);
        }
    }
    s.ln() / l
}

/// Maximum of `f` over `[lo, hi]`: a 1e-4 grid, then a 1e-8 grid around the best point.
fn grid_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let steps = ((hi - lo) / 1e-4).round() as usize;
    let (mut best, mut arg) = (f64::NEG_INFINITY, lo);
    for i in 0..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let v = f(x);
        if v > best {
            best = v;
            arg = x;
        }
    }
    for i in -10_000..=10_000 {
        let x = (arg + i as f64 * 1e-8).clamp(lo, hi);
        best = best.max(f(x));
    }
    best
}

#[test]
fn dual_searches_agree_with_grid_oracles() {
    let (p, w) = bsc_instance();
    let rate = nats_from_bits(0.85);
    let alpha = alpha_dual(&p, &w, rate).unwrap().value;
    let oracle = grid_max(
        |l| (l - 1.0) / l * (rate - sibson_oracle(&p, &w, l)),
        1.0 + 1e-9,
        2.0,
    );
    assert_abs_diff_eq!(alpha, oracle, epsilon = 1e-8);

    let gamma = gamma_exponent(&p, &w, rate).unwrap().value;
    let oracle = grid_max(
        |l| l / (1.0 + l) * (rate - renyi_oracle(&p, &w, l)),
        1e-9,
        1.0,
    );
    assert_abs_diff_eq!(gamma, oracle, epsilon = 1e-8);

    let zeta = zeta_exponent(&p, &w, rate).unwrap().value;
    let oracle = grid_max(|l| l * (rate - renyi_oracle(&p, &w, l)), 1e-9, 1.0);
    assert_abs_diff_eq!(zeta, oracle, epsilon = 1e-8);

    let daleth = daleth_exponent(&p, &w, rate).unwrap().value;
    let oracle = grid_max(
        |l| l * (rate - sibson_oracle(&p, &w, 1.0 / (1.0 - l))),
        1e-9,
        0.999,
    );
    assert_abs_diff_eq!(daleth, oracle, epsilon = 1e-8);

    let gimel = gimel_exponent(&p, &w, rate).unwrap().value;
    let oracle = grid_max(
        |l| l * (rate - csiszar_mi(&p, &w, 1.0 / (1.0 - l)).unwrap().value),
        1e-9,
        0.99,
    );
    assert_abs_diff_eq!(gimel, oracle, epsilon = 1e-8);
}

#[test]
fn alpha_certificate_attains_dual_value() {
    for seed in 0..8 {
        let (p, w) = random_instance(seed, 2 + (seed as usize % 2), 2 + (seed as usize / 2 % 2));
        let mi = mutual_information(&p, &w).unwrap();
        for rate in [mi + 0.05, mi + 0.2] {
            let res = alpha_dual(&p, &w, rate).unwrap();
            let Some(Certificate::Joint(q)) = &res.certificate else {
                panic!("alpha must carry a joint certificate");
            };
            let primal = alpha_primal_objective(q, &p, &w, rate).unwrap();
            assert!(
                (primal - res.value).abs() <= 1e-6,
                "seed {seed}: gap {}",
                primal - res.value
            );
            let again = tilted_optimizer(&p, &w, res.optimizer_param.unwrap()).unwrap();
            assert_eq!(&again, q);
        }
    }
}

#[test]
fn aleph_certificate_attains_dual_value() {
    for seed in 0..6 {
        let (p, w) = random_instance(100 + seed, 2, 3);
        let rate = mutual_information(&p, &w).unwrap() + 0.1;
        let res = aleph_dual(&p, &w, rate).unwrap();
        let Some(Certificate::Conditional(q)) = &res.certificate else {
            panic!("aleph must carry a conditional certificate");
        };
        let primal = aleph_primal_objective(q, &p, &w, rate).unwrap();
        assert!(
            (primal - res.value).abs() <= 1e-6,
            "seed {seed}: gap {}",
            primal - res.value
        );
        assert!(res.output_law.is_some());
    }
}

#[test]
fn alpha_primal_bruteforce_small_instance() {
    let (p, w) = bsc_instance();
    let rate = nats_from_bits(0.85);
    let dual = alpha_dual(&p, &w, rate).unwrap().value;
    let brute = alpha_primal_bruteforce(&p, &w, rate, 2e-3).unwrap();
    assert!((brute.value - dual).abs() <= 5e-4);
    // The brute force searches the full simplex, so it cannot beat the true minimum by much.
    assert!(brute.value >= dual - 1e-6);
    let zb = zeta_primal_bruteforce(&p, &w, rate, 2e-3).unwrap();
    assert!((zb.value - zeta_exponent(&p, &w, rate).unwrap().value).abs() <= 1e-4);
}

#[test]
fn alpha_primal_objective_matches_direct_formula() {
    let (p, w) = bsc_instance();
    let rate = 0.7;
    let q = JointDistribution64::new(vec![vec![0.3, 0.1], vec![0.2, 0.4]]).unwrap();
    let pxy: [[f64; 2]; 2] = [[0.4 * 0.95, 0.4 * 0.05], [0.6 * 0.05, 0.6 * 0.95]];
    let qv: [[f64; 2]; 2] = [[0.3, 0.1], [0.2, 0.4]];
    let qy = [0.5, 0.5];
    let mut d1: f64 = 0.0;
    let mut d2: f64 = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            d1 += qv[x][y] * (qv[x][y] / pxy[x][y]).ln();
            d2 += qv[x][y] * (qv[x][y] / ([0.4, 0.6][x] * qy[y])).ln();
        }
    }
    let oracle = d1 + 0.5 * (rate - d2).max(0.0);
    assert_abs_diff_eq!(
        alpha_primal_objective(&q, &p, &w, rate).unwrap(),
        oracle,
        epsilon = 1e-14
    );
}

#[test]
fn below_mutual_information_every_exponent_vanishes() {
    let (p, w) = bsc_instance();
    let mi = mutual_information(&p, &w).unwrap();
    for kind in ExponentKind::ALL {
        let v = kind.compute(&p, &w, mi * 0.9).unwrap().value;
        assert!(v.abs() <= 1e-12, "{kind}: {v}");
    }
}

#[test]
fn degenerate_channels_are_rejected() {
    let p = Distribution64::binary(0.4).unwrap();
    let q = Distribution64::new(vec![0.2, 0.8]).unwrap();
    let w = Channel64::constant(2, &q).unwrap();
    for kind in ExponentKind::ALL {
        assert_eq!(kind.compute(&p, &w, 0.5).unwrap_err(), Error::Degenerate);
    }
    // A channel that is degenerate only off the support of P counts as degenerate.
    let w2 = Channel64::new(vec![vec![0.2, 0.8], vec![0.9, 0.1]]).unwrap();
    let pm = Distribution64::point_mass(2, 0).unwrap();
    assert_eq!(alpha_dual(&pm, &w2, 0.5).unwrap_err(), Error::Degenerate);
}

#[test]
fn invalid_inputs_are_rejected() {
    let (p, w) = bsc_instance();
    assert!(matches!(alpha_dual(&p, &w, -0.1), Err(Error::Domain(_))));
    assert!(matches!(
        alpha_dual(&p, &w, f64::NAN),
        Err(Error::Domain(_))
    ));
    let p3 = Distribution64::uniform(3).unwrap();
    assert!(matches!(alpha_dual(&p3, &w, 0.5), Err(Error::Dimension(_))));
}

#[test]
fn exponents_stay_below_half_rate() {
    for seed in 0..6 {
        let (p, w) = random_instance(200 + seed, 2, 2);
        let mi = mutual_information(&p, &w).unwrap();
        for rate in [mi + 0.01, mi + 0.3, mi + 2.0] {
            for sel in Selection::standard() {
                let v = sel.report(sel.kind.compute(&p, &w, rate).unwrap().value);
                assert!(
                    v >= 0.0 && v < rate / 2.0,
                    "{} = {v} at rate {rate}",
                    sel.column()
                );
            }
        }
    }
}

#[test]
fn alpha_is_monotone_in_rate() {
    let (p, w) = bsc_instance();
    let mi = mutual_information(&p, &w).unwrap();
    let mut prev = 0.0;
    for i in 0..40 {
        let rate = mi + 1e-3 + i as f64 * 0.01;
        let v = alpha_dual(&p, &w, rate).unwrap().value;
        assert!(v > 0.0);
        assert!(v >= prev - 1e-12);
        prev = v;
    }
}

#[test]
fn near_capacity_ratio_approaches_one() {
    let (p, w) = bsc_instance();
    let mi = mutual_information(&p, &w).unwrap();
    let v = mutual_varentropy(&p, &w).unwrap();
    let mut prev_gap = f64::INFINITY;
    for eps in [0.02, 0.01, 0.005] {
        let a = alpha_dual(&p, &w, mi + eps).unwrap().value;
        let gap = (a / (eps * eps / (2.0 * v)) - 1.0).abs();
        assert!(gap < prev_gap, "eps {eps}: gap {gap} >= {prev_gap}");
        prev_gap = gap;
    }
}

#[test]
fn gamma_is_dominated_by_beta_restriction() {
    let (p, w) = bsc_instance();
    let rate = nats_from_bits(0.85);
    for i in 1..=20 {
        let l = i as f64 * 0.05;
        let b = beta_objective(&p, &w, rate, l, l).unwrap();
        let g = l / (1.0 + l) * (rate - renyi_oracle(&p, &w, l));
        assert!(b >= g - 1e-12, "lambda {l}: {b} < {g}");
    }
}

#[test]
fn constant_composition_chain_on_random_instances() {
    for seed in 0..5 {
        let (p, w) = random_instance(300 + seed, 2, 2);
        let rate = mutual_information(&p, &w).unwrap() + 0.08;
        let aleph = aleph_dual(&p, &w, rate).unwrap().value;
        let beth = beth_exponent(&p, &w, rate).unwrap().value;
        let gimel = gimel_exponent(&p, &w, rate).unwrap().value;
        let daleth = daleth_exponent(&p, &w, rate).unwrap().value;
        assert!(aleph >= beth / 2.0 - 1e-7, "seed {seed}");
        assert!(beth >= gimel - 1e-7, "seed {seed}");
        assert!(gimel >= daleth - 1e-7, "seed {seed}");
        assert!(gimel <= 2.0 * aleph + 1e-9);
        // The primal search for gimel cannot undercut the dual value.
        let (_, primal) = gimel_primal_search(&p, &w, rate).unwrap();
        assert!(
            primal >= gimel - 1e-7 && primal <= gimel + 1e-5,
            "seed {seed}: {primal} vs {gimel}"
        );
    }
}

#[test]
fn ipf_matches_one_dimensional_oracle() {
    // For 2x2 the transportation polytope with fixed marginals is a segment.
    let reference = JointDistribution64::new(vec![vec![0.38, 0.02], vec![0.03, 0.57]]).unwrap();
    let rows = Distribution64::new(vec![0.4, 0.6]).unwrap();
    let cols = Distribution64::new(vec![0.3, 0.7]).unwrap();
    let proj = ipf_projection(&reference, &rows, &cols).unwrap();
    let m = proj.joint.to_rows();
    assert_abs_diff_eq!(m[0][0] + m[0][1], 0.4, epsilon = 1e-12);
    assert_abs_diff_eq!(m[0][0] + m[1][0], 0.3, epsilon = 1e-12);
    let r = reference.to_rows();
    let kl = |a: f64| {
        let q = [[a, 0.4 - a], [0.3 - a, 0.3 + a]];
        let mut s = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                if q[x][y] > 0.0 {
                    s += q[x][y] * (q[x][y] / r[x][y]).ln();
                }
            }
        }
        s
    };
    let best = -grid_max(|a| -kl(a), 1e-12, 0.3 - 1e-12);
    assert_abs_diff_eq!(proj.divergence, best, epsilon = 1e-10);
}

#[test]
fn g_function_at_the_channel_is_mutual_information() {
    // With Q = W the projection is P_X W itself, so G = H(P_Y) + sum P W ln W = I.
    let (p, w) = bsc_instance();
    let g = g_function(&w, &p, &w).unwrap();
    assert_abs_diff_eq!(g, mutual_information(&p, &w).unwrap(), epsilon = 1e-10);
}

#[test]
fn selection_names_round_trip() {
    for sel in Selection::standard() {
        let parsed: Selection = sel.column().parse().unwrap();
        assert_eq!(parsed, sel);
    }
    assert_eq!(
        Selection::standard()
            .iter()
            .map(|s| s.column())
            .collect::<Vec<_>>()
            .join(","),
        "alpha,beta,gamma,half_zeta,aleph,half_beth,half_gimel,half_daleth"
    );
    assert!("omega".parse::<Selection>().is_err());
}

#[test]
fn sweep_rows_match_single_evaluations() {
    let (p, w) = bsc_instance();
    let rates = [nats_from_bits(0.8), nats_from_bits(0.85)];
    let which: Vec<Selection> = ["alpha", "half_zeta", "gamma"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let rows = rate_sweep(&p, &w, &rates, &which).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row.cells.len(), 3);
        for cell in &row.cells {
            let direct = cell
                .selection
                .report(cell.selection.kind.compute(&p, &w, row.rate).unwrap().value);
            assert_eq!(cell.value.unwrap(), direct);
        }
    }
    assert!(rate_sweep(&p, &w, &[0.6, 0.6], &which).is_err());
    // Per-cell errors do not abort the sweep.
    let q = Distribution64::uniform(2).unwrap();
    let deg = Channel64::constant(2, &q).unwrap();
    let rows = rate_sweep(&p, &deg, &rates, &which).unwrap();
    assert!(rows.iter().all(|r| r
        .cells
        .iter()
        .all(|c| c.value.is_none() && c.error.is_some())));
}

#[test]
fn single_precision_alpha() {
    let p = softcover::Distribution32::binary(0.4).unwrap();
    let w = softcover::Channel32::bsc(0.05).unwrap();
    let rate = (0.85f64 * LN2) as f32;
    let a = alpha_dual(&p, &w, rate).unwrap().value as f64;
    assert!((bits(a) - 0.0204285).abs() < 5e-5);
}
