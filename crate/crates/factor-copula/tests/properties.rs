//! Randomized invariants of the copula layers: Fréchet bounds,
//! rectangle monotonicity, conditional-distribution roundtrips, parameter
//! conversions, sampler reproducibility, and rank invariance of the test
//! statistic.

use factor_copula::bicop::{tau_of_theta, theta_of_tau, Bicop, BicopFamily};
use factor_copula::citest::t_statistic;
use factor_copula::factor_model::FactorModel;
use factor_copula::quadrature::IntegratorConfig;
use factor_copula::sampling::{sample_neofc, RngHandle};
use factor_copula::stats::pseudo_observations;
use proptest::prelude::*;
use rayon::prelude::*;

/// Families with a free parameter and a density.
const SMOOTH: [BicopFamily; 7] = [
    BicopFamily::Clayton,
    BicopFamily::Frank,
    BicopFamily::GumbelHougaard,
    BicopFamily::Gaussian,
    BicopFamily::Fgm,
    BicopFamily::Amh,
    BicopFamily::Plackett,
];

const ALL: [BicopFamily; 11] = [
    BicopFamily::Independence,
    BicopFamily::FrechetUpper,
    BicopFamily::FrechetLower,
    BicopFamily::Clayton,
    BicopFamily::Frank,
    BicopFamily::GumbelHougaard,
    BicopFamily::Gaussian,
    BicopFamily::Fgm,
    BicopFamily::Amh,
    BicopFamily::Mardia,
    BicopFamily::Plackett,
];

/// Map `raw` in [0, 1] to a parameter in a moderate slice of the family's
/// domain (extreme corners are exercised by the unit tests).
fn moderate_theta(family: BicopFamily, raw: f64) -> f64 {
    match family {
        BicopFamily::Independence | BicopFamily::FrechetUpper | BicopFamily::FrechetLower => 0.0,
        BicopFamily::Clayton => raw * 8.0,
        BicopFamily::Frank => -20.0 + 40.0 * raw,
        BicopFamily::GumbelHougaard => 1.0 + 7.0 * raw,
        BicopFamily::Gaussian => -0.98 + 1.96 * raw,
        BicopFamily::Fgm | BicopFamily::Mardia => -1.0 + 2.0 * raw,
        BicopFamily::Amh => -1.0 + 1.99 * raw,
        BicopFamily::Plackett => (0.02f64.ln() + raw * (50.0f64 / 0.02).ln()).exp(),
    }
}

fn arb_any() -> impl Strategy<Value = Bicop> {
    (0..ALL.len(), 0.0..=1.0f64)
        .prop_map(|(k, raw)| Bicop::new(ALL[k], moderate_theta(ALL[k], raw)).unwrap())
}

fn arb_smooth() -> impl Strategy<Value = Bicop> {
    (0..SMOOTH.len(), 0.0..=1.0f64)
        .prop_map(|(k, raw)| Bicop::new(SMOOTH[k], moderate_theta(SMOOTH[k], raw)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn cdf_stays_inside_the_frechet_sandwich(
        cop in arb_any(),
        u in 0.001..0.999f64,
        v in 0.001..0.999f64,
    ) {
        let c = cop.cdf(u, v);
        let lower = (u + v - 1.0).max(0.0);
        let upper = u.min(v);
        prop_assert!(
            c >= lower - 1e-9 && c <= upper + 1e-9,
            "{} theta {}: C({u}, {v}) = {c} outside [{lower}, {upper}]",
            cop.family().name(),
            cop.theta(),
        );
    }

    #[test]
    fn rectangles_carry_nonnegative_mass(
        cop in arb_any(),
        a in 0.001..0.999f64,
        b in 0.001..0.999f64,
        c in 0.001..0.999f64,
        d in 0.001..0.999f64,
    ) {
        let (u1, u2) = (a.min(b), a.max(b));
        let (v1, v2) = (c.min(d), c.max(d));
        let mass = cop.cdf(u2, v2) - cop.cdf(u1, v2) - cop.cdf(u2, v1) + cop.cdf(u1, v1);
        prop_assert!(
            mass >= -1e-9,
            "{} theta {}: rectangle [{u1},{u2}]x[{v1},{v2}] has mass {mass}",
            cop.family().name(),
            cop.theta(),
        );
    }

    #[test]
    fn conditional_quantile_roundtrips(
        cop in arb_smooth(),
        p in 0.001..0.999f64,
        v in 0.001..0.999f64,
    ) {
        let u = cop.hinv(p, v).unwrap();
        let back = cop.hfunc(u, v);
        prop_assert!(
            (back - p).abs() <= 1e-9,
            "{} theta {}: h(hinv({p}|{v})|{v}) = {back}",
            cop.family().name(),
            cop.theta(),
        );
    }

    #[test]
    fn density_matches_the_mixed_difference_of_the_cdf(
        cop in arb_smooth(),
        u in 0.15..0.85f64,
        v in 0.15..0.85f64,
    ) {
        let h = 1e-4;
        let fd = (cop.cdf(u + h, v + h) - cop.cdf(u + h, v - h) - cop.cdf(u - h, v + h)
            + cop.cdf(u - h, v - h))
            / (4.0 * h * h);
        let pdf = cop.pdf(u, v).unwrap();
        prop_assert!(
            (fd - pdf).abs() <= 1e-4 * pdf.abs() + 1e-6,
            "{} theta {}: pdf({u}, {v}) = {pdf}, finite difference {fd}",
            cop.family().name(),
            cop.theta(),
        );
    }

    #[test]
    fn tau_theta_conversions_roundtrip(
        k in 0..8usize,
        raw in 0.0..=1.0f64,
    ) {
        let family = [
            BicopFamily::Clayton,
            BicopFamily::Frank,
            BicopFamily::GumbelHougaard,
            BicopFamily::Gaussian,
            BicopFamily::Fgm,
            BicopFamily::Amh,
            BicopFamily::Mardia,
            BicopFamily::Plackett,
        ][k];
        let (lo, hi) = family.tau_range();
        let margin = 1e-3 * (hi - lo);
        let tau = lo + margin + raw * (hi - lo - 2.0 * margin);
        let theta = theta_of_tau(family, tau).unwrap();
        let back = tau_of_theta(family, theta).unwrap();
        prop_assert!(
            (back - tau).abs() <= 1e-8,
            "{}: tau {tau} -> theta {theta} -> tau {back}",
            family.name(),
        );
    }

    #[test]
    fn amh_negative_parameter_is_stochastically_increasing(
        theta in -0.999..-0.01f64,
        u in 0.05..0.95f64,
        v in 0.05..0.95f64,
    ) {
        // d2C/dv2 >= 0 is the stochastic-increasingness certificate used by
        // the dependence-ordering argument.
        let cop = Bicop::new(BicopFamily::Amh, theta).unwrap();
        let h = 1e-4;
        let second = (cop.cdf(u, v + h) - 2.0 * cop.cdf(u, v) + cop.cdf(u, v - h)) / (h * h);
        prop_assert!(second >= -1e-6, "theta {theta}: d2C/dv2({u}, {v}) = {second}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampling_is_reproducible_by_seed(
        seed in any::<u64>(),
        tau in 0.1..0.7f64,
    ) {
        let links = (0..3)
            .map(|_| Bicop::from_tau(BicopFamily::Clayton, tau).unwrap())
            .collect::<Vec<_>>();
        let model = FactorModel::one_factor(links).unwrap();
        let a = sample_neofc(&model, 40, RngHandle::new(seed)).unwrap();
        let b = sample_neofc(&model, 40, RngHandle::new(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        let c = sample_neofc(&model, 40, RngHandle::new(seed.wrapping_add(1))).unwrap();
        prop_assert_ne!(&a, &c);
    }

    #[test]
    fn t_statistic_ignores_monotone_relabeling(
        rows in proptest::collection::vec(proptest::collection::vec(0.001..0.999f64, 3), 40),
        picks in (0..4usize, 0..4usize, 0..4usize),
    ) {
        let picks = [picks.0, picks.1, picks.2];
        let raw: Vec<Vec<f64>> = rows.clone();
        let transforms: [fn(f64) -> f64; 4] = [
            |x| x.exp(),
            |x| x.powi(3),
            |x| -1.0 / (x + 0.1),
            |x| x.atan(),
        ];
        let mapped: Vec<Vec<f64>> = raw
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, &x)| transforms[picks[j]](x))
                    .collect()
            })
            .collect();
        let t_raw = t_statistic(&pseudo_observations(&raw).unwrap()).unwrap();
        let t_mapped = t_statistic(&pseudo_observations(&mapped).unwrap()).unwrap();
        prop_assert_eq!(t_raw, t_mapped);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn outer_cdf_is_monotone_and_bounded(
        first in (0..SMOOTH.len(), 0.1..0.9f64),
        second in (0..SMOOTH.len(), 0.1..0.9f64),
    ) {
        let cops = [first, second]
            .iter()
            .map(|&(k, raw)| Bicop::new(SMOOTH[k], moderate_theta(SMOOTH[k], raw)).unwrap())
            .collect::<Vec<_>>();
        let model = FactorModel::one_factor(cops).unwrap();
        let cfg = IntegratorConfig::default_for_layers(1);
        let grid = [0.25, 0.5, 0.75];
        let mut values = [[0.0f64; 3]; 3];
        for (i, &u) in grid.iter().enumerate() {
            for (j, &v) in grid.iter().enumerate() {
                let c = model.outer_cdf(&[u, v], &cfg).unwrap().value;
                let lower = (u + v - 1.0).max(0.0);
                prop_assert!(
                    c >= lower - 1e-6 && c <= u.min(v) + 1e-6,
                    "C({u}, {v}) = {c} breaks the Fréchet bounds"
                );
                values[i][j] = c;
            }
        }
        for i in 0..3 {
            for j in 0..2 {
                prop_assert!(values[i][j] <= values[i][j + 1] + 1e-8);
                prop_assert!(values[j][i] <= values[j + 1][i] + 1e-8);
            }
        }
    }
}

/// Bootstrapping the statistic under the true null model (no refit) must
/// produce roughly uniform p-values.
#[test]
fn no_refit_bootstrap_p_values_are_uniform() {
    let taus = [0.4, 0.5, 0.6];
    let links = taus
        .iter()
        .map(|&t| Bicop::from_tau(BicopFamily::Clayton, t).unwrap())
        .collect::<Vec<_>>();
    let truth = FactorModel::one_factor(links).unwrap();

    let n = 100;
    let n_boot = 199;
    let reps = 200;
    let base = RngHandle::new(0x0b5e);

    let mut p_values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let handle = base.child(rep);
            let data = sample_neofc(&truth, n, handle.child(0)).unwrap();
            let t_obs = t_statistic(&pseudo_observations(&data).unwrap()).unwrap();
            let hits = (0..n_boot)
                .filter(|&k| {
                    let sim = sample_neofc(&truth, n, handle.child(k + 1)).unwrap();
                    let t = t_statistic(&pseudo_observations(&sim).unwrap()).unwrap();
                    t <= t_obs
                })
                .count();
            hits as f64 / n_boot as f64
        })
        .collect();

    // Every p-value sits on the bootstrap grid {0, 1/N, ..., 1}.
    for &p in &p_values {
        let scaled = p * n_boot as f64;
        assert!((scaled - scaled.round()).abs() < 1e-9, "off-grid p {p}");
    }

    p_values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let m = p_values.len() as f64;
    let ks = p_values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let hi = (i + 1) as f64 / m - p;
            let lo = p - i as f64 / m;
            hi.max(lo)
        })
        .fold(0.0f64, f64::max);
    assert!(ks < 0.12, "KS distance from uniform {ks}");
}
