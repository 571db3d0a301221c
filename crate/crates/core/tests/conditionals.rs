//! Every sampler update checked against its full conditional, obtained by
//! direct quadrature of the unnormalized log posterior on a two-SNP
//! instance.

mod common;

use common::*;
use mrcorr::ld_reference::{uniform_partition, BlockCorr};
use mrcorr::model::SweepStreams;
use mrcorr::mr_corr2::{self, BlockData};
use mrcorr::rng::StreamKey;
use mrcorr::{mr_corr, Constraints, HarmonizedDataset, Hyperparams, SamplerState};

const DRAWS: usize = 50_000;

fn dataset() -> HarmonizedDataset {
    HarmonizedDataset::from_stats(vec![0.25, -0.12], vec![0.05, 0.06], vec![0.10, 0.07], vec![0.04, 0.05]).unwrap()
}

fn hyper() -> Hyperparams {
    Hyperparams {
        a_gamma: 2.0,
        b_gamma: 0.05,
        a_alpha: 2.0,
        b_alpha: 0.02,
        a: 2.0,
        b: 3.0,
        beta_prior_var: None,
    }
}

fn state() -> SamplerState {
    SamplerState {
        beta0: 0.3,
        beta1: -0.5,
        gamma: vec![0.22, -0.1],
        alpha_tilde: vec![0.03, 0.04],
        eta: vec![false, true],
        sigma2_gamma: 0.03,
        sigma2_alpha: 0.01,
        omega: 0.35,
    }
}

fn check(name: &str, samples: &[f64], log_density: impl Fn(f64) -> f64) {
    let d = ks_against_density(samples, log_density);
    let crit = ks_critical_001(samples.len());
    assert!(d < crit, "{name}: KS distance {d:.5} exceeds {crit:.5}");
}

fn check_probability(name: &str, hits: usize, n: usize, p: f64) {
    let phat = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((phat - p).abs() < 3.29 * se, "{name}: frequency {phat:.5} vs probability {p:.5}");
}

fn with<'a, F: Fn(&mut SamplerState, f64) + 'a>(base: &'a SamplerState, set: F) -> impl Fn(f64) -> SamplerState + 'a {
    move |x| {
        let mut s = base.clone();
        set(&mut s, x);
        s
    }
}

/// Log posterior of a log-scale variance coordinate, Jacobian included.
fn log_scale(lp: impl Fn(f64) -> f64) -> impl Fn(f64) -> f64 {
    move |u| lp(u.exp()) + u
}

fn logit_scale(lp: impl Fn(f64) -> f64) -> impl Fn(f64) -> f64 {
    move |u| {
        let w = 1.0 / (1.0 + (-u).exp());
        lp(w) + w.ln() + (1.0 - w).ln()
    }
}

fn logit(w: f64) -> f64 {
    (w / (1.0 - w)).ln()
}

mod independent {
    use super::*;

    fn lp(s: &SamplerState) -> f64 {
        mr_corr::log_posterior(s, &dataset(), &hyper())
    }

    #[test]
    fn gamma_update() {
        let ds = dataset();
        let base = state();
        let key = StreamKey::new(11, &[]);
        let mut draws = [Vec::new(), Vec::new()];
        for it in 0..DRAWS as u64 {
            let mut s = base.clone();
            mr_corr::update_gamma(&mut s, &ds, SweepStreams { key: &key, iteration: it });
            draws[0].push(s.gamma[0]);
            draws[1].push(s.gamma[1]);
        }
        for k in 0..2 {
            let at = with(&base, |s, x| s.gamma[k] = x);
            check(&format!("gamma[{k}]"), &draws[k], |x| lp(&at(x)));
        }
    }

    #[test]
    fn eta_alpha_update() {
        let ds = dataset();
        let base = state();
        let key = StreamKey::new(12, &[]);
        let mut alpha = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
        for it in 0..DRAWS as u64 {
            let mut s = base.clone();
            mr_corr::update_eta_alpha(&mut s, &ds, &Constraints::default(), SweepStreams { key: &key, iteration: it });
            for k in 0..2 {
                alpha[k][usize::from(s.eta[k])].push(s.alpha_tilde[k]);
            }
        }
        for k in 0..2 {
            let sd = base.sigma2_alpha.sqrt();
            let mass = |eta: bool| {
                let at = with(&base, move |s, a| {
                    s.eta[k] = eta;
                    s.alpha_tilde[k] = a;
                });
                GridCdf::from_log_density(-12.0 * sd, 12.0 * sd, 30_001, |a| lp(&at(a))).log_mass
            };
            let p1 = 1.0 / (1.0 + (mass(false) - mass(true)).exp());
            check_probability(&format!("eta[{k}]"), alpha[k][1].len(), DRAWS, p1);
            for eta in [false, true] {
                let at = with(&base, move |s, a| {
                    s.eta[k] = eta;
                    s.alpha_tilde[k] = a;
                });
                check(&format!("alpha[{k}] | eta={eta}"), &alpha[k][usize::from(eta)], |a| lp(&at(a)));
            }
        }
    }

    #[test]
    fn slope_updates() {
        let ds = dataset();
        let base = state();
        let h = hyper();
        let mut rng = StreamKey::new(13, &[]).sequential(0);
        let (mut b0, mut b1) = (Vec::new(), Vec::new());
        for _ in 0..DRAWS {
            let mut s = base.clone();
            assert!(!mr_corr::update_beta0(&mut s, &ds, &h, &mut rng));
            assert!(!mr_corr::update_beta1(&mut s, &ds, &h, &mut rng));
            b0.push(s.beta0);
            b1.push(s.beta1);
        }
        check("beta0", &b0, |x| lp(&with(&base, |s, x| s.beta0 = x)(x)));
        check("beta1", &b1, |x| lp(&with(&base, |s, x| s.beta1 = x)(x)));
    }

    #[test]
    fn variance_and_fraction_updates() {
        let ds = dataset();
        let base = state();
        let h = hyper();
        let mut rng = StreamKey::new(14, &[]).sequential(0);
        let (mut sg, mut sa, mut om) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..DRAWS {
            let mut s = base.clone();
            mr_corr::update_variances_omega(&mut s, &ds, &h, &Constraints::default(), &mut rng);
            sg.push(s.sigma2_gamma.ln());
            sa.push(s.sigma2_alpha.ln());
            om.push(logit(s.omega));
        }
        check("sigma2_gamma", &sg, log_scale(|v| lp(&with(&base, |s, v| s.sigma2_gamma = v)(v))));
        check("sigma2_alpha", &sa, log_scale(|v| lp(&with(&base, |s, v| s.sigma2_alpha = v)(v))));
        check("omega", &om, logit_scale(|w| lp(&with(&base, |s, w| s.omega = w)(w))));
    }
}

mod blocked {
    use super::*;

    const GRID: usize = 601;

    fn blocks() -> Vec<BlockData> {
        let partition = uniform_partition(2, 2).unwrap();
        let corr = BlockCorr {
            matrices: vec![vec![1.0, 0.5, 0.5, 1.0]],
            shrinkage_lambda: 0.0,
        };
        mr_corr2::precompute_blocks(&dataset(), &partition, &corr).unwrap()
    }

    fn hyper2() -> Hyperparams {
        Hyperparams {
            beta_prior_var: Some(0.5),
            ..hyper()
        }
    }

    fn block_state(eta: bool) -> SamplerState {
        SamplerState {
            eta: vec![eta],
            ..state()
        }
    }

    /// Log values of both marginals of a bivariate density on a square grid.
    fn marginals(
        range: [(f64, f64); 2],
        f: impl Fn(f64, f64) -> f64,
    ) -> ([GridCdf; 2], f64) {
        let step = [0, 1].map(|d| (range[d].1 - range[d].0) / (GRID - 1) as f64);
        let x = |d: usize, i: usize| range[d].0 + i as f64 * step[d];
        let vals: Vec<f64> = (0..GRID * GRID).map(|ij| f(x(0, ij / GRID), x(1, ij % GRID))).collect();
        let shift = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let trap = |i: usize| if i == 0 || i == GRID - 1 { 0.5 } else { 1.0 };
        let mut m0 = vec![0.0; GRID];
        let mut m1 = vec![0.0; GRID];
        for i in 0..GRID {
            for j in 0..GRID {
                let v = (vals[i * GRID + j] - shift).exp();
                m0[i] += trap(j) * step[1] * v;
                m1[j] += trap(i) * step[0] * v;
            }
        }
        let total: f64 = m0.iter().enumerate().map(|(i, v)| trap(i) * step[0] * v).sum();
        let g = |d: usize, m: &[f64]| {
            let logs: Vec<f64> = m.iter().map(|v| v.ln()).collect();
            GridCdf::from_log_values(range[d].0, step[d], &logs)
        };
        ([g(0, &m0), g(1, &m1)], total.ln() + shift)
    }

    fn check_pair(name: &str, draws: &[Vec<f64>; 2], f: impl Fn(f64, f64) -> f64) {
        let range = [padded_range(&draws[0]), padded_range(&draws[1])];
        let (cdfs, _) = marginals(range, f);
        for d in 0..2 {
            let dist = ks_distance(&draws[d], |x| cdfs[d].eval(x));
            let crit = ks_critical_001(draws[d].len());
            assert!(dist < crit, "{name}[{d}]: KS distance {dist:.5} exceeds {crit:.5}");
        }
    }

    fn lp2(s: &SamplerState) -> f64 {
        mr_corr2::log_posterior(s, &blocks(), &hyper2())
    }

    #[test]
    fn gamma_block_update() {
        let bl = blocks();
        let h = hyper2();
        for eta in [false, true] {
            let base = block_state(eta);
            let key = StreamKey::new(21, &[u64::from(eta)]);
            let mut draws = [Vec::new(), Vec::new()];
            for it in 0..DRAWS as u64 {
                let mut s = base.clone();
                mr_corr2::update_gamma_block(&mut s, &bl[0], 0, SweepStreams { key: &key, iteration: it }).unwrap();
                draws[0].push(s.gamma[0]);
                draws[1].push(s.gamma[1]);
            }
            check_pair(&format!("gamma | eta={eta}"), &draws, |a, b| {
                let mut s = base.clone();
                s.gamma = vec![a, b];
                mr_corr2::log_posterior(&s, &bl, &h)
            });
            // the pair is drawn jointly: compare the correlation too
            let c = mr_corr2::gamma_block_conditional(&base, &bl[0], 0).unwrap();
            let want = c.cov[1] / (c.cov[0] * c.cov[3]).sqrt();
            let (m0, m1) = (mean(&draws[0]), mean(&draws[1]));
            let cov = draws[0].iter().zip(&draws[1]).map(|(a, b)| (a - m0) * (b - m1)).sum::<f64>() / (DRAWS - 1) as f64;
            let got = cov / (var(&draws[0]) * var(&draws[1])).sqrt();
            let se = (1.0 - want * want) / (DRAWS as f64).sqrt();
            assert!((got - want).abs() < 4.0 * se, "gamma correlation {got} vs {want}");
        }
    }

    #[test]
    fn eta_alpha_block_update() {
        let bl = blocks();
        let h = hyper2();
        // a larger prior fraction so both indicator values are well sampled
        let base = SamplerState {
            omega: 0.8,
            ..block_state(false)
        };
        let key = StreamKey::new(22, &[]);
        let mut draws = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
        for it in 0..DRAWS as u64 {
            let mut s = base.clone();
            mr_corr2::update_eta_alpha_block(&mut s, &bl[0], 0, None, SweepStreams { key: &key, iteration: it }).unwrap();
            let e = usize::from(s.eta[0]);
            draws[e][0].push(s.alpha_tilde[0]);
            draws[e][1].push(s.alpha_tilde[1]);
        }
        let at = |eta: bool| {
            let base = base.clone();
            let bl = bl.clone();
            move |a: f64, b: f64| {
                let mut s = base.clone();
                s.eta = vec![eta];
                s.alpha_tilde = vec![a, b];
                mr_corr2::log_posterior(&s, &bl, &h)
            }
        };
        let sd = base.sigma2_alpha.sqrt();
        let box_range = [(-12.0 * sd, 12.0 * sd); 2];
        let (_, m0) = marginals(box_range, at(false));
        let (_, m1) = marginals(box_range, at(true));
        let p1 = 1.0 / (1.0 + (m0 - m1).exp());
        check_probability("eta", draws[1][0].len(), DRAWS, p1);
        assert!(draws[0][0].len() > 5_000 && draws[1][0].len() > 5_000, "instance should mix both indicator values");
        check_pair("alpha | eta=0", &draws[0], at(false));
        check_pair("alpha | eta=1", &draws[1], at(true));
    }

    #[test]
    fn global_updates() {
        let bl = blocks();
        let h = hyper2();
        for eta in [false, true] {
            let base = block_state(eta);
            let mut rng = StreamKey::new(23, &[u64::from(eta)]).sequential(0);
            let mut cols: [Vec<f64>; 5] = Default::default();
            for _ in 0..DRAWS {
                let mut s = base.clone();
                mr_corr2::update_globals(&mut s, &bl, &h, &Constraints::default(), &mut rng);
                cols[0].push(s.beta0);
                cols[1].push(s.beta1);
                cols[2].push(s.sigma2_gamma.ln());
                cols[3].push(s.sigma2_alpha.ln());
                cols[4].push(logit(s.omega));
            }
            let tag = |p: &str| format!("{p} | eta={eta}");
            check(&tag("beta0"), &cols[0], |x| lp2(&with(&base, |s, x| s.beta0 = x)(x)));
            check(&tag("beta1"), &cols[1], |x| lp2(&with(&base, |s, x| s.beta1 = x)(x)));
            check(&tag("sigma2_gamma"), &cols[2], log_scale(|v| lp2(&with(&base, |s, v| s.sigma2_gamma = v)(v))));
            check(&tag("sigma2_alpha"), &cols[3], log_scale(|v| lp2(&with(&base, |s, v| s.sigma2_alpha = v)(v))));
            check(&tag("omega"), &cols[4], logit_scale(|w| lp2(&with(&base, |s, w| s.omega = w)(w))));
        }
    }
}
