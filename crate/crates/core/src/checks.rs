//! Self-verification suite reproducing the reference results: spectra of the
//! transposition extensions, critical noise levels, the explicit eigenvectors,
//! the one-sided necessity test on the Choi map and its mixtures, sufficiency of
//! the closed-form noise bounds, the compression identity and the structural
//! invariants of the extension.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::antisym::verify_transposition_eigvec;
use crate::criteria::{eta_a_bound, eta_b_bound, necessity_check, necessity_operator};
use crate::eigen::min_eigenvalue;
use crate::error::{Error, Result};
use crate::extension::{apply_sym_extension, critical_eta_a, implementable, sym_extension_choi};
use crate::maps::{
    choi_map_3, depolarizing_to, identity_map, mix, noisy_a, noisy_b, transposition_map, LinearMap,
};
use crate::reduction::{a_span_decomposition, phi_apply, v_operator};
use crate::tensor::{principal_minor, Limits, TensorOperator, C64};

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub tol: f64,
    /// Largest deviation measured against `tol`.
    pub max_error: f64,
    pub details: Vec<String>,
}

struct Ctx {
    tol: f64,
    seed: u64,
    limits: Limits,
}

struct Check {
    id: &'static str,
    title: &'static str,
    tol: f64,
    run: fn(&Ctx, &mut Tally) -> Result<()>,
}

/// Accumulates deviations and boolean requirements of one check.
#[derive(Default)]
struct Tally {
    max_error: f64,
    failures: usize,
    details: Vec<String>,
}

impl Tally {
    fn within(&mut self, label: String, err: f64, tol: f64) {
        self.max_error = self.max_error.max(err);
        if !(err <= tol) {
            self.failures += 1;
            self.details.push(format!("FAIL {label}: deviation {err:.3e} > {tol:.1e}"));
        }
    }

    fn require(&mut self, label: String, ok: bool) {
        if !ok {
            self.failures += 1;
            self.details.push(format!("FAIL {label}"));
        }
    }

    fn note(&mut self, text: String) {
        self.details.push(text);
    }
}

const CHECKS: [Check; 10] = [
    Check {
        id: "transposition-qubit-spectrum",
        title: "qubit transposition: lambda_min = -1/N for N = 1..8",
        tol: 1e-9,
        run: qubit_spectrum,
    },
    Check {
        id: "critical-noise-qubit",
        title: "qubit transposition: critical white noise 2/(N+2) for N = 1..6",
        tol: 1e-8,
        run: qubit_critical,
    },
    Check {
        id: "transposition-qutrit",
        title: "qutrit transposition: lambda_min(L_1) = -1, lambda_min(L_N) <= -2/N for N = 2..5",
        tol: 1e-10,
        run: qutrit_spectrum,
    },
    Check {
        id: "antisym-eigenvectors",
        title: "anti-symmetric eigenvectors with eigenvalue -(d-1)/N",
        tol: 1e-10,
        run: antisym_eigenvectors,
    },
    Check {
        id: "choi-map-minor",
        title: "Choi map: necessity minor has determinant -4 for every N",
        tol: 1e-9,
        run: choi_minor,
    },
    Check {
        id: "choi-mixture-window",
        title: "(1-p) id + (p/2) Choi map: Choi spectrum and two-copy window",
        tol: 1e-9,
        run: choi_mixture_check,
    },
    Check {
        id: "transposition-mixture",
        title: "(id + T)/2 on a qubit: never finite-copy implementable",
        tol: 1e-12,
        run: transposition_mixture,
    },
    Check {
        id: "sufficient-noise",
        title: "closed-form noise bounds are sufficient",
        tol: 1e-9,
        run: sufficient_noise,
    },
    Check {
        id: "reduction-pipeline",
        title: "compression of the extension and phase-quadrature span decompositions",
        tol: 1e-11,
        run: reduction_pipeline,
    },
    Check {
        id: "structural",
        title: "extension exactness, monotonicity in N, trace preservation",
        tol: 1e-11,
        run: structural,
    },
];

pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

/// `filter` is a comma-separated list of substrings of check ids.
fn selected(id: &str, filter: Option<&str>) -> bool {
    match filter {
        None => true,
        Some(f) => f
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .any(|s| id.contains(s)),
    }
}

/// Runs the suite. `tol` replaces every per-check tolerance when given.
pub fn run(tol: Option<f64>, only: Option<&str>, seed: u64, limits: &Limits) -> Result<Vec<CheckOutcome>> {
    let chosen: Vec<&Check> = CHECKS.iter().filter(|c| selected(c.id, only)).collect();
    if chosen.is_empty() {
        return Err(Error::Precondition(format!(
            "no check matches `{}`; known ids: {}",
            only.unwrap_or(""),
            check_ids().join(", ")
        )));
    }
    chosen
        .into_iter()
        .map(|c| {
            let ctx = Ctx {
                tol: tol.unwrap_or(c.tol),
                seed,
                limits: *limits,
            };
            let mut tally = Tally::default();
            let outcome = (c.run)(&ctx, &mut tally);
            if let Err(e) = outcome {
                tally.failures += 1;
                tally.details.push(format!("FAIL error: {e}"));
            }
            Ok(CheckOutcome {
                id: c.id,
                title: c.title,
                passed: tally.failures == 0,
                tol: ctx.tol,
                max_error: tally.max_error,
                details: tally.details,
            })
        })
        .collect()
}

fn ext_min(m: &LinearMap, n: usize, limits: &Limits) -> Result<f64> {
    min_eigenvalue(sym_extension_choi(m, n, limits)?.op(), limits)
}

fn qubit_spectrum(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    let t2 = transposition_map(2)?;
    for n in 1..=8 {
        let lam = ext_min(&t2, n, &ctx.limits)?;
        t.within(format!("N={n} lambda_min={lam}"), (lam + 1.0 / n as f64).abs(), ctx.tol);
    }
    Ok(())
}

fn qubit_critical(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    let t2 = transposition_map(2)?;
    for n in 1..=6 {
        let eta = critical_eta_a(&t2, n, crate::DEFAULT_TOL, &ctx.limits)?;
        let want = 2.0 / (n as f64 + 2.0);
        t.within(format!("N={n} eta*={eta}"), (eta - want).abs(), ctx.tol);
    }
    Ok(())
}

fn qutrit_spectrum(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    let t3 = transposition_map(3)?;
    let l1 = ext_min(&t3, 1, &ctx.limits)?;
    t.within(format!("N=1 lambda_min={l1}"), (l1 + 1.0).abs(), ctx.tol);
    for n in 2..=5 {
        let lam = ext_min(&t3, n, &ctx.limits)?;
        let bound = -2.0 / n as f64;
        t.note(format!("N={n} lambda_min={lam:.12} vs -2/N={bound:.12} (gap {:.3e})", lam - bound));
        t.require(format!("N={n} lambda_min={lam} <= -2/N + 1e-9"), lam <= bound + 1e-9);
    }
    Ok(())
}

fn antisym_eigenvectors(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    for (d, n) in [(2, 1), (2, 3), (2, 6), (3, 2), (3, 4), (4, 3)] {
        let c = verify_transposition_eigvec(d, n, &ctx.limits)?;
        t.within(
            format!("d={d} N={n} eigenvalue={}", c.eigenvalue),
            c.expected_residual,
            ctx.tol,
        );
    }
    Ok(())
}

fn det3(m: &TensorOperator) -> C64 {
    let g = |r: usize, c: usize| m.get(r, c);
    g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
        + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
}

fn choi_minor(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    let c = choi_map_3();
    let labels = [vec![0, 0], vec![1, 1], vec![2, 2]];
    for n in [1, 5, 50] {
        let minor = principal_minor(&necessity_operator(&c, n, None)?, &labels)?;
        let det = det3(&minor);
        t.within(format!("N={n} det={det}"), (det - C64::new(-4.0, 0.0)).norm(), ctx.tol);
        let report = necessity_check(&c, n, None, crate::DEFAULT_TOL)?;
        t.require(format!("N={n} conclusive_negative"), report.conclusive_negative);
    }
    Ok(())
}

/// `(1-p) id_3 + (p/2) C`
pub fn choi_mixture(p: f64) -> Result<LinearMap> {
    mix(&[identity_map(3)?, choi_map_3()], &[1.0 - p, p / 2.0])
}

fn choi_mixture_check(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    for p in [6.0 / 7.0, 0.9] {
        let lam = min_eigenvalue(choi_mixture(p)?.choi(), &ctx.limits)?;
        let want = -(7.0 * p - 6.0) / 2.0;
        t.within(format!("p={p:.6} Choi lambda_min={lam}"), (lam - want).abs(), ctx.tol);
    }
    let yes = implementable(&choi_mixture(0.88)?, 2, crate::DEFAULT_TOL, &ctx.limits)?;
    t.note(format!("p=0.88 N=2 lambda_min={:.12}", yes.lambda_min));
    t.require("p=0.88 two-copy implementable".into(), yes.psd);
    let no = implementable(&choi_mixture(0.90)?, 2, crate::DEFAULT_TOL, &ctx.limits)?;
    t.note(format!("p=0.90 N=2 lambda_min={:.12}", no.lambda_min));
    t.require("p=0.90 not two-copy implementable".into(), !no.psd);
    Ok(())
}

fn transposition_mixture(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    let m = mix(&[identity_map(2)?, transposition_map(2)?], &[0.5, 0.5])?;
    for n in [2, 10, 100] {
        let op = necessity_operator(&m, n, None)?;
        let minor = principal_minor(&op, &[vec![0, 1], vec![1, 0]])?;
        let want = TensorOperator::from_real_rows(vec![2], &[vec![0.0, 0.5], vec![0.5, (n - 1) as f64]])?;
        t.within(format!("N={n} minor"), minor.max_abs_diff(&want), ctx.tol);
        let report = necessity_check(&m, n, None, crate::DEFAULT_TOL)?;
        t.require(
            format!("N={n} conclusive_negative (lambda_min={})", report.lambda_min),
            report.conclusive_negative,
        );
    }
    Ok(())
}

/// The maps exercised by the sufficiency check: transpositions, the Choi map and
/// five seeded mixtures `(1-p) id + p X` with `X` a transposition or the Choi map.
pub fn positive_test_maps(seed: u64) -> Result<Vec<(String, LinearMap)>> {
    let mut maps = vec![
        ("T2".to_string(), transposition_map(2)?),
        ("T3".to_string(), transposition_map(3)?),
        ("choi3".to_string(), choi_map_3()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..5 {
        let p: f64 = rng.random_range(0.0..1.0);
        let (name, x) = match k % 3 {
            0 => ("T2", transposition_map(2)?),
            1 => ("T3", transposition_map(3)?),
            _ => ("choi3", choi_map_3()),
        };
        let d = x.d_in();
        maps.push((
            format!("(1-{p:.4}) id{d} + {p:.4} {name}"),
            mix(&[identity_map(d)?, x], &[1.0 - p, p])?,
        ));
    }
    Ok(maps)
}

fn sufficient_noise(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    for (name, m) in positive_test_maps(ctx.seed)? {
        for n in 1..=3 {
            let eb = eta_b_bound(m.d_in(), n)?;
            let lb = ext_min(&noisy_b(&m, eb)?, n, &ctx.limits)?;
            t.within(format!("{name} N={n} input noise {eb:.6}: lambda_min={lb}"), (-lb).max(0.0), ctx.tol);
            let ea = eta_a_bound(m.d_out(), m.d_in(), n)?;
            let la = ext_min(&noisy_a(&m, ea)?, n, &ctx.limits)?;
            t.within(format!("{name} N={n} white noise {ea:.6}: lambda_min={la}"), (-la).max(0.0), ctx.tol);
        }
    }
    Ok(())
}

fn reduction_pipeline(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    // entrywise identity is held to 1e-12 unless overridden
    let pipeline_tol = ctx.tol.min(1e-12);
    for (name, m, n) in [
        ("T2", transposition_map(2)?, 2),
        ("T2", transposition_map(2)?, 3),
        ("choi3", choi_map_3(), 2),
    ] {
        let ext = sym_extension_choi(&m, n, &ctx.limits)?;
        let v = v_operator(m.d_in(), m.d_out(), n, &ctx.limits)?;
        let got = phi_apply(&v, ext.op())?;
        let want = necessity_operator(&m, n, None)?;
        t.within(format!("{name} N={n} compression"), got.max_abs_diff(&want), pipeline_tol);
    }
    for d in [2, 3] {
        for n in [2, 3] {
            for i in 0..d {
                for j in 0..d {
                    let w = a_span_decomposition(i, j, d, n, n + 2)?;
                    t.within(format!("a_{i}{j} d={d} N={n} M={}", n + 2), w.recon_error, ctx.tol);
                }
            }
        }
    }
    Ok(())
}

/// `G G† / Tr(G G†)` for a complex Gaussian `G`.
pub fn random_density(d: usize, rng: &mut impl Rng) -> TensorOperator {
    let g: Vec<C64> = (0..d * d)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut data = vec![C64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            data[r * d + c] = (0..d).map(|k| g[r * d + k] * g[c * d + k].conj()).sum();
        }
    }
    let rho = TensorOperator::new(vec![d], data).expect("finite");
    let tr = rho.trace().re;
    rho.scale(1.0 / tr)
}

fn structural(ctx: &Ctx, t: &mut Tally) -> Result<()> {
    let exact_tol = ctx.tol.min(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let maps: Vec<(&str, LinearMap)> = vec![
        ("T2", transposition_map(2)?),
        ("T3", transposition_map(3)?),
        ("choi3", choi_map_3()),
        ("id2", identity_map(2)?),
        ("depol3", depolarizing_to(3, 3, 1.0)?),
        ("choi-mixture p=0.88", choi_mixture(0.88)?),
        ("noisy T2 eta=0.3", noisy_a(&transposition_map(2)?, 0.3)?),
    ];

    for (name, m) in &maps {
        let n = 3;
        let ext = sym_extension_choi(m, n, &ctx.limits)?;
        let mut worst_direct: f64 = 0.0;
        let mut worst_choi: f64 = 0.0;
        for _ in 0..20 {
            let rho = random_density(m.d_in(), &mut rng);
            let single = m.apply(&rho)?;
            let copies = vec![rho; n];
            worst_direct = worst_direct.max(apply_sym_extension(m, &copies)?.max_abs_diff(&single));
            worst_choi = worst_choi.max(ext.evaluate_product(&copies)?.max_abs_diff(&single));
        }
        t.within(format!("{name} N={n} direct extension on rho^N"), worst_direct, exact_tol);
        t.within(format!("{name} N={n} Choi contraction on rho^N"), worst_choi, ctx.tol);
    }

    for (name, m) in &maps {
        let mut prev = f64::NEG_INFINITY;
        for n in 1..=5 {
            let lam = ext_min(m, n, &ctx.limits)?;
            t.require(
                format!("{name} lambda_min non-decreasing at N={n} ({lam} after {prev})"),
                lam >= prev - 1e-9,
            );
            prev = lam;
        }
    }

    for (name, m) in maps.iter().filter(|(_, m)| m.is_trace_preserving(1e-12)) {
        for n in 1..=3 {
            let ext = sym_extension_choi(m, n, &ctx.limits)?;
            let keep: Vec<usize> = (1..=n).collect();
            let reduced = ext.op().partial_trace(&keep)?;
            let eye = TensorOperator::identity(&vec![m.d_in(); n])?;
            t.within(format!("{name} N={n} trace preservation"), reduced.max_abs_diff(&eye), ctx.tol);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_and_unknown_ids() {
        let l = Limits::default();
        let r = run(None, Some("choi-map-minor"), 0, &l).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].passed, "{:?}", r[0].details);
        assert!(run(None, Some("nothing-like-this"), 0, &l).is_err());
    }

    #[test]
    fn over_tight_tolerance_fails() {
        let l = Limits::default();
        let r = run(Some(0.0), Some("critical-noise-qubit,choi-mixture"), 0, &l).unwrap();
        assert!(r.iter().any(|o| !o.passed));
    }
}
