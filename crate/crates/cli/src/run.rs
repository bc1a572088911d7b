//! Solving a configured sweep and evaluating the requested checks.

use std::collections::BTreeSet;
use std::path::PathBuf;

use nikishin_hp::analysis::{
    first_level_sign_changes, pole_attraction, Experiment, Instance, MomentSource, PoleAttraction,
    RowOutcome,
};
use nikishin_hp::hermite_pade::{
    check_orthogonality, perturbed_reduce, solve_type2_with, type2_remainder_tail, MultiIndex,
};
use nikishin_hp::nikishin::{check_chile, check_ratio_formula, NikishinSystem};
use nikishin_hp::{Error, Precision, Scalar};
use rayon::prelude::*;

use crate::cache::MomentCache;
use crate::config::{Check, Config};
use crate::error::CliError;

/// Resolved command-line and config choices.
#[derive(Clone, Debug)]
pub struct Settings {
    pub precision: Precision,
    pub output_dir: PathBuf,
    pub checks: BTreeSet<Check>,
    pub use_cache: bool,
}

/// Zeros of one component for one solved index.
#[derive(Debug)]
pub enum ZeroReport {
    Found(PoleAttraction),
    /// The component vanished identically.
    Degenerate,
}

#[derive(Debug)]
pub struct RowReport {
    pub outcome: RowOutcome,
    pub orthogonality: Scalar,
    /// `None` without a perturbation.
    pub reduction: Option<Scalar>,
    pub sign_changes: usize,
    pub sign_changes_expected: usize,
    /// Components `1..=m`.
    pub zeros: Vec<ZeroReport>,
    pub type2: Option<Scalar>,
}

impl RowReport {
    pub fn n(&self) -> &MultiIndex {
        &self.outcome.row.n
    }

    /// Every pole holds its multiplicity in zeros of every component and no
    /// zero strays.
    pub fn attraction_exact(&self) -> bool {
        self.zeros.iter().all(|z| match z {
            ZeroReport::Found(pa) => pa.exact(),
            ZeroReport::Degenerate => false,
        })
    }
}

/// Residual gate outcome for the report.
#[derive(Debug)]
pub enum Gate {
    NotApplicable(&'static str),
    Residual {
        max: Scalar,
        tolerance: Scalar,
        samples: usize,
    },
    SignChanges {
        min_margin: i64,
        rows: usize,
    },
    Attraction {
        row: usize,
    },
}

#[derive(Debug)]
pub struct Outcome {
    pub base: Instance,
    pub rows: Vec<RowReport>,
    pub gates: Vec<(Check, Gate, bool)>,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.2)
    }
}

fn numeric(e: Error) -> CliError {
    CliError::Numeric(e.to_string())
}

fn validation(e: Error) -> CliError {
    CliError::Validation(e.to_string())
}

/// Checks the zero-counting radius against the poles and the last support.
fn check_epsilon(inst: &Instance, eps: &Scalar) -> Result<(), CliError> {
    let last = inst.sys.generator(inst.sys.m()).support();
    let poles = inst.pert.poles();
    for (i, p) in poles.iter().enumerate() {
        if last.distance(&p.location) <= *eps {
            return Err(CliError::Validation(format!(
                "pole_epsilon reaches the last support from pole {}",
                p.location.re.to_sci_string(6)
            )));
        }
        if poles[i + 1..]
            .iter()
            .any(|q| (&p.location - &q.location).abs() <= eps.mul_pow2(1))
        {
            return Err(CliError::Validation(
                "pole_epsilon exceeds half the distance between two poles".into(),
            ));
        }
    }
    Ok(())
}

fn warn_hypotheses(cfg: &Config, sweep: &[MultiIndex], sys: &NikishinSystem) {
    if let Some(c) = cfg.spread_bound {
        for n in sweep.iter().filter(|n| n.spread() > c) {
            log::warn!(
                "multi-index {n} has spread {} above the declared bound {c}",
                n.spread()
            );
        }
    }
    let m = sys.m();
    if m >= 2 {
        let (a, b) = (sys.generator(m - 1).support(), sys.generator(m).support());
        if a.end() == b.start() || b.end() == a.start() {
            log::warn!("the last two supports touch; the ratio limits then rely on Carleman's condition for the last generator");
        }
    }
}

fn solve_one(
    exp: &Experiment,
    base: &Instance,
    n: &MultiIndex,
    incompleteness: usize,
    eps: &Scalar,
    want_type2: bool,
    source: &MomentSource<'_>,
) -> Result<RowReport, CliError> {
    let outcome = exp
        .solve_row_with(base, n, incompleteness, source)
        .map_err(numeric)?;
    let inst = outcome.instance(base);
    let v = &outcome.vector;
    let moments = inst.moments_for(n.tail_len());

    let reduced = if inst.pert.is_zero() {
        None
    } else {
        Some(perturbed_reduce(&inst.pert, v, &moments).map_err(numeric)?)
    };
    let (polys, dropped) = match &reduced {
        Some(r) => (&r.polys[..], inst.pert.degree() + incompleteness),
        None => (&v.a[..], incompleteness),
    };
    let order = n.total().saturating_sub(dropped);
    let orthogonality = check_orthogonality(&inst.sys, polys, order)
        .map_err(numeric)?
        .relative();
    let expected = order.saturating_sub(1);
    let sign_changes = match first_level_sign_changes(&inst.sys, polys, expected) {
        Ok(c) => c,
        Err(Error::VanishesOnGrid) => 0,
        Err(e) => return Err(numeric(e)),
    };

    let eps = eps.with_precision(inst.precision());
    let zeros = (1..=inst.sys.m())
        .map(
            |j| match pole_attraction(&inst.sys, &inst.pert, v, j, &eps) {
                Ok(pa) => Ok(ZeroReport::Found(pa)),
                Err(Error::DegenerateComponent(_)) => Ok(ZeroReport::Degenerate),
                Err(e) => Err(numeric(e)),
            },
        )
        .collect::<Result<Vec<_>, _>>()?;

    let type2 = if want_type2 {
        let tails = moments.perturbed(&inst.pert);
        let t2 = solve_type2_with(&tails, n).map_err(numeric)?;
        let prec = inst.precision();
        let mut worst = Scalar::zero(prec);
        for (j, &nj) in n.components().iter().enumerate() {
            if nj == 0 {
                continue;
            }
            let coeffs = type2_remainder_tail(&tails, &t2, j + 1, nj).map_err(numeric)?;
            let tail_max = tails.tails()[j]
                .coeffs()
                .iter()
                .map(Scalar::abs)
                .fold(Scalar::zero(prec), Scalar::max);
            let scale = t2.q.l1_norm(prec) * tail_max;
            for c in coeffs {
                let r = if scale.is_zero() {
                    c.abs()
                } else {
                    c.abs() / &scale
                };
                worst = worst.max(r);
            }
        }
        Some(worst)
    } else {
        None
    };

    Ok(RowReport {
        outcome,
        orthogonality,
        reduction: reduced.map(|r| r.residual),
        sign_changes,
        sign_changes_expected: expected,
        zeros,
        type2,
    })
}

fn residual_gate(samples: impl Iterator<Item = Scalar>, tolerance: Scalar) -> (Gate, bool) {
    let mut max: Option<Scalar> = None;
    let mut count = 0;
    for s in samples {
        count += 1;
        let s = s.with_precision(tolerance.precision());
        max = Some(match max {
            None => s,
            Some(m) => m.max(s),
        });
    }
    match max {
        None => (Gate::NotApplicable("nothing to check"), true),
        Some(max) => {
            let ok = max <= tolerance;
            (
                Gate::Residual {
                    max,
                    tolerance,
                    samples: count,
                },
                ok,
            )
        }
    }
}

/// Runs the sweep and evaluates every requested check. Files are written by
/// the caller.
pub fn execute(cfg: &Config, settings: &Settings) -> Result<Outcome, CliError> {
    let exp = cfg.experiment()?;
    let sweep = cfg.sweep()?;
    std::fs::create_dir_all(&settings.output_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", settings.output_dir.display())))?;
    let cache = if settings.use_cache {
        MomentCache::open(&settings.output_dir.join("moments.cache.json"))
    } else {
        MomentCache::disabled()
    };
    let source = |sys: &NikishinSystem, len: usize| cache.moments(sys, len);
    let prec = settings.precision;
    let len = sweep.iter().map(MultiIndex::tail_len).max().unwrap_or(1);
    let base = exp.instance_with(prec, len, &source).map_err(validation)?;
    let eps = Scalar::from_f64(cfg.pole_epsilon, prec);
    check_epsilon(&base, &eps)?;
    warn_hypotheses(cfg, &sweep, &base.sys);

    let want_type2 = settings.checks.contains(&Check::Type2);
    let rows = sweep
        .par_iter()
        .map(|n| {
            solve_one(
                &exp,
                &base,
                n,
                cfg.incompleteness,
                &eps,
                want_type2,
                &source,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    cache.save()?;

    let tolerance = |c: Check| {
        cfg.tolerances
            .get(&c)
            .map_or_else(|| prec.half_eps(), |t| t.0.at(prec))
    };
    let m = base.sys.m();
    let mut gates = Vec::new();
    for &check in &settings.checks {
        let (gate, ok) = match check {
            Check::Chile => {
                let mut samples = Vec::new();
                for z in &base.grid.points {
                    for j in 0..m {
                        samples.push(check_chile(&base.sys, j, z).map_err(numeric)?.relative());
                    }
                }
                residual_gate(samples.into_iter(), tolerance(check))
            }
            Check::Ratio44 if m < 2 => (Gate::NotApplicable("needs at least two generators"), true),
            Check::Ratio44 => {
                let mut samples = Vec::new();
                for z in &base.grid.points {
                    for k in 2..=m {
                        samples.push(
                            check_ratio_formula(&base.sys, k, z)
                                .map_err(numeric)?
                                .relative(),
                        );
                    }
                }
                residual_gate(samples.into_iter(), tolerance(check))
            }
            Check::Orthogonality => residual_gate(
                rows.iter().map(|r| r.orthogonality.clone()),
                tolerance(check),
            ),
            Check::Reduction if base.pert.is_zero() => {
                (Gate::NotApplicable("no perturbation"), true)
            }
            Check::Reduction => residual_gate(
                rows.iter().filter_map(|r| r.reduction.clone()),
                tolerance(check),
            ),
            Check::Type2 => residual_gate(
                rows.iter().filter_map(|r| r.type2.clone()),
                tolerance(check),
            ),
            Check::SignChanges if rows.is_empty() => (Gate::NotApplicable("empty sweep"), true),
            Check::SignChanges => {
                let min_margin = rows
                    .iter()
                    .map(|r| r.sign_changes as i64 - r.sign_changes_expected as i64)
                    .min()
                    .unwrap_or(0);
                (
                    Gate::SignChanges {
                        min_margin,
                        rows: rows.len(),
                    },
                    min_margin >= 0,
                )
            }
            Check::PoleAttraction => match largest(&rows) {
                None => (Gate::NotApplicable("empty sweep"), true),
                Some(i) => (Gate::Attraction { row: i }, rows[i].attraction_exact()),
            },
        };
        gates.push((check, gate, ok));
    }
    Ok(Outcome {
        base,
        rows,
        gates,
        cache_hits: cache.hits(),
        cache_misses: cache.misses(),
    })
}

/// Index of the row with the largest `|n|` (the last one on ties).
fn largest(rows: &[RowReport]) -> Option<usize> {
    rows.iter()
        .enumerate()
        .max_by_key(|(i, r)| (r.n().total(), *i))
        .map(|(i, _)| i)
}
