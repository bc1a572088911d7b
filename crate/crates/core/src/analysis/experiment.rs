use crate::algebra::{Polynomial, RationalFn};
use crate::error::{Error, Result};
use crate::hermite_pade::{
    solve_type1_with, with_escalation, ForwardMoments, MultiIndex, RationalPerturbation,
    TypeIVector,
};
use crate::measures::Literal;
use crate::nikishin::{build_system, NikishinSystem, SystemSpec};
use crate::scalar::{Complex, Precision, Scalar};

use super::{convergence_row, ConvergenceRow, EvalGrid};

/// Supplies unperturbed expansions of a realized system to a given length.
pub type MomentSource<'a> = dyn Fn(&NikishinSystem, usize) -> ForwardMoments + Sync + 'a;

/// `num / den` with ascending coefficient lists.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSpec {
    pub num: Vec<Literal>,
    pub den: Vec<Literal>,
}

impl PerturbationSpec {
    pub fn zero() -> Self {
        PerturbationSpec {
            num: Vec::new(),
            den: vec![Literal::from_i64(1)],
        }
    }

    pub fn realize(&self, prec: Precision) -> Result<RationalFn> {
        let poly = |c: &[Literal]| Polynomial::new(c.iter().map(|x| x.at(prec)).collect());
        let num = poly(&self.num);
        if num.is_zero() {
            return Ok(RationalFn::zero(prec));
        }
        RationalFn::new(num, poly(&self.den))
    }
}

/// How evaluation points are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Standard {
        radius_factor: f64,
        circle_points: usize,
        segment_points: usize,
    },
    Explicit(Vec<(Literal, Literal)>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Standard {
            radius_factor: 4.0,
            circle_points: 64,
            segment_points: 16,
        }
    }
}

/// Everything needed to rebuild a problem at any precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub system: SystemSpec,
    /// One entry per generator, or empty for the unperturbed problem.
    pub perturbations: Vec<PerturbationSpec>,
    pub grid: GridSpec,
    /// Radius around each pole that grid points avoid.
    pub pole_margin: f64,
}

/// An [`Experiment`] realized at one precision.
#[derive(Clone, Debug)]
pub struct Instance {
    pub sys: NikishinSystem,
    pub pert: RationalPerturbation,
    pub grid: EvalGrid,
    /// Unperturbed forward expansions.
    pub moments: ForwardMoments,
}

impl Instance {
    pub fn precision(&self) -> Precision {
        self.sys.precision()
    }

    /// Unperturbed expansions of at least `len` terms.
    pub fn moments_for(&self, len: usize) -> ForwardMoments {
        if self.moments.len() >= len {
            self.moments.clone()
        } else {
            ForwardMoments::compute(&self.sys, len)
        }
    }
}

/// A solved row together with the instance it was solved on when precision
/// had to be raised.
#[derive(Clone, Debug)]
pub struct RowOutcome {
    pub vector: TypeIVector,
    pub row: ConvergenceRow,
    pub escalated: Option<Instance>,
}

impl RowOutcome {
    pub fn instance<'a>(&'a self, base: &'a Instance) -> &'a Instance {
        self.escalated.as_ref().unwrap_or(base)
    }
}

impl Experiment {
    pub fn m(&self) -> usize {
        self.system.generators.len()
    }

    /// Realizes the system, perturbation and grid at `prec`, with moments of
    /// length `tail_len`.
    pub fn instance(&self, prec: Precision, tail_len: usize) -> Result<Instance> {
        self.instance_with(prec, tail_len, &ForwardMoments::compute)
    }

    /// [`Experiment::instance`] with the unperturbed expansions supplied by
    /// `moments` (for example from a cache).
    pub fn instance_with(
        &self,
        prec: Precision,
        tail_len: usize,
        moments: &MomentSource<'_>,
    ) -> Result<Instance> {
        let sys = build_system(&self.system, prec)?;
        let pert = if self.perturbations.is_empty() {
            RationalPerturbation::none(sys.m(), prec)
        } else {
            let r = self
                .perturbations
                .iter()
                .map(|p| p.realize(prec))
                .collect::<Result<Vec<_>>>()?;
            RationalPerturbation::new(r, &sys)?
        };
        let margin = Scalar::from_f64(self.pole_margin, prec);
        let grid = match &self.grid {
            GridSpec::Standard {
                radius_factor,
                circle_points,
                segment_points,
            } => EvalGrid::standard(
                &sys,
                &pert,
                *radius_factor,
                *circle_points,
                *segment_points,
                &margin,
            )?,
            GridSpec::Explicit(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidInput("explicit grid is empty".into()));
                }
                let pts = points
                    .iter()
                    .map(|(re, im)| Complex::new(re.at(prec), im.at(prec)))
                    .collect();
                EvalGrid::new(pts, "explicit points", &sys, &pert, &margin)?
            }
        };
        let moments = moments(&sys, tail_len);
        Ok(Instance {
            sys,
            pert,
            grid,
            moments,
        })
    }

    /// Solves the (perturbed, possibly incomplete) type I problem for `n`,
    /// doubling the precision until the order conditions hold and the
    /// nullspace is resolved.
    pub fn solve_row(
        &self,
        base: &Instance,
        n: &MultiIndex,
        incompleteness: usize,
    ) -> Result<RowOutcome> {
        self.solve_row_with(base, n, incompleteness, &ForwardMoments::compute)
    }

    /// [`Experiment::solve_row`] with escalated instances drawing their
    /// expansions from `moments`.
    pub fn solve_row_with(
        &self,
        base: &Instance,
        n: &MultiIndex,
        incompleteness: usize,
        moments: &MomentSource<'_>,
    ) -> Result<RowOutcome> {
        if n.m() != self.m() {
            return Err(Error::InvalidInput(format!(
                "multi-index {n} does not match a system of {} generators",
                self.m()
            )));
        }
        let len = n.tail_len();
        let attempt = |prec: Precision| -> Result<(Option<Instance>, TypeIVector)> {
            let fresh = if prec == base.precision() {
                None
            } else {
                Some(self.instance_with(prec, len, moments)?)
            };
            let inst = fresh.as_ref().unwrap_or(base);
            let tails = inst.moments_for(len).perturbed(&inst.pert);
            let v = solve_type1_with(&tails, n, incompleteness)?;
            Ok((fresh, v))
        };
        let ((escalated, vector), _) = with_escalation(
            base.precision(),
            attempt,
            |(_, v)| v.order_ok() && v.diagnostics.well_conditioned(v.precision()),
            |(_, v)| (v.residual_order, v.required_order()),
        )?;
        let inst = escalated.as_ref().unwrap_or(base);
        let row = convergence_row(&inst.sys, &inst.pert, &vector, &inst.grid)?;
        Ok(RowOutcome {
            vector,
            row,
            escalated,
        })
    }
}
