use std::path::{Path, PathBuf};

use fundmat::ctmc::{
    continuous_poisson_residual, ctmc_potentials, ctmc_potentials_classic, ctmc_stationary,
    verify_generator_spectrum,
};
use fundmat::estimator::{online_potentials, write_trace_csv, EstimateTrace, SimulationConfig};
use fundmat::gfm::{
    poisson_residual, potentials, potentials_classic, potentials_reference_level, series_fundamental,
    series_fundamental_until, stationary, verify_spectral_shift, PotentialSolution,
};
use fundmat::linalg::max_abs_vec;
use fundmat::model::file::{load_model, Model};
use fundmat::qfactors::{policy_chain, q_consistency_report, qfactors_solve};
use fundmat::{
    diagnose_chain, min_uniformization_rate, uniformize, Error, GeneratorMatrix, MdpModel, ReferenceVector,
    Report, RewardVector, StochasticMatrix, Tolerances,
};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, EstimateArgs, Format, Method, ReferenceSpec};
use crate::output::{csv_num, csv_table, nums, report_csv, report_json, rows, to_json, Num};

/// Why a command did not produce a result.
#[derive(Debug)]
pub enum Failure {
    Library(Error),
    /// The command ran and at least one verification check failed.
    CheckFailed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

type Outcome = Result<String, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Library(Error::InvalidParameter(msg.into()))
}

pub fn run(cli: &Cli) -> Outcome {
    let tol = cli.common.tolerances.resolve();
    let path = cli
        .common
        .model
        .as_ref()
        .ok_or_else(|| usage("--model is required"))?;
    let model = load_model(path, tol.row_tol)?;
    let ctx = Context {
        model: &model,
        reference: &cli.common.reference,
        format: cli.common.format,
        tol,
    };
    match &cli.command {
        Command::Validate => ctx.validate(),
        Command::Stationary => ctx.stationary(),
        Command::Potentials { method, horizon } => ctx.potentials(*method, *horizon),
        Command::Qfactors => ctx.qfactors(),
        Command::CtmcStationary => ctx.ctmc_stationary(),
        Command::CtmcPotentials { method } => ctx.ctmc_potentials(*method),
        Command::Estimate(args) => ctx.estimate(args),
        Command::Series {
            terms,
            target,
            max_terms,
        } => ctx.series(*terms, *target, *max_terms),
        Command::Check {
            poisson,
            solution,
            gamma,
        } => ctx.check(*poisson, solution.as_deref(), *gamma),
    }
}

struct Context<'a> {
    model: &'a Model,
    reference: &'a ReferenceSpec,
    format: Format,
    tol: Tolerances,
}

#[derive(Serialize)]
struct StationaryDoc {
    pi: Vec<Num>,
}

/// Field order is part of the output contract.
#[derive(Serialize, Deserialize)]
pub struct PotentialsDoc<G, E> {
    pub g: Vec<G>,
    pub eta: E,
    pub normalization: String,
}

#[derive(Serialize)]
struct QDoc {
    q: Vec<Num>,
    eta: Num,
    normalization: &'static str,
    induced_g: Vec<Num>,
    zero_probability_actions: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct SeriesDoc {
    z: Vec<Vec<Num>>,
    terms: usize,
    residual_norm: Num,
    tail_bound: Num,
}

#[derive(Serialize)]
struct RunDoc {
    seed: u64,
    g_hat: Vec<Num>,
    eta_hat: Num,
    steps_run: u64,
    converged: bool,
}

#[derive(Serialize)]
struct EstimateDoc {
    runs: Vec<RunDoc>,
}

#[derive(Serialize)]
struct ValidateDoc {
    valid: bool,
    kind: &'static str,
    states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    actions: Option<usize>,
    irreducible: bool,
    aperiodic: bool,
    period: usize,
    closed_classes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_correction: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_uniformization_rate: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_probability_actions: Option<Vec<[usize; 2]>>,
}

fn vector_csv(name: &str, v: &DVector<f64>) -> String {
    csv_table(
        &["state", name],
        v.iter()
            .enumerate()
            .map(|(i, x)| vec![i.to_string(), csv_num(*x)]),
    )
}

fn potentials_output(sol: &PotentialSolution, format: Format) -> String {
    match format {
        Format::Json => to_json(&PotentialsDoc {
            g: nums(&sol.g),
            eta: Num(sol.eta),
            normalization: sol.normalization.label().to_string(),
        }),
        Format::Csv => csv_table(
            &["state", "g", "eta", "normalization"],
            sol.g.iter().enumerate().map(|(i, x)| {
                vec![
                    i.to_string(),
                    csv_num(*x),
                    csv_num(sol.eta),
                    sol.normalization.label().to_string(),
                ]
            }),
        ),
    }
}

fn report_output(report: &Report, format: Format) -> Outcome {
    let text = match format {
        Format::Json => report_json(report),
        Format::Csv => report_csv(report),
    };
    if report.passed() {
        Ok(text)
    } else {
        Err(Failure::CheckFailed(text))
    }
}

fn pairs_list(pairs: &[(usize, usize)]) -> Vec<[usize; 2]> {
    pairs.iter().map(|&(s, a)| [s, a]).collect()
}

impl Context<'_> {
    fn dtmc(&self) -> Result<(&StochasticMatrix, Option<&RewardVector>), Failure> {
        match self.model {
            Model::Dtmc { p, f } => Ok((p, f.as_ref())),
            Model::Ctmc { .. } => Err(usage(
                "this command needs a `dtmc` model; use the ctmc-* commands",
            )),
            Model::Mdp(_) => Err(usage("this command needs a `dtmc` model; use qfactors for `mdp`")),
        }
    }

    fn ctmc(&self) -> Result<(&GeneratorMatrix, Option<&RewardVector>), Failure> {
        match self.model {
            Model::Ctmc { b, f } => Ok((b, f.as_ref())),
            _ => Err(usage("this command needs a `ctmc` model")),
        }
    }

    fn mdp(&self) -> Result<&MdpModel, Failure> {
        match self.model {
            Model::Mdp(m) => Ok(m),
            _ => Err(usage("this command needs an `mdp` model")),
        }
    }

    fn rewards<'f>(&self, f: Option<&'f RewardVector>) -> Result<&'f RewardVector, Failure> {
        f.ok_or_else(|| {
            Failure::Library(Error::ModelFormat(
                "this command needs rewards `f` in the model".into(),
            ))
        })
    }

    /// Resolve the reference vector; `stationary` is computed by `pi`.
    fn reference(
        &self,
        n: usize,
        pi: impl FnOnce() -> Result<DVector<f64>, Error>,
    ) -> Result<ReferenceVector, Failure> {
        let r = match self.reference {
            ReferenceSpec::Uniform => ReferenceVector::uniform(n),
            ReferenceSpec::E1 => ReferenceVector::unit(n, 0)?,
            ReferenceSpec::Stationary => {
                ReferenceVector::with_tol(pi()?.iter().copied().collect(), self.tol.re_tol)?
            }
            ReferenceSpec::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "reference vector",
                        expected: n,
                        found: v.len(),
                    }
                    .into());
                }
                ReferenceVector::with_tol(v.clone(), self.tol.re_tol)?
            }
        };
        Ok(r)
    }

    fn chain_reference(&self, p: &StochasticMatrix) -> Result<ReferenceVector, Failure> {
        self.reference(p.size(), || {
            stationary(p, &ReferenceVector::uniform(p.size()), &self.tol).map(|s| s.pi)
        })
    }

    fn process_reference(&self, b: &GeneratorMatrix) -> Result<ReferenceVector, Failure> {
        self.reference(b.size(), || {
            ctmc_stationary(b, &ReferenceVector::uniform(b.size()), &self.tol).map(|s| s.pi)
        })
    }

    /// The stationary distribution over pairs is `π_𝓛(s) 𝓛(s, a)`, with
    /// `π_𝓛` that of the policy-induced chain.
    fn pair_reference(&self, m: &MdpModel) -> Result<ReferenceVector, Failure> {
        self.reference(m.pairs(), || {
            let (pl, _) = policy_chain(m);
            let pi = stationary(&pl, &ReferenceVector::uniform(m.states()), &self.tol)?.pi;
            Ok(DVector::from_fn(m.pairs(), |k, _| {
                let (s, a) = (k / m.actions(), k % m.actions());
                pi[s] * m.policy()[(s, a)]
            }))
        })
    }

    fn validate(&self) -> Outcome {
        let doc = match self.model {
            Model::Dtmc { p, .. } => {
                let d = diagnose_chain(p, self.tol.edge_tol);
                ValidateDoc {
                    valid: true,
                    kind: "dtmc",
                    states: p.size(),
                    actions: None,
                    irreducible: d.irreducible,
                    aperiodic: d.aperiodic,
                    period: d.period,
                    closed_classes: d.num_closed_classes,
                    max_correction: Some(Num(p.max_correction())),
                    min_uniformization_rate: None,
                    zero_probability_actions: None,
                }
            }
            Model::Ctmc { b, .. } => {
                let rate = min_uniformization_rate(b);
                let d = diagnose_chain(&uniformize(b, rate + 1.0, self.tol.row_tol)?, self.tol.edge_tol);
                ValidateDoc {
                    valid: true,
                    kind: "ctmc",
                    states: b.size(),
                    actions: None,
                    irreducible: d.irreducible,
                    aperiodic: d.aperiodic,
                    period: d.period,
                    closed_classes: d.num_closed_classes,
                    max_correction: None,
                    min_uniformization_rate: Some(Num(rate)),
                    zero_probability_actions: None,
                }
            }
            Model::Mdp(m) => {
                let (pl, _) = policy_chain(m);
                let d = diagnose_chain(&pl, self.tol.edge_tol);
                ValidateDoc {
                    valid: true,
                    kind: "mdp",
                    states: m.states(),
                    actions: Some(m.actions()),
                    irreducible: d.irreducible,
                    aperiodic: d.aperiodic,
                    period: d.period,
                    closed_classes: d.num_closed_classes,
                    max_correction: None,
                    min_uniformization_rate: None,
                    zero_probability_actions: Some(pairs_list(&m.zero_probability_actions())),
                }
            }
        };
        Ok(match self.format {
            Format::Json => to_json(&doc),
            Format::Csv => {
                let mut fields = vec![
                    ("valid", doc.valid.to_string()),
                    ("kind", doc.kind.to_string()),
                    ("states", doc.states.to_string()),
                    ("irreducible", doc.irreducible.to_string()),
                    ("aperiodic", doc.aperiodic.to_string()),
                    ("period", doc.period.to_string()),
                    ("closed_classes", doc.closed_classes.to_string()),
                ];
                if let Some(a) = doc.actions {
                    fields.push(("actions", a.to_string()));
                }
                if let Some(Num(c)) = doc.max_correction {
                    fields.push(("max_correction", csv_num(c)));
                }
                if let Some(Num(r)) = doc.min_uniformization_rate {
                    fields.push(("min_uniformization_rate", csv_num(r)));
                }
                csv_table(
                    &["field", "value"],
                    fields.into_iter().map(|(k, v)| vec![k.to_string(), v]),
                )
            }
        })
    }

    fn stationary(&self) -> Outcome {
        let (p, _) = self.dtmc()?;
        let r = self.chain_reference(p)?;
        let pi = stationary(p, &r, &self.tol)?.pi;
        Ok(match self.format {
            Format::Json => to_json(&StationaryDoc { pi: nums(&pi) }),
            Format::Csv => vector_csv("pi", &pi),
        })
    }

    fn potentials(&self, method: Method, horizon: usize) -> Outcome {
        let (p, f) = self.dtmc()?;
        let f = self.rewards(f)?;
        let sol = match method {
            Method::Direct => potentials(p, f, &self.chain_reference(p)?, &self.tol)?,
            Method::Classic => potentials_classic(p, f, &self.tol)?,
            Method::ReferenceLevel => {
                potentials_reference_level(p, f, &self.chain_reference(p)?, horizon, &self.tol)?
            }
        };
        Ok(potentials_output(&sol, self.format))
    }

    fn qfactors(&self) -> Outcome {
        let m = self.mdp()?;
        let r = self.pair_reference(m)?;
        let sol = qfactors_solve(m, &r, &self.tol)?;
        Ok(match self.format {
            Format::Json => to_json(&QDoc {
                q: nums(&sol.q),
                eta: Num(sol.eta),
                normalization: sol.normalization.label(),
                induced_g: nums(&sol.induced_g),
                zero_probability_actions: pairs_list(&sol.zero_probability_actions),
            }),
            Format::Csv => csv_table(
                &["state", "action", "q", "eta"],
                sol.q.iter().enumerate().map(|(k, x)| {
                    vec![
                        (k / m.actions()).to_string(),
                        (k % m.actions()).to_string(),
                        csv_num(*x),
                        csv_num(sol.eta),
                    ]
                }),
            ),
        })
    }

    fn ctmc_stationary(&self) -> Outcome {
        let (b, _) = self.ctmc()?;
        let r = self.process_reference(b)?;
        let pi = ctmc_stationary(b, &r, &self.tol)?.pi;
        Ok(match self.format {
            Format::Json => to_json(&StationaryDoc { pi: nums(&pi) }),
            Format::Csv => vector_csv("pi", &pi),
        })
    }

    fn ctmc_potentials(&self, method: Method) -> Outcome {
        let (b, f) = self.ctmc()?;
        let f = self.rewards(f)?;
        let sol = match method {
            Method::Direct => ctmc_potentials(b, f, &self.process_reference(b)?, &self.tol)?,
            Method::Classic => ctmc_potentials_classic(b, f, &self.tol)?,
            Method::ReferenceLevel => {
                return Err(usage(
                    "reference-level potentials are defined for discrete-time chains only",
                ))
            }
        };
        Ok(potentials_output(&sol, self.format))
    }

    fn estimate(&self, args: &EstimateArgs) -> Outcome {
        let (p, f) = self.dtmc()?;
        let f = self.rewards(f)?;
        let r = self.chain_reference(p)?;
        let seeds = args
            .seeds
            .as_ref()
            .map(|s| s.0.clone())
            .unwrap_or_else(|| vec![args.seed]);
        let schedule = &args.schedule.0;
        let runs: Vec<(u64, EstimateTrace)> = seeds
            .par_iter()
            .map(|&seed| {
                let cfg = SimulationConfig {
                    seed,
                    max_steps: args.steps,
                    epsilon: args.epsilon,
                    check_interval: args.check_interval,
                    start_state: args.start_state,
                    initial: None,
                    record_history: args.trace.is_some(),
                };
                online_potentials(p, f, &r, schedule, &cfg, &self.tol).map(|t| (seed, t))
            })
            .collect::<Result<_, _>>()?;

        if let Some(path) = &args.trace {
            for (seed, trace) in &runs {
                let target = if runs.len() == 1 {
                    path.clone()
                } else {
                    seeded_path(path, *seed)
                };
                let file = std::fs::File::create(&target)
                    .map_err(|e| usage(format!("cannot write {}: {e}", target.display())))?;
                write_trace_csv(trace, file)?;
            }
        }

        Ok(match self.format {
            Format::Json => to_json(&EstimateDoc {
                runs: runs
                    .iter()
                    .map(|(seed, t)| RunDoc {
                        seed: *seed,
                        g_hat: nums(&t.g_hat),
                        eta_hat: Num(t.eta_hat),
                        steps_run: t.steps_run,
                        converged: t.converged,
                    })
                    .collect(),
            }),
            Format::Csv => csv_table(
                &["seed", "state", "g_hat", "eta_hat", "steps_run", "converged"],
                runs.iter().flat_map(|(seed, t)| {
                    t.g_hat.iter().enumerate().map(move |(s, g)| {
                        vec![
                            seed.to_string(),
                            s.to_string(),
                            csv_num(*g),
                            csv_num(t.eta_hat),
                            t.steps_run.to_string(),
                            t.converged.to_string(),
                        ]
                    })
                }),
            ),
        })
    }

    fn series(&self, terms: Option<usize>, target: f64, max_terms: usize) -> Outcome {
        let (p, _) = self.dtmc()?;
        let r = self.chain_reference(p)?;
        let s = match terms {
            Some(t) => series_fundamental(p, &r, t, &self.tol)?,
            None => series_fundamental_until(p, &r, target, max_terms, &self.tol)?,
        };
        Ok(match self.format {
            Format::Json => to_json(&SeriesDoc {
                z: rows(&s.z),
                terms: s.terms,
                residual_norm: Num(s.residual_norm),
                tail_bound: Num(s.tail_bound),
            }),
            Format::Csv => csv_table(
                &["row", "col", "z"],
                (0..s.z.nrows()).flat_map(|i| {
                    let z = &s.z;
                    (0..z.ncols()).map(move |j| vec![i.to_string(), j.to_string(), csv_num(z[(i, j)])])
                }),
            ),
        })
    }

    fn check(&self, poisson: bool, solution: Option<&Path>, gamma: Option<f64>) -> Outcome {
        if poisson {
            let path = solution.ok_or_else(|| usage("--poisson needs --solution"))?;
            return report_output(&self.poisson_report(path)?, self.format);
        }
        let mut report = Report::new();
        match self.model {
            Model::Dtmc { p, f } => {
                let r = self.chain_reference(p)?;
                report.extend(verify_spectral_shift(p, &r, &self.tol));
                let n = p.size();
                let pi = stationary(p, &r, &self.tol)?.pi;
                let solve_tol = self.tol.solve_tol(n);
                report.within(
                    "stationary_balance",
                    max_abs_vec(&(p.matrix().transpose() * &pi - &pi)),
                    solve_tol,
                );
                report.within("stationary_sum", (pi.sum() - 1.0).abs(), solve_tol);
                if let Some(f) = f {
                    let sol = potentials(p, f, &r, &self.tol)?;
                    report.within(
                        "poisson_residual",
                        poisson_residual(p.matrix(), f.values(), &sol.g, sol.eta),
                        self.tol.poisson_tol,
                    );
                    report.within("normalization", (r.dot(&sol.g) - sol.eta).abs(), solve_tol);
                    report.within(
                        "eta_matches_stationary",
                        (pi.dot(f.values()) - sol.eta).abs(),
                        self.tol.poisson_tol,
                    );
                }
            }
            Model::Ctmc { b, f } => {
                let r = self.process_reference(b)?;
                let rate = min_uniformization_rate(b);
                let gamma = gamma.unwrap_or(if rate > 0.0 { rate } else { 1.0 });
                report.extend(verify_generator_spectrum(b, gamma, &r, &self.tol));
                let pi = ctmc_stationary(b, &r, &self.tol)?.pi;
                let solve_tol = self.tol.solve_tol(b.size());
                report.within(
                    "stationary_balance",
                    max_abs_vec(&(b.matrix().transpose() * &pi)),
                    solve_tol,
                );
                report.within("stationary_sum", (pi.sum() - 1.0).abs(), solve_tol);
                if let Some(f) = f {
                    let sol = ctmc_potentials(b, f, &r, &self.tol)?;
                    report.within(
                        "poisson_residual",
                        continuous_poisson_residual(b.matrix(), f.values(), &sol.g, sol.eta),
                        self.tol.poisson_tol,
                    );
                    report.within("normalization", (r.dot(&sol.g) + sol.eta).abs(), solve_tol);
                }
            }
            Model::Mdp(m) => {
                let r = self.pair_reference(m)?;
                let sol = qfactors_solve(m, &r, &self.tol)?;
                report.extend(q_consistency_report(m, &sol, &self.tol));
            }
        }
        report_output(&report, self.format)
    }

    fn poisson_report(&self, path: &Path) -> Result<Report, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let doc: PotentialsDoc<f64, f64> =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let g = DVector::from_vec(doc.g);
        let mut report = Report::new();
        let residual = match self.model {
            Model::Dtmc { p, f } => {
                let f = self.rewards(f.as_ref())?;
                check_len(p.size(), g.len())?;
                poisson_residual(p.matrix(), f.values(), &g, doc.eta)
            }
            Model::Ctmc { b, f } => {
                let f = self.rewards(f.as_ref())?;
                check_len(b.size(), g.len())?;
                continuous_poisson_residual(b.matrix(), f.values(), &g, doc.eta)
            }
            Model::Mdp(_) => return Err(usage("--poisson applies to dtmc and ctmc models")),
        };
        report.within("poisson_residual", residual, self.tol.poisson_tol);
        Ok(report)
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), Failure> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            what: "potentials in solution",
            expected,
            found,
        }
        .into());
    }
    Ok(())
}

fn seeded_path(path: &Path, seed: u64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}.seed{seed}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_trace_names() {
        assert_eq!(
            seeded_path(Path::new("out/trace.csv"), 3),
            PathBuf::from("out/trace.seed3.csv")
        );
        assert_eq!(seeded_path(Path::new("trace"), 10), PathBuf::from("trace.seed10"));
    }
}
