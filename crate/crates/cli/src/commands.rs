use gausspulse::export::{self, Document, Meta, ReportRow};
use gausspulse::filter::{self, FilterKind};
use gausspulse::oracles::{self, Suite, SuiteConfig};
use gausspulse::sampling::{self, GaussianComponent, GaussianMixture, InputSignal};
use gausspulse::{pulse, Domain, Grid, PulseParams, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{
    FilterArgs, FilterChoice, Format, GridArgs, PulseArgs, PulseKind, ReconstructArgs, RunArgs, SignalChoice,
    SuiteChoice, VerifyArgs,
};
use crate::{Context, Failure};

/// Rendered output plus an optional failure to report after writing it.
pub struct Outcome {
    pub text: String,
    pub failure: Option<Failure>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, failure: None }
    }
}

fn render<T: Serialize>(run: &RunArgs, meta: Meta, rows: Vec<T>) -> Result<String> {
    match run.format {
        Format::Json => Document::new(meta, rows).to_json(),
        Format::Csv => export::to_csv(&rows),
    }
}

fn grid(p: &PulseParams, g: &GridArgs) -> std::result::Result<Grid, Failure> {
    if g.count == 0 {
        return Err(Failure::Usage("grid needs --count of at least 1".into()));
    }
    let start = g.start.unwrap_or(-8.0 * p.lambda());
    let step = g.step.unwrap_or(p.lambda() / 32.0);
    Grid::new(start, step, g.count).map_err(|e| Failure::Usage(e.to_string()))
}

fn grid_meta(meta: Meta, g: &Grid) -> Result<Meta> {
    meta.with(
        "grid",
        serde_json::json!({"start": g.start(), "step": g.step(), "count": g.count()}),
    )
}

fn pulse_name(kind: PulseKind) -> &'static str {
    match kind {
        PulseKind::Phi => "phi",
        PulseKind::CapitalPhi => "capital_phi",
        PulseKind::PhiInt => "phi_int",
        PulseKind::S0 => "s0",
        PulseKind::PhiOrtho => "phi_ortho",
        PulseKind::VarphiInt => "varphi_int",
    }
}

pub fn pulse(ctx: &Context, run: &RunArgs, args: &PulseArgs) -> std::result::Result<Outcome, Failure> {
    let p = &ctx.params;
    let g = grid(p, &args.grid)?;
    let policy = ctx.policy;
    let signal = g.sample(Domain::Time, |x| match args.which {
        PulseKind::Phi => Ok(pulse::gaussian_phi(x, p)),
        PulseKind::CapitalPhi => Ok(pulse::capital_phi(x, p)),
        PulseKind::PhiInt => pulse::phi_int_time(x, p),
        PulseKind::S0 => Ok(pulse::s0_time(x, p)),
        PulseKind::PhiOrtho => pulse::phi_ortho_time(x, p, &policy),
        PulseKind::VarphiInt => pulse::varphi_int_time(x, p),
    })?;
    let meta = grid_meta(Meta::new(p).with("pulse", pulse_name(args.which))?, &g)?.with(
        "truncation",
        serde_json::json!({"rel_tol": policy.rel_tol, "max_terms": policy.max_terms}),
    )?;
    Ok(Outcome::ok(render(run, meta, export::samples(&signal))?))
}

pub fn filter(ctx: &Context, run: &RunArgs, args: &FilterArgs) -> std::result::Result<Outcome, Failure> {
    let p = &ctx.params;
    let kind = match args.which {
        FilterChoice::H1 => FilterKind::H1,
        FilterChoice::H2 => FilterKind::H2,
        FilterChoice::H3 | FilterChoice::Coefficients => FilterKind::H3,
        FilterChoice::H4 => FilterKind::H4,
    };
    let order = match args.order {
        Some(n) => n,
        None => filter::select_order(p, kind, 1e-15, &ctx.policy)?,
    };
    let meta = Meta::new(p)
        .with("order", order)?
        .with("neglected_bound", filter::neglected_bound(p, kind, order))?;
    let text = if args.which == FilterChoice::Coefficients {
        let a = filter::coefficients_a(p, order);
        let meta = meta
            .with("filter", "coefficients")?
            .with("closed_form", "a_n = (-q)^n / (q^2; q^2)_n")?;
        render(run, meta, export::coefficients(a.values()))?
    } else {
        let (name, f) = match args.which {
            FilterChoice::H1 => ("H1", filter::build_h1(p, order)),
            FilterChoice::H2 => ("H2", filter::build_h2(p, order)),
            FilterChoice::H3 => ("H3", filter::build_h3(p, order)),
            _ => ("H4", filter::build_h4(p, order)?),
        };
        let meta = meta.with("filter", name)?;
        match run.format {
            Format::Json => Document::new(meta, vec![f]).to_json()?,
            Format::Csv => export::to_csv(&export::filter_rows(&f))?,
        }
    };
    Ok(Outcome::ok(text))
}

pub fn verify(ctx: &Context, run: &RunArgs, args: &VerifyArgs) -> std::result::Result<Outcome, Failure> {
    let p = &ctx.params;
    let (suite, name) = match args.suite {
        SuiteChoice::Identities => (Suite::Identities, "identities"),
        SuiteChoice::Pulses => (Suite::Pulses, "pulses"),
        SuiteChoice::Filters => (Suite::Filters, "filters"),
        SuiteChoice::Sampling => (Suite::Sampling, "sampling"),
        SuiteChoice::All => (Suite::All, "all"),
    };
    let config = SuiteConfig {
        order: args.order,
        timings: run.timings,
        policy: ctx.policy,
    };
    let reports = oracles::run_suite(suite, p, &config)?;
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.check_name.as_str())
        .collect();
    let failure = (!failed.is_empty()).then(|| Failure::Verification(format!("failed checks: {}", failed.join(", "))));
    let meta = Meta::new(p)
        .with("suite", name)?
        .with("checks", reports.len())?
        .with("failed", failed.len())?;
    let text = match run.format {
        Format::Json => Document::new(meta, reports.clone()).to_json()?,
        Format::Csv => export::to_csv(&reports.iter().map(ReportRow::from).collect::<Vec<_>>())?,
    };
    Ok(Outcome { text, failure })
}

/// Three components with amplitudes in [−1, 1], centers within ±3λ and
/// widths between 1/(2β) and 2/β.
fn random_mixture(p: &PulseParams, seed: u64) -> Result<GaussianMixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let components = (0..3)
        .map(|_| {
            GaussianComponent::new(
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-3.0..=3.0) * p.lambda(),
                rng.gen_range(0.5..=2.0) / p.beta(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GaussianMixture::new(components))
}

#[derive(Serialize)]
struct Row {
    x: f64,
    g: f64,
    g_tilde: f64,
}

#[derive(Serialize)]
struct OffsetRow {
    x: f64,
    g: f64,
    g_tilde: f64,
    f: f64,
    f_tilde: f64,
}

pub fn reconstruct(ctx: &Context, run: &RunArgs, args: &ReconstructArgs) -> std::result::Result<Outcome, Failure> {
    let p = &ctx.params;
    let g = grid(p, &args.grid)?;
    let (f, name) = match args.signal {
        SignalChoice::Phi => (
            InputSignal::Mixture(GaussianMixture::new(vec![GaussianComponent::generator(p, 0.0)])),
            "phi",
        ),
        SignalChoice::Mixture => (InputSignal::Mixture(random_mixture(p, args.seed)?), "mixture"),
        SignalChoice::Zero => (InputSignal::zero(), "zero"),
    };
    let a = args.offset.unwrap_or(0.0) * p.lambda();
    let r = sampling::run_pipeline(&f, p, &g, a)?;
    let passed = r.within_bound();
    let mut meta = grid_meta(Meta::new(p), &g)?
        .with("signal", name)?
        .with("offset", args.offset.unwrap_or(0.0))?
        .with("energy_f", r.energy_f)?
        .with("error_sup", r.error_sup)?
        .with("bound", r.bound)?
        .with("within_bound", passed)?;
    if args.signal == SignalChoice::Mixture {
        meta = meta.with("seed", args.seed)?;
    }
    let x: Vec<f64> = g.points().collect();
    // adding +0.0 folds −0.0 into 0.0
    let clean = |v: Vec<f64>| v.into_iter().map(|y| y + 0.0).collect::<Vec<f64>>();
    let gs = clean(r.g_exact.real_parts());
    let gt = clean(r.g_tilde.real_parts());
    let text = match args.offset {
        None => {
            let rows = (0..x.len())
                .map(|i| Row {
                    x: x[i],
                    g: gs[i],
                    g_tilde: gt[i],
                })
                .collect();
            render(run, meta, rows)?
        }
        Some(_) => {
            let o = sampling::run_offset_interpolation(&f, p, &g, a)?;
            let fs = clean(o.f_exact.real_parts());
            let ft = clean(o.f_tilde.real_parts());
            let meta = meta.with("offset_error_sup", o.error_sup)?;
            let rows = (0..x.len())
                .map(|i| OffsetRow {
                    x: x[i],
                    g: gs[i],
                    g_tilde: gt[i],
                    f: fs[i],
                    f_tilde: ft[i],
                })
                .collect();
            render(run, meta, rows)?
        }
    };
    let failure = (!passed).then(|| {
        Failure::Verification(format!(
            "error_sup^2 = {:e} exceeds the bound {:e}",
            r.error_sup * r.error_sup,
            r.bound
        ))
    });
    Ok(Outcome { text, failure })
}
