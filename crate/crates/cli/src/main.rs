//! germlab: batch experiment runner for the exact orbital-integral laboratory.
//!
//! Subcommands wrap one library operation set each; every run is
//! deterministic given its flags and seed, outputs are CSV or JSON with all
//! rationals printed as `num/den`, and no floats appear anywhere.
//!
//! Exit codes: 0 = all checks pass, 1 = scientific disagreement (transfer
//! mismatch, failed matching, broken triangularity), 2 = usage or
//! instability error.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use germlab_core::denefpas::Ball;
use germlab_core::endoscopy::{local_matching_check, EndoscopicDatum, KappaFlip, MatchingReport};
use germlab_core::integrate::{self, Integrand, IntegrandTerm, TransferReport};
use germlab_core::linalg::q_to_string;
use germlab_core::localfield::{parse_element, FieldKind, FieldSpec, LocalElement, SquareClass};
use germlab_core::presburger::{format_exp_poly, parse_exp_poly, PiecewiseExpPoly};
use germlab_core::rootdata::{
    build_affine_diagram, fixed_choices_from_toml, parahoric_index_set, DynkinType, FixedChoices,
    IndexSetReading,
};
use germlab_core::sl2germs::{
    barbasch_moy_tuple, nilpotent_orbit_reps, oracle, sample_regular, shalika_germs, theta_matrix,
    verify_dominance,
};
use serde::Deserialize;
use std::io::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "germlab", version, about = "exact p-adic orbital integral experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Odd prime residual characteristic.
    #[arg(long, default_value_t = 5)]
    p: u64,
    /// Field kind: qp (mixed characteristic) or fpt (equal characteristic).
    #[arg(long, default_value = "qp")]
    field: String,
    /// Digit budget for inexact elements.
    #[arg(long, default_value_t = 24)]
    precision: usize,
}

impl FieldArgs {
    fn spec(&self) -> anyhow::Result<FieldSpec> {
        let kind = match self.field.as_str() {
            "qp" => FieldKind::MixedChar,
            "fpt" => FieldKind::EqualChar,
            other => return Err(anyhow!("unknown field kind `{other}` (use qp or fpt)")),
        };
        Ok(FieldSpec::new(kind, self.p, self.precision)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Nilpotent orbit representatives, the conjugation-classification
    /// oracle, and dominance verification of the Barbasch-Moy tuple.
    Orbits {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The Theta matrix of nilpotent orbital integrals with the
    /// triangularity verdict.
    Theta {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shalika germ tables on sampled regular semisimple elements.
    Germs {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Lowest sampled valuation of the characteristic point.
        #[arg(long, default_value_t = 2)]
        a0: i64,
        /// Number of valuation levels above a0 to sample.
        #[arg(long, default_value_t = 1)]
        a_span: i64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Samples per (class, valuation, sign) cell.
        #[arg(long, default_value_t = 2)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-1 endoscopic matching search with an optional negative control.
    KappaMatch {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Torus type of the datum: split, u, pi, or upi.
        #[arg(long, default_value = "u")]
        tau: String,
        /// Start of the matching window in ord(y).
        #[arg(long, default_value_t = 1)]
        a0: i64,
        #[arg(long, default_value_t = 3)]
        a_span: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Run the flattened-character negative control instead.
        #[arg(long)]
        flip: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-field comparison of the regression family (measures, shell
    /// integrals, Theta entries, germ values), or of a JSON experiment.
    AkCompare {
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 24)]
        precision: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Optional JSON experiment description to compare instead.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exponential-polynomial zero sets, eventual vanishing, and certified
    /// tail bounds.
    Presburger {
        /// Textual polynomial, e.g. "3*t^2*q^(-1*t) + 1/2*q^(2*t)".
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 2)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        range_lo: i64,
        #[arg(long, default_value_t = 100)]
        range_hi: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Affine diagrams and the parahoric indexing set.
    Parahorics {
        /// Dynkin type, e.g. A1, A3, D4, E6, F4, G2.
        #[arg(long = "type", default_value = "A1")]
        dynkin: String,
        /// Twisting order e (1, 2, or 3).
        #[arg(long, default_value_t = 1)]
        e: u8,
        /// TOML file with full fixed choices (overrides --type/--e).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use the rectangle reading of the indexing set.
        #[arg(long)]
        rectangles: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() {
    if let Ok(workers) = std::env::var("GERMLAB_WORKERS") {
        if let Ok(n) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Orbits { field, depth, seed, out } => orbits(field, depth, seed, out),
        Command::Theta { field, depth, k, out } => theta(field, depth, k, out),
        Command::Germs { field, depth, k, a0, a_span, seed, samples, out } => {
            germs(field, depth, k, a0, a_span, seed, samples, out)
        }
        Command::KappaMatch { field, depth, tau, a0, a_span, seed, flip, out } => {
            kappa_match(field, depth, tau, a0, a_span, seed, flip, out)
        }
        Command::AkCompare { p, precision, depth, seed, config, out } => {
            ak_compare(p, precision, depth, seed, config, out)
        }
        Command::Presburger { poly, q, range_lo, range_hi, out } => {
            presburger_cmd(poly, q, range_lo, range_hi, out)
        }
        Command::Parahorics { dynkin, e, config, rectangles, out } => {
            parahorics(dynkin, e, config, rectangles, out)
        }
    }
}

fn orbits(field: FieldArgs, depth: usize, seed: u64, out: Option<PathBuf>) -> anyhow::Result<i32> {
    let spec = field.spec()?;
    let mut text = String::new();
    text.push_str("orbit,representative\n");
    for (label, rep) in nilpotent_orbit_reps(spec) {
        let name = label.map(|s| s.label().to_string()).unwrap_or_else(|| "zero".into());
        text.push_str(&format!("{name},\"[[{}, {}], [{}, -({})]]\"\n", rep.a, rep.b, rep.c, rep.a));
    }
    let classification = oracle::classify_nilpotents(spec, depth.max(3))?;
    text.push_str(&format!(
        "\nclassification depth {}: {} classes ({} unit-level + {} scaled + zero)\n",
        classification.depth,
        classification.class_count,
        classification.unit_level_components,
        classification.scaled_level_components
    ));
    let all_ok = classification.class_count == 5;
    for pair in barbasch_moy_tuple(spec, 5) {
        let report = verify_dominance(&pair, spec, depth.max(3), 40, seed)?;
        let name = pair.label.map(|s| s.label().to_string()).unwrap_or_else(|| "zero".into());
        text.push_str(&format!(
            "dominance {} at {}: {}\n",
            name,
            pair.point.label(),
            if report.vacuous {
                "vacuous (zero orbit)".to_string()
            } else {
                format!("verified on {} samples to depth {}", report.samples, report.verified_to_depth)
            }
        ));
    }
    emit(&out, &text)?;
    Ok(if all_ok { 0 } else { 1 })
}

fn theta(field: FieldArgs, depth: usize, k: usize, out: Option<PathBuf>) -> anyhow::Result<i32> {
    let spec = field.spec()?;
    let tuple = barbasch_moy_tuple(spec, k);
    if tuple.is_empty() {
        return Err(anyhow!("no Barbasch-Moy tuple of size {k} (at most 5 classes)"));
    }
    let theta = theta_matrix(&tuple, depth, spec)?;
    let mut text = String::new();
    let labels: Vec<String> = theta
        .labels
        .iter()
        .map(|l| l.map(|s| s.label().to_string()).unwrap_or_else(|| "zero".into()))
        .collect();
    text.push_str(&format!("orbit,{}\n", labels.join(",")));
    for (i, row) in theta.entries.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(q_to_string).collect();
        text.push_str(&format!("{},{}\n", labels[i], cells.join(",")));
    }
    let triangular = theta.is_upper_triangular();
    text.push_str(&format!("\ndet,{}\n", q_to_string(&theta.det)));
    text.push_str(&format!("triangular,{}\n", triangular));
    text.push_str(&format!("stable,{}\n", theta.stable));
    emit(&out, &text)?;
    Ok(if triangular && theta.stable { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn germs(
    field: FieldArgs,
    depth: usize,
    k: usize,
    a0: i64,
    a_span: i64,
    seed: u64,
    samples: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<i32> {
    let spec = field.spec()?;
    let tuple = barbasch_moy_tuple(spec, k);
    let theta = theta_matrix(&tuple, depth, spec)?;
    let mut text = String::new();
    text.push_str("class,valuation,sign,sample,orbital,gamma,det,residual_zero\n");
    let mut ok = true;
    for class in SquareClass::ALL {
        for dv in 0..=a_span {
            let v = a0 + dv;
            if class.val_parity_odd() != (v.rem_euclid(2) == 1) {
                continue;
            }
            for sign in [1i8, -1] {
                let xs = sample_regular(spec, seed, class, v, sign, samples)?;
                for (i, s) in xs.iter().enumerate() {
                    let table = shalika_germs(&s.x, &tuple, &theta, depth, spec)?;
                    let residual = table.expansion_residual(&theta);
                    let rz = residual.iter().all(num_traits::Zero::is_zero);
                    ok &= rz;
                    let orb: Vec<String> = table.orbital.iter().map(q_to_string).collect();
                    let gam: Vec<String> = table.gamma.iter().map(q_to_string).collect();
                    text.push_str(&format!(
                        "{},{},{},{},\"{}\",\"{}\",{},{}\n",
                        class.label(),
                        v,
                        sign,
                        i,
                        orb.join(";"),
                        gam.join(";"),
                        q_to_string(&table.det),
                        rz
                    ));
                }
            }
        }
    }
    emit(&out, &text)?;
    Ok(if ok { 0 } else { 1 })
}

fn parse_tau(tau: &str) -> anyhow::Result<EndoscopicDatum> {
    Ok(match tau {
        "split" => EndoscopicDatum::split(),
        "u" => EndoscopicDatum::elliptic(SquareClass::U)?,
        "pi" => EndoscopicDatum::elliptic(SquareClass::Pi)?,
        "upi" => EndoscopicDatum::elliptic(SquareClass::UPi)?,
        other => return Err(anyhow!("unknown torus type `{other}`")),
    })
}

fn matching_json(report: &MatchingReport) -> serde_json::Value {
    serde_json::json!({
        "pair": report.pair_label,
        "success": report.success,
        "f_h": report.f_h.as_ref().map(|f| {
            serde_json::json!({
                "lo": f.lo,
                "values": f.values.iter().map(q_to_string).collect::<Vec<_>>(),
                "geometric_tail": f.geometric_tail,
            })
        }),
        "residuals": report
            .residuals
            .iter()
            .map(|(a, r)| serde_json::json!({"a": a, "residual": q_to_string(r)}))
            .collect::<Vec<_>>(),
        "obstruction": report.obstruction.iter().map(q_to_string).collect::<Vec<_>>(),
    })
}

#[allow(clippy::too_many_arguments)]
fn kappa_match(
    field: FieldArgs,
    depth: usize,
    tau: String,
    a0: i64,
    a_span: usize,
    seed: u64,
    flip: bool,
    out: Option<PathBuf>,
) -> anyhow::Result<i32> {
    let spec = field.spec()?;
    let datum = parse_tau(&tau)?;
    let flip = if flip { KappaFlip::Flattened } else { KappaFlip::Correct };
    let tuple = barbasch_moy_tuple(spec, 5);
    let mut reports = Vec::new();
    let mut all_ok = true;
    for pair in &tuple {
        let report = local_matching_check(&datum, pair, spec, a0, a_span, 3, depth, seed, flip)?;
        all_ok &= report.success;
        reports.push(matching_json(&report));
    }
    let doc = serde_json::json!({
        "p": spec.p,
        "field": spec.kind.label(),
        "tau": tau,
        "window": {"a0": a0, "span": a_span},
        "control": matches!(flip, KappaFlip::Flattened),
        "reports": reports,
        "success": all_ok,
    });
    emit(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    Ok(if all_ok { 0 } else { 1 })
}

#[derive(Debug, Deserialize)]
struct ExperimentConfig {
    p: u64,
    #[serde(default = "default_precision")]
    precision: usize,
    depth: usize,
    /// Formula program text, or a path to a .dp file via `formula_file`.
    #[serde(default)]
    formula: Option<String>,
    #[serde(default)]
    formula_file: Option<PathBuf>,
    /// Per-VF-variable balls: literal center and radius.
    #[serde(rename = "box")]
    boxes: Vec<BallConfig>,
    #[serde(default)]
    integrand: Vec<TermConfig>,
}

fn default_precision() -> usize {
    24
}

#[derive(Debug, Deserialize)]
struct BallConfig {
    #[serde(default)]
    center: Option<String>,
    radius: i64,
}

#[derive(Debug, Deserialize)]
struct TermConfig {
    coeff: String,
    /// Optional `p^(mult * ord(g))` factor with `g` a polynomial in the
    /// formula's variables.
    #[serde(default)]
    ord_g: Option<String>,
    #[serde(default)]
    ord_mult: i64,
}

fn run_experiment(cfg: &ExperimentConfig, spec: FieldSpec) -> anyhow::Result<integrate::IntegralResult> {
    let text = match (&cfg.formula, &cfg.formula_file) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)?,
        (None, None) => return Err(anyhow!("experiment needs `formula` or `formula_file`")),
    };
    let set = germlab_core::denefpas::parse(&text)?;
    let mut boxes = Vec::new();
    for b in &cfg.boxes {
        let center = match &b.center {
            Some(lit) => parse_element(spec, lit)?,
            None => LocalElement::zero(spec),
        };
        boxes.push(Ball::new(center, b.radius));
    }
    if cfg.integrand.is_empty() {
        Ok(integrate::measure(&set, &boxes, cfg.depth, spec)?)
    } else {
        let mut terms = Vec::new();
        for t in &cfg.integrand {
            let coeff = germlab_core::linalg::q_from_string(&t.coeff)
                .ok_or_else(|| anyhow!("bad rational `{}` (use num/den)", t.coeff))?;
            let ord_factor = match &t.ord_g {
                None => None,
                Some(g) => {
                    let scope: Vec<(String, germlab_core::denefpas::Sort)> = set.signature.clone();
                    let mut parser = germlab_core::denefpas::Parser::with_scope(scope);
                    // Parse `g` as the left side of a trivial atom.
                    let f = parser.parse_formula(&format!("{g} = 0"))?;
                    let germlab_core::denefpas::Formula::VfEq(term, _) = f else {
                        return Err(anyhow!("ord_g must be a valued-field polynomial"));
                    };
                    Some((t.ord_mult, term))
                }
            };
            terms.push(IntegrandTerm { coeff, ord_factor, support: None });
        }
        Ok(integrate::integrate(&Integrand { terms }, &set, &boxes, cfg.depth, spec)?)
    }
}

fn report_json(name: &str, r: &TransferReport) -> serde_json::Value {
    // Both values were required to be stable before comparison.
    serde_json::json!({
        "expression": name,
        "p": r.p,
        "depth": r.depth,
        "value_qp": q_to_string(&r.value_mixed),
        "value_fpt": q_to_string(&r.value_equal),
        "stable": true,
        "agree": r.agree,
    })
}

fn ak_compare(
    p: u64,
    precision: usize,
    depth: usize,
    seed: u64,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> anyhow::Result<i32> {
    if let Some(path) = config {
        let cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let report = integrate::transfer_compare(cfg.p, cfg.precision, |spec| {
            run_experiment(&cfg, spec)
                .map_err(|e| germlab_core::Error::Domain(format!("experiment failed: {e}")))
        })?;
        let doc = report_json("config", &report);
        emit(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
        return Ok(if report.agree { 0 } else { 1 });
    }
    let reports = germlab_core::sl2germs::ak_regression_family(p, precision, depth, seed)?;
    let mut all_agree = true;
    let mut rows = Vec::new();
    for (name, r) in &reports {
        all_agree &= r.agree;
        rows.push(report_json(name, r));
    }
    let doc = serde_json::json!({"p": p, "depth": depth, "expressions": rows, "agree": all_agree});
    emit(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    Ok(if all_agree { 0 } else { 1 })
}

fn presburger_cmd(
    poly: String,
    q: u64,
    range_lo: i64,
    range_hi: i64,
    out: Option<PathBuf>,
) -> anyhow::Result<i32> {
    let f = parse_exp_poly(&poly)?;
    let zeros = f.zero_set_bounded(q, (range_lo, range_hi))?;
    let ray = PiecewiseExpPoly::on_ray(range_lo, f.clone());
    let eventually_zero = ray.is_eventually_zero()?;
    let tail = if f.is_zero() { None } else { Some(f.uniform_tail_bound(q)?) };
    let doc = serde_json::json!({
        "poly": format_exp_poly(&f),
        "q": q,
        "range": [range_lo, range_hi],
        "zeros": zeros,
        "eventually_zero": eventually_zero,
        "tail_bound": tail,
    });
    emit(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    Ok(0)
}

fn parahorics(
    dynkin: String,
    e: u8,
    config: Option<PathBuf>,
    rectangles: bool,
    out: Option<PathBuf>,
) -> anyhow::Result<i32> {
    let fc: FixedChoices = match config {
        Some(path) => fixed_choices_from_toml(&std::fs::read_to_string(&path)?)?,
        None => {
            let ty = DynkinType::parse(&dynkin)?;
            let diagram = build_affine_diagram(ty, e)?;
            let action = diagram.identity();
            FixedChoices {
                sigma: germlab_core::rootdata::EnumeratedGroup::cyclic(1),
                tame_order: 1,
                unramified_order: 1,
                qfr: 0,
                components: vec![germlab_core::rootdata::ComponentChoice { diagram, action }],
            }
        }
    };
    let reading = if rectangles { IndexSetReading::Rectangles } else { IndexSetReading::Literal };
    let ps = parahoric_index_set(&fc, reading)?;
    let doc = serde_json::json!({
        "factor_orbits": ps.factor_orbits,
        "s_elements": ps.elements,
        "index_set_size": ps.subsets.len(),
        "subsets": ps.subsets,
    });
    emit(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    Ok(0)
}
