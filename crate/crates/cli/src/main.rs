use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use copycup::complexes::{
    build_product_code, distance_auto, CodeReport, CssCode, DistanceOptions, ProductKind, TwoTermComplex,
    DEFAULT_DISTANCE_CEILING,
};
use copycup::gates::{logical_action_cz, logical_action_ccz, preserves_codespace, synthesize_circuit, CircuitJson, GateCircuit};
use copycup::groups::{GroupAlgebraElement, GroupSpec};
use copycup::matching::{canonical_condition_sets, enumerate_configurations, raw_matching_count, screen, build_equations};
use copycup::orientation::{
    closed_form_theorem, enumerate_preorientations, CupVariant, LabelingJson, Mode, PreOrientation, Signature,
};
use copycup::search::{
    results_to_csv, run_search, scan_labelings, verify_manifest, Manifest, ManifestOptions, SearchConfig,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "copycup", version, about = "Group algebra product codes and copy-cup gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a product code and print its parameters.
    Build {
        #[command(flatten)]
        code: CodeArgs,
        /// Include H_X and H_Z as 0/1 text.
        #[arg(long)]
        matrices: bool,
    },
    /// List valid labelings of each coboundary.
    Orient {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 3)]
        lambda: usize,
        #[arg(long, default_value = "symmetric")]
        variant: CupVariant,
        /// Use the stored theorem instead of the brute-force oracle.
        #[arg(long)]
        closed_form: bool,
    },
    /// Enumerate matching configurations for a signature.
    Configs {
        #[arg(long, default_value_t = 3)]
        lambda: usize,
        #[arg(long, default_value = "non_associative")]
        variant: CupVariant,
        /// Signature as in,out,free sizes, e.g. 2,2,0
        #[arg(long)]
        sig: String,
        #[arg(long, default_value_t = 50)]
        show: usize,
    },
    /// Synthesize a copy-cup circuit (arity = number of polynomials).
    Synth {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value = "symmetric")]
        variant: CupVariant,
        /// Try labeling combinations until one acts nontrivially.
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value_t = 4096)]
        max_combinations: usize,
    },
    /// Check a circuit file against a code.
    VerifyGate {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Code distance: exhaustive where affordable, randomized otherwise.
    Distance {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 6)]
        wmax: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DISTANCE_CEILING)]
        ceiling: u128,
    },
    /// Run a search from a JSON config.
    Search {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        out: OutFormat,
    },
    /// Rebuild and check every row of one or more manifest files.
    VerifyManifest {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        skip_distance: bool,
    },
}

#[derive(Args)]
struct CodeArgs {
    /// Group as orders (`9x4`, `C9xC4`) or JSON.
    #[arg(long)]
    group: String,
    /// Check polynomial; repeat once per factor.
    #[arg(long = "poly", required = true)]
    polys: Vec<String>,
    #[arg(long, default_value = "balanced")]
    product: ProductKind,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

impl CodeArgs {
    fn complexes(&self) -> Result<Vec<TwoTermComplex>> {
        let group = GroupSpec::parse(&self.group)?.build()?;
        self.polys
            .iter()
            .map(|p| {
                let el = GroupAlgebraElement::parse(&group, p).with_context(|| format!("polynomial {p:?}"))?;
                Ok(TwoTermComplex::from_check(el))
            })
            .collect()
    }

    fn code(&self) -> Result<(Vec<TwoTermComplex>, CssCode)> {
        let cx = self.complexes()?;
        let code = build_product_code(&cx, self.product)?;
        Ok((cx, code))
    }
}

fn parse_sig(text: &str) -> Result<Signature> {
    let parts: Vec<usize> = text.split(',').map(|p| p.trim().parse()).collect::<Result<_, _>>()?;
    match parts[..] {
        [i, o, f] => Ok((i, o, f)),
        _ => bail!("signature must be in,out,free"),
    }
}

fn labelings(element: &GroupAlgebraElement, lambda: usize, variant: CupVariant) -> Result<Vec<PreOrientation>> {
    let mode = if closed_form_theorem(element.weight(), lambda, variant).is_ok() { Mode::ClosedForm } else { Mode::Oracle };
    Ok(enumerate_preorientations(element, lambda, variant, mode)?)
}

fn json_labelings(ls: &[PreOrientation]) -> Vec<LabelingJson> {
    ls.iter().map(PreOrientation::to_json).collect()
}

fn run(cli: Cli) -> Result<Value> {
    Ok(match cli.command {
        Command::Build { code, matrices } => {
            let (_, c) = code.code()?;
            let mut v = serde_json::to_value(CodeReport::new(&c, None))?;
            if matrices {
                v["hx"] = json!(c.hx.to_text());
                v["hz"] = json!(c.hz.to_text());
            }
            v
        }
        Command::Orient { code, lambda, variant, closed_form } => {
            let cx = code.complexes()?;
            let mode = if closed_form { Mode::ClosedForm } else { Mode::Oracle };
            let mut out = Vec::new();
            for c in &cx {
                let ls = enumerate_preorientations(c.coboundary(), lambda, variant, mode)?;
                out.push(json!({
                    "check": c.check().to_string(),
                    "element": c.coboundary().to_string(),
                    "lambda": lambda,
                    "variant": variant,
                    "labelings": json_labelings(&ls),
                }));
            }
            Value::Array(out)
        }
        Command::Configs { lambda, variant, sig, show } => {
            let sig = parse_sig(&sig)?;
            let weight = sig.0 + sig.1 + sig.2;
            let screens: Vec<Value> = build_equations(lambda, variant)?
                .iter()
                .map(|eq| json!({"equation": eq.term_string(), "screen": format!("{:?}", screen(eq, sig))}))
                .collect();
            let configs = enumerate_configurations(lambda, variant, sig, usize::MAX)?;
            let classes = canonical_condition_sets(&configs, weight);
            json!({
                "lambda": lambda,
                "variant": variant,
                "signature": sig,
                "raw_matchings": raw_matching_count(lambda, variant, sig)?.to_string(),
                "valid": configs.len(),
                "condition_classes": classes.len(),
                "equations": screens,
                "configurations": configs.iter().take(show).map(|c| json!({
                    "pairs": c.human(),
                    "conditions": c.conditions.human(),
                })).collect::<Vec<_>>(),
            })
        }
        Command::Synth { code, variant, scan, max_combinations } => {
            let (cx, c) = code.code()?;
            let lambda = c.lambda();
            let per: Vec<Vec<PreOrientation>> =
                cx.iter().map(|x| labelings(x.coboundary(), lambda, variant)).collect::<Result<_>>()?;
            if let Some(i) = per.iter().position(Vec::is_empty) {
                bail!("factor {} has no valid labeling for lambda = {lambda}", i + 1);
            }
            let combo: Vec<PreOrientation> = if scan {
                let s = scan_labelings(&c, &per, variant, max_combinations)?;
                s.nontrivial.or(s.first).expect("nonempty factors")
            } else {
                per.iter().map(|l| l[0].clone()).collect()
            };
            let circuit = synthesize_circuit(&c, &combo, variant)?;
            json!({
                "labelings": json_labelings(&combo),
                "preserved": preserves_codespace(&circuit),
                "nontrivial": nontrivial(&circuit),
                "circuit": circuit.to_json(),
            })
        }
        Command::VerifyGate { code, circuit } => {
            let (_, c) = code.code()?;
            let text = std::fs::read_to_string(&circuit).with_context(|| format!("reading {}", circuit.display()))?;
            let mut v: Value = serde_json::from_str(&text)?;
            // accept either a bare circuit or the output of `synth`
            if let Some(inner) = v.get("circuit") {
                v = inner.clone();
            }
            let cj: CircuitJson = serde_json::from_value(v)?;
            let gc = GateCircuit::from_json(&c, &cj)?;
            json!({"gates": gc.len(), "preserved": preserves_codespace(&gc), "nontrivial": nontrivial(&gc)})
        }
        Command::Distance { code, wmax, trials, seed, ceiling } => {
            let (_, c) = code.code()?;
            let opts = DistanceOptions { ceiling, ..DistanceOptions::default() };
            let d = distance_auto(&c, wmax, trials, seed, &opts)?;
            serde_json::to_value(CodeReport::new(&c, Some(d)))?
        }
        Command::Search { config, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg: SearchConfig = serde_json::from_str(&text)?;
            let results = run_search(&cfg)?;
            match out {
                OutFormat::Json => serde_json::to_value(&results)?,
                OutFormat::Csv => Value::String(results_to_csv(&results)),
            }
        }
        Command::VerifyManifest { manifests, trials, seed, skip_distance } => {
            let opts = ManifestOptions { trials, seed, skip_distance, ..ManifestOptions::default() };
            let mut reports = Vec::new();
            let mut failed = false;
            for path in &manifests {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let m = Manifest::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
                let r = verify_manifest(&m, &opts)?;
                failed |= !r.all_passed();
                reports.push(r);
            }
            if failed {
                emit(&serde_json::to_value(&reports)?)?;
                bail!("manifest verification failed");
            }
            serde_json::to_value(&reports)?
        }
    })
}

fn nontrivial(c: &GateCircuit) -> bool {
    if c.arity == 2 {
        logical_action_cz(c)
    } else {
        logical_action_ccz(c)
    }
}

fn emit(v: &Value) -> Result<()> {
    let text = match v {
        Value::String(s) => s.clone(),
        _ => serde_json::to_string_pretty(v)? + "\n",
    };
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    emit(&run(cli)?)
}
